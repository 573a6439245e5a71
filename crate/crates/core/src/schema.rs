//! JSON instance descriptions.
//!
//! ```json
//! {
//!   "tail_bound": { "kind": "power-law", "A": 0.01, "beta": 1.0, "eps0": 1.0 },
//!   "arms": [
//!     { "family": "uniform", "low": 0.0, "high": 0.9 },
//!     { "family": "power-tail", "mu_star": 0.5, "A": 1.0, "beta": 2.0, "width": 0.5 }
//!   ],
//!   "config": { "epsilon": 0.02, "delta": 0.1 }
//! }
//! ```
//!
//! Tabulated bounds use `"kind": "tabulated"` with `"knots": [[x, G(x)], ...]`
//! and an optional `eps0`. Arbitrary arms use `"family": "piecewise-cdf"` with
//! `knots` and one curve per interval.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ArmFamily, ArmModel, BanditInstance, Curve, PiecewiseCdf, TailBound, TailShape};
use crate::policies::PolicyConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TailBoundSpec {
    PowerLaw {
        #[serde(rename = "A")]
        a: f64,
        beta: f64,
        eps0: f64,
    },
    Tabulated {
        knots: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps0: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArmSpec {
    Uniform {
        low: f64,
        high: f64,
    },
    PowerTail {
        mu_star: f64,
        #[serde(rename = "A")]
        a: f64,
        beta: f64,
        width: f64,
    },
    PiecewiseCdf {
        knots: Vec<f64>,
        pieces: Vec<Curve>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub tail_bound: TailBoundSpec,
    pub arms: Vec<ArmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

impl TailBoundSpec {
    pub fn build(&self) -> Result<TailBound> {
        match self {
            TailBoundSpec::PowerLaw { a, beta, eps0 } => TailBound::power_law(*a, *beta, *eps0),
            TailBoundSpec::Tabulated { knots, eps0 } => TailBound::tabulated(knots.clone(), *eps0),
        }
    }

    pub fn describe(tb: &TailBound) -> Self {
        match tb.shape() {
            TailShape::PowerLaw { a, beta } => TailBoundSpec::PowerLaw { a: *a, beta: *beta, eps0: tb.eps0() },
            TailShape::Tabulated { knots } => TailBoundSpec::Tabulated { knots: knots.clone(), eps0: Some(tb.eps0()) },
        }
    }
}

impl ArmSpec {
    pub fn build(&self) -> Result<ArmModel> {
        match self {
            ArmSpec::Uniform { low, high } => ArmModel::uniform(*low, *high),
            ArmSpec::PowerTail { mu_star, a, beta, width } => ArmModel::power_tail(*mu_star, *a, *beta, *width),
            ArmSpec::PiecewiseCdf { knots, pieces } => {
                Ok(ArmModel::piecewise(PiecewiseCdf::new(knots.clone(), pieces.clone())?))
            }
        }
    }

    pub fn describe(arm: &ArmModel) -> Self {
        match arm.family() {
            ArmFamily::Uniform { low, high } => ArmSpec::Uniform { low: *low, high: *high },
            ArmFamily::PowerTail { mu_star, a, beta, width } => {
                ArmSpec::PowerTail { mu_star: *mu_star, a: *a, beta: *beta, width: *width }
            }
            ArmFamily::Piecewise(cdf) => {
                ArmSpec::PiecewiseCdf { knots: cdf.knots().to_vec(), pieces: cdf.pieces().to_vec() }
            }
        }
    }
}

impl InstanceFile {
    pub fn describe(inst: &BanditInstance, cfg: Option<&PolicyConfig>) -> Self {
        InstanceFile {
            tail_bound: TailBoundSpec::describe(inst.tail_bound()),
            arms: inst.arms().iter().map(ArmSpec::describe).collect(),
            config: cfg.map(|c| ConfigSpec { epsilon: Some(c.epsilon), delta: Some(c.delta) }),
        }
    }

    pub fn instance(&self) -> Result<BanditInstance> {
        let arms = self
            .arms
            .iter()
            .enumerate()
            .map(|(k, a)| a.build().map_err(|e| Error::Schema(format!("arm {k}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let tb = self.tail_bound.build().map_err(|e| Error::Schema(format!("tail_bound: {e}")))?;
        BanditInstance::new(arms, tb)
    }

    /// Resolves `(epsilon, delta)` from the file, with explicit overrides winning.
    pub fn config(&self, epsilon: Option<f64>, delta: Option<f64>) -> Result<PolicyConfig> {
        let file = self.config.unwrap_or(ConfigSpec { epsilon: None, delta: None });
        let eps = epsilon
            .or(file.epsilon)
            .ok_or_else(|| Error::InvalidParameter("epsilon not given in the instance file or flags".into()))?;
        let delta = delta
            .or(file.delta)
            .ok_or_else(|| Error::InvalidParameter("delta not given in the instance file or flags".into()))?;
        PolicyConfig::new(eps, delta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        InstanceFile::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}
