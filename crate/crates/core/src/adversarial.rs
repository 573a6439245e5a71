//! Hypothesis instances used by the sampling lower bounds.
//!
//! Each construction lifts one arm's maximum (or the unified arm's) to
//! `mu* + eps` while keeping every tail function above the tail bound. An
//! algorithm that samples the lifted arm too rarely cannot tell the two
//! instances apart.

use serde::Serialize;

use crate::bounds::lower_bound_log;
use crate::error::{Error, Result};
use crate::model::{ArmModel, BanditInstance, Curve, PiecewiseCdf, Segment, TailBound};
use crate::policies::PolicyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// The arm's maximum lies more than `eps0` below the new maximum.
    Case1,
    Case2,
    Unified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Arm(usize),
    Unified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisParams {
    /// Scale applied to the base CDF below `mu_bar`.
    pub gamma: f64,
    /// Level defining `mu_bar`; absent when the arm sits far below the new maximum.
    pub p_eps: Option<f64>,
    pub mu_bar: f64,
    /// Above this point the modified CDF is the reflected tail bound.
    pub threshold: f64,
    /// Tail mass of the modified arm entering `t_k`.
    pub gamma_t: f64,
    pub t_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisInstance {
    base: BanditInstance,
    target: Target,
    case: CaseTag,
    modified_cdf: PiecewiseCdf,
    params: HypothesisParams,
    instance: BanditInstance,
}

impl HypothesisInstance {
    pub fn base(&self) -> &BanditInstance {
        &self.base
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn modified_cdf(&self) -> &PiecewiseCdf {
        &self.modified_cdf
    }

    pub fn params(&self) -> &HypothesisParams {
        &self.params
    }

    /// The hypothesis as a bandit instance. For the unified target this is a
    /// single arm carrying the modified mixture, with tail bound `G/|K|`.
    pub fn instance(&self) -> &BanditInstance {
        &self.instance
    }

    pub fn new_max(&self) -> f64 {
        self.modified_cdf.sup()
    }
}

/// `1 - G(mu* + eps - mu)` below `mu* + eps`, one from there on.
pub fn f_star(mu: f64, mu_star_global: f64, eps: f64, tb: &TailBound) -> Result<f64> {
    let top = mu_star_global + eps;
    if mu >= top {
        return Ok(1.0);
    }
    Ok(1.0 - tb.eval(top - mu)?)
}

fn assemble(segments: Vec<Segment>) -> Result<PiecewiseCdf> {
    PiecewiseCdf::from_segments(segments).map_err(|e| Error::Construction(e.to_string()))
}

fn check_eps(inst: &BanditInstance, cfg: &PolicyConfig) -> Result<f64> {
    cfg.check_against(inst.tail_bound())
}

/// Tail mass `gamma_k` of arm `k` under its hypothesis, and whether the arm
/// sits in the far case.
fn gamma_t(inst: &BanditInstance, k: usize, cfg: &PolicyConfig) -> Result<(f64, bool)> {
    let tb = inst.tail_bound();
    let top = inst.mu_star() + cfg.epsilon;
    let mu_k = inst.arms()[k].mu_star();
    if mu_k < top - tb.eps0() {
        Ok((tb.max_value(), true))
    } else {
        Ok((tb.eval(top - mu_k)?, false))
    }
}

fn check_arm(inst: &BanditInstance, k: usize) -> Result<()> {
    if k >= inst.num_arms() {
        return Err(Error::InvalidParameter(format!(
            "arm index {k} out of range for {} arms",
            inst.num_arms()
        )));
    }
    Ok(())
}

fn t_from(delta: f64, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::ZeroTail { at: 0.0 });
    }
    Ok(lower_bound_log(delta) / (16.0 * gamma))
}

/// Lifts arm `k` to `mu* + eps`.
pub fn build_hypothesis(inst: &BanditInstance, k: usize, cfg: &PolicyConfig) -> Result<HypothesisInstance> {
    check_arm(inst, k)?;
    check_eps(inst, cfg)?;
    let tb = inst.tail_bound();
    let arm = &inst.arms()[k];
    let base = arm.to_piecewise();
    let top = inst.mu_star() + cfg.epsilon;
    let mu_k = arm.mu_star();
    let (g_t, far) = gamma_t(inst, k, cfg)?;

    let (case, segments, gamma, p_eps, mu_bar, threshold) = if far {
        let threshold = top - tb.eps0();
        let gamma = 1.0 - tb.max_value();
        let mut segs: Vec<Segment> = base
            .restrict(f64::NEG_INFINITY, mu_k)
            .into_iter()
            .map(|s| Segment { curve: s.curve.scaled(gamma), ..s })
            .collect();
        segs.push(Segment {
            start: mu_k,
            end: threshold,
            curve: Curve::constant(gamma * arm.cdf(mu_k)),
        });
        segs.extend(tb.reflected_segments(top, threshold, 1.0));
        (CaseTag::Case1, segs, gamma, None, mu_k, threshold)
    } else {
        let p = 1.0 - tb.max_value() + g_t;
        let mu_bar = arm.sup_at_most(p);
        let f_bar = arm.cdf(mu_bar);
        let gamma = 1.0 - g_t / f_bar;
        let mut segs: Vec<Segment> = base
            .restrict(f64::NEG_INFINITY, mu_bar)
            .into_iter()
            .map(|s| Segment { curve: s.curve.scaled(gamma), ..s })
            .collect();
        segs.extend(
            base.restrict(mu_bar, mu_k)
                .into_iter()
                .map(|s| Segment { curve: s.curve.shifted(-g_t), ..s }),
        );
        segs.extend(tb.reflected_segments(top, mu_k, 1.0));
        (CaseTag::Case2, segs, gamma, Some(p), mu_bar, mu_k)
    };

    let modified_cdf = assemble(segments)?;
    let mut arms = inst.arms().to_vec();
    arms[k] = ArmModel::piecewise(modified_cdf.clone());
    let instance = BanditInstance::new(arms, tb.clone())?;
    Ok(HypothesisInstance {
        base: inst.clone(),
        target: Target::Arm(k),
        case,
        modified_cdf,
        params: HypothesisParams {
            gamma,
            p_eps,
            mu_bar,
            threshold,
            gamma_t: g_t,
            t_k: t_from(cfg.delta, g_t)?,
        },
        instance,
    })
}

/// Lifts the unified arm (the uniform mixture of all arms) to `mu* + eps`.
pub fn build_unified_hypothesis(inst: &BanditInstance, cfg: &PolicyConfig) -> Result<HypothesisInstance> {
    let g_eps = check_eps(inst, cfg)?;
    let tb = inst.tail_bound();
    let weight = 1.0 / inst.num_arms() as f64;
    let mixture = inst.unified_cdf()?;
    let mu_star = inst.mu_star();
    let top = mu_star + cfg.epsilon;

    let shift = weight * g_eps;
    let p = 1.0 - weight * tb.max_value() + shift;
    let mu_bar = mixture.sup_at_most(p);
    let gamma = 1.0 - shift / mixture.eval(mu_bar);
    let mut segs: Vec<Segment> = mixture
        .restrict(f64::NEG_INFINITY, mu_bar)
        .into_iter()
        .map(|s| Segment { curve: s.curve.scaled(gamma), ..s })
        .collect();
    segs.extend(
        mixture
            .restrict(mu_bar, mu_star)
            .into_iter()
            .map(|s| Segment { curve: s.curve.shifted(-shift), ..s }),
    );
    segs.extend(tb.reflected_segments(top, mu_star, weight));

    let modified_cdf = assemble(segs)?;
    let instance = BanditInstance::new(vec![ArmModel::piecewise(modified_cdf.clone())], tb.scaled(weight)?)?;
    Ok(HypothesisInstance {
        base: inst.clone(),
        target: Target::Unified,
        case: CaseTag::Unified,
        modified_cdf,
        params: HypothesisParams {
            gamma,
            p_eps: Some(p),
            mu_bar,
            threshold: mu_star,
            gamma_t: shift,
            t_k: t_from(cfg.delta, shift)?,
        },
        instance,
    })
}

/// `ln(3/(20 delta)) / (16 gamma_k)`: samples arm `k` needs before its
/// hypothesis can be told apart from the base instance.
pub fn min_samples_t_k(inst: &BanditInstance, k: usize, cfg: &PolicyConfig) -> Result<f64> {
    check_arm(inst, k)?;
    check_eps(inst, cfg)?;
    let (g, _) = gamma_t(inst, k, cfg)?;
    t_from(cfg.delta, g)
}
