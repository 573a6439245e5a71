//! Reward distributions, tail functions and the tail-bound assumption.

mod arm;
mod piecewise;
mod tail;

pub use arm::{ArmFamily, ArmModel};
pub use piecewise::{Curve, PiecewiseCdf, Segment, Term, CDF_TOLERANCE};
pub use tail::{TailBound, TailShape};

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack allowed before a grid point counts as violating `G_k >= G`.
pub const ASSUMPTION_TOLERANCE: f64 = 1e-12;

/// Finite arm set plus the tail bound every arm is supposed to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    arms: Vec<ArmModel>,
    tail_bound: TailBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub certified: bool,
    /// Largest `G(eps) - G_k(eps)` seen on the grid; non-positive when certified.
    pub worst_violation: f64,
    pub worst_arm: usize,
    pub worst_eps: f64,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmModel>, tail_bound: TailBound) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::Schema("instance needs at least one arm".into()));
        }
        Ok(BanditInstance { arms, tail_bound })
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn tail_bound(&self) -> &TailBound {
        &self.tail_bound
    }

    pub fn mu_star(&self) -> f64 {
        self.arms.iter().map(ArmModel::mu_star).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index arm attaining the global maximum.
    pub fn best_arm(&self) -> usize {
        let top = self.mu_star();
        self.arms.iter().position(|a| a.mu_star() == top).unwrap()
    }

    /// Checks `G_k(eps) >= G(eps)` for every arm on a uniform grid over `[0, eps0]`.
    pub fn verify_assumption(&self, grid_points: usize) -> AssumptionReport {
        let grid_points = grid_points.max(2);
        let tb = &self.tail_bound;
        let eps0 = tb.eps0();
        let mut report = AssumptionReport {
            certified: true,
            worst_violation: f64::NEG_INFINITY,
            worst_arm: 0,
            worst_eps: 0.0,
        };
        for i in 0..grid_points {
            let eps = eps0 * i as f64 / (grid_points - 1) as f64;
            let bound = tb.eval(eps).expect("grid lies inside the domain");
            for (k, arm) in self.arms.iter().enumerate() {
                let gap = bound - arm.tail(eps);
                if gap > report.worst_violation {
                    report.worst_violation = gap;
                    report.worst_arm = k;
                    report.worst_eps = eps;
                }
            }
        }
        report.certified = report.worst_violation <= ASSUMPTION_TOLERANCE;
        report
    }

    /// Largest factor `alpha` on the grid such that `G_k >= alpha * G` for
    /// every arm. Below one the bound is optimistic, above one conservative.
    pub fn tail_ratio(&self, grid_points: usize) -> f64 {
        let grid_points = grid_points.max(2);
        let tb = &self.tail_bound;
        let mut alpha = f64::INFINITY;
        for i in 1..grid_points {
            let eps = tb.eps0() * i as f64 / (grid_points - 1) as f64;
            let bound = tb.eval(eps).expect("grid lies inside the domain");
            for arm in &self.arms {
                alpha = alpha.min(arm.tail(eps) / bound);
            }
        }
        alpha
    }

    /// Distribution of the unified arm: each draw picks an arm uniformly.
    pub fn unified_cdf(&self) -> Result<PiecewiseCdf> {
        let pieces: Vec<PiecewiseCdf> = self.arms.iter().map(ArmModel::to_piecewise).collect();
        let w = 1.0 / self.arms.len() as f64;
        let parts: Vec<(f64, &PiecewiseCdf)> = pieces.iter().map(|p| (w, p)).collect();
        PiecewiseCdf::mixture(&parts)
    }
}
