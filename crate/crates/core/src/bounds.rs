//! Closed-form sample-complexity bounds and robustness quantities.
//!
//! Unlike the policies these read the true arm maxima: they are analyst-side
//! tools. Violated preconditions clear flags instead of failing, so values can
//! still be tabulated outside the proven regime.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BanditInstance, TailBound};
use crate::policies::{compute_l, unified_sample_count, PolicyConfig, MIN_VALID_L};

/// Largest `delta` for which the lower bounds hold: `(3/20) e^{-3}`.
pub fn lower_bound_delta_limit() -> f64 {
    0.15 * (-3.0f64).exp()
}

/// `ln(3 / (20 delta))`
pub fn lower_bound_log(delta: f64) -> f64 {
    (3.0 / (20.0 * delta)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundFlags {
    pub concave_required_and_held: bool,
    pub delta_small_enough: bool,
    pub l_at_least_10: bool,
}

impl BoundFlags {
    pub fn all_met(&self) -> bool {
        self.concave_required_and_held && self.delta_small_enough && self.l_at_least_10
    }

    fn none_required() -> Self {
        BoundFlags { concave_required_and_held: true, delta_small_enough: true, l_at_least_10: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub per_arm_terms: Vec<f64>,
    pub constant: f64,
    pub assumptions_met: BoundFlags,
}

impl BoundReport {
    /// Sum of the parts, for cross-checking `value`.
    pub fn recompute(&self) -> f64 {
        self.per_arm_terms.iter().sum::<f64>() + self.constant
    }
}

/// `min(max(eps, gap), eps0)`
pub fn theta_k(eps: f64, eps0: f64, gap: f64) -> f64 {
    eps.max(gap).min(eps0)
}

fn positive(tb: &TailBound, x: f64) -> Result<f64> {
    let g = tb.eval(x)?;
    if g > 0.0 {
        Ok(g)
    } else {
        Err(Error::ZeroTail { at: x })
    }
}

fn lower_flags(tb: &TailBound, cfg: &PolicyConfig) -> BoundFlags {
    BoundFlags {
        concave_required_and_held: tb.is_concave(),
        delta_small_enough: cfg.delta <= lower_bound_delta_limit(),
        l_at_least_10: true,
    }
}

/// Lower bound on `E[T]` for any correct algorithm in the multi-arm model.
/// One optimal arm (the lowest-index one) is left out of the sum.
pub fn lower_bound_multi(inst: &BanditInstance, cfg: &PolicyConfig) -> Result<BoundReport> {
    let tb = inst.tail_bound();
    let mu_star = inst.mu_star();
    let excluded = inst.best_arm();
    let log = lower_bound_log(cfg.delta);
    let mut per_arm_terms = Vec::with_capacity(inst.num_arms().saturating_sub(1));
    for (k, arm) in inst.arms().iter().enumerate() {
        if k == excluded {
            continue;
        }
        let theta = theta_k(cfg.epsilon, tb.eps0(), mu_star - arm.mu_star());
        per_arm_terms.push(log / (32.0 * positive(tb, theta)?));
    }
    Ok(BoundReport {
        value: per_arm_terms.iter().sum(),
        per_arm_terms,
        constant: 0.0,
        assumptions_met: lower_flags(tb, cfg),
    })
}

fn max_cb_terms(inst: &BanditInstance, cfg: &PolicyConfig, budget: f64, shift: f64) -> Result<Vec<f64>> {
    let tb = inst.tail_bound();
    let mu_star = inst.mu_star();
    inst.arms()
        .iter()
        .map(|arm| {
            let theta = theta_k(cfg.epsilon, tb.eps0(), mu_star - shift - arm.mu_star());
            Ok(budget / positive(tb, theta)?)
        })
        .collect()
}

/// Upper bound on the expected sample count of Max-CB.
pub fn upper_bound_max_cb(inst: &BanditInstance, cfg: &PolicyConfig) -> Result<BoundReport> {
    let tb = inst.tail_bound();
    let l = compute_l(inst.num_arms(), cfg, tb)?;
    let budget = l.value - cfg.delta.ln();
    let per_arm_terms = max_cb_terms(inst, cfg, budget, 0.0)?;
    let constant = inst.num_arms() as f64;
    Ok(BoundReport {
        value: per_arm_terms.iter().sum::<f64>() + constant,
        per_arm_terms,
        constant,
        assumptions_met: BoundFlags { l_at_least_10: !l.below_ten, ..BoundFlags::none_required() },
    })
}

/// Lower bound for any correct algorithm in the unified-arm model.
pub fn lower_bound_unified(num_arms: usize, cfg: &PolicyConfig, tb: &TailBound) -> Result<BoundReport> {
    let g = positive(tb, cfg.epsilon)?;
    let value = num_arms as f64 / (16.0 * g) * lower_bound_log(cfg.delta);
    Ok(BoundReport { value, per_arm_terms: Vec::new(), constant: value, assumptions_met: lower_flags(tb, cfg) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnifiedUpperBound {
    pub report: BoundReport,
    /// Exact number of draws the unified-arm algorithm makes.
    pub exact_count: u64,
}

pub fn upper_bound_unified(num_arms: usize, cfg: &PolicyConfig, tb: &TailBound) -> Result<UnifiedUpperBound> {
    let g = positive(tb, cfg.epsilon)?;
    let value = num_arms as f64 * (1.0 / cfg.delta).ln() / g + 2.0;
    Ok(UnifiedUpperBound {
        report: BoundReport {
            value,
            per_arm_terms: Vec::new(),
            constant: value,
            assumptions_met: BoundFlags::none_required(),
        },
        exact_count: unified_sample_count(num_arms, cfg, tb)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub alpha: f64,
    pub eps_prime: f64,
    /// Set when the optimistic-case inverse left the domain and `eps_prime`
    /// was saturated at `eps0`.
    pub beyond_domain: bool,
    pub delta_prime: f64,
    pub complexity_bound: f64,
    pub l_at_least_10: bool,
}

/// `eps'` for an optimistic bound: `G^{-1}((|K| B)^{1-alpha} G(eps)^alpha)`
/// with `B = L - ln delta`. Returns the value and the saturation flag.
pub fn optimistic_eps_prime(
    num_arms: usize,
    budget: f64,
    eps: f64,
    alpha: f64,
    tb: &TailBound,
) -> Result<(f64, bool)> {
    if alpha == 1.0 {
        return Ok((eps, false));
    }
    let g = positive(tb, eps)?;
    let arg = (num_arms as f64 * budget).powf(1.0 - alpha) * g.powf(alpha);
    if arg > tb.max_value() {
        Ok((tb.eps0(), true))
    } else {
        Ok((tb.inverse(arg)?, false))
    }
}

/// Guarantee of Max-CB when the true tails only dominate `alpha * G`, `alpha <= 1`.
pub fn robustness_optimistic(inst: &BanditInstance, cfg: &PolicyConfig, alpha: f64) -> Result<RobustnessReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfDomain { what: "optimistic alpha", value: alpha, low: 0.0, high: 1.0 });
    }
    let tb = inst.tail_bound();
    let n = inst.num_arms() as f64;
    let l = compute_l(inst.num_arms(), cfg, tb)?;
    let budget = l.value - cfg.delta.ln();
    let (eps_prime, beyond_domain) = optimistic_eps_prime(inst.num_arms(), budget, cfg.epsilon, alpha, tb)?;
    let delta_prime = cfg.delta.powf(alpha);
    let g = positive(tb, cfg.epsilon)?;
    let sum: f64 = max_cb_terms(inst, cfg, budget, eps_prime)?.iter().sum();
    let complexity_bound = (1.0 - delta_prime) * sum + delta_prime * (n * budget / g).powf(1.0 - alpha) + n;
    Ok(RobustnessReport {
        alpha,
        eps_prime,
        beyond_domain,
        delta_prime,
        complexity_bound,
        l_at_least_10: l.value >= MIN_VALID_L,
    })
}

/// `delta' = delta^alpha e^{-(alpha - 1) L}` for a conservative bound, `alpha >= 1`.
pub fn conservative_delta(delta: f64, l: f64, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::OutOfDomain { what: "conservative alpha", value: alpha, low: 1.0, high: f64::INFINITY });
    }
    if alpha == 1.0 {
        return Ok(delta);
    }
    Ok(delta.powf(alpha) * (-(alpha - 1.0) * l).exp())
}

/// Guarantee of Max-CB when the true tails dominate `alpha * G`, `alpha >= 1`.
/// The sample-complexity bound is the unmodified Max-CB upper bound.
pub fn robustness_conservative(inst: &BanditInstance, cfg: &PolicyConfig, alpha: f64) -> Result<RobustnessReport> {
    let l = compute_l(inst.num_arms(), cfg, inst.tail_bound())?;
    let delta_prime = conservative_delta(cfg.delta, l.value, alpha)?;
    Ok(RobustnessReport {
        alpha,
        eps_prime: cfg.epsilon,
        beyond_domain: false,
        delta_prime,
        complexity_bound: upper_bound_max_cb(inst, cfg)?.value,
        l_at_least_10: !l.below_ten,
    })
}
