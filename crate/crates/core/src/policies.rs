//! The Max-CB index policy and the unified-arm sampler.
//!
//! Both policies interact with rewards only through an oracle; neither reads
//! an arm's maximum or distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TailBound;
use crate::sampling::{ArmOracle, UnifiedOracle};

/// Below this value of `L` the Max-CB guarantee is not established.
pub const MIN_VALID_L: f64 = 10.0;

/// Accuracy `epsilon` (reward units) and confidence `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub epsilon: f64,
    pub delta: f64,
}

impl PolicyConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(PolicyConfig { epsilon, delta })
    }

    /// Checks the pairing with a tail bound: `epsilon <= eps0` and `G(epsilon) > 0`.
    pub fn check_against(&self, tb: &TailBound) -> Result<f64> {
        let g = tb.eval(self.epsilon)?;
        if g <= 0.0 {
            return Err(Error::ZeroTail { at: self.epsilon });
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StoppedByRule,
    HitSafetyCap,
}

/// Record of one policy execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    /// Largest reward observed.
    pub returned_value: f64,
    pub total_samples: u64,
    pub per_arm_counts: Vec<u64>,
    pub termination: Termination,
    /// Set when the run used `L < 10`.
    pub l_warning: bool,
}

/// The logarithmic factor `L = 6 ln(|K| (1 + ln(1/delta) / G(epsilon)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LFactor {
    pub value: f64,
    pub below_ten: bool,
}

pub fn compute_l(num_arms: usize, cfg: &PolicyConfig, tb: &TailBound) -> Result<LFactor> {
    let g = cfg.check_against(tb)?;
    let value = 6.0 * (num_arms as f64 * (1.0 - cfg.delta.ln() / g)).ln();
    Ok(LFactor { value, below_ten: value < MIN_VALID_L })
}

/// Initial per-arm sample count `floor((L - ln delta) / G(eps0)) + 1`.
pub fn compute_n0(l: f64, cfg: &PolicyConfig, tb: &TailBound) -> u64 {
    ((l - cfg.delta.ln()) / tb.max_value()).floor() as u64 + 1
}

/// Confidence width `G^{-1}((L - ln delta) / count)`, clamped to `eps0`.
pub fn index_width(count: u64, l: f64, cfg: &PolicyConfig, tb: &TailBound) -> f64 {
    let arg = (l - cfg.delta.ln()) / count as f64;
    if arg >= tb.max_value() {
        tb.eps0()
    } else {
        tb.inverse(arg).expect("argument checked against G(eps0)")
    }
}

/// Pre-computed Max-CB constants for one `(|K|, cfg, tb)` triple.
#[derive(Debug, Clone)]
pub struct MaxCb {
    cfg: PolicyConfig,
    tb: TailBound,
    l: LFactor,
    /// `L - ln delta`
    budget: f64,
    g_eps: f64,
    n0: u64,
    per_arm_bound: u64,
    safety_cap: u64,
    arm_cap: Option<(usize, u64)>,
}

impl MaxCb {
    pub fn new(num_arms: usize, cfg: PolicyConfig, tb: TailBound) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::InvalidParameter("Max-CB needs at least one arm".into()));
        }
        let l = compute_l(num_arms, &cfg, &tb)?;
        let g_eps = tb.eval(cfg.epsilon)?;
        let budget = l.value - cfg.delta.ln();
        let n0 = compute_n0(l.value, &cfg, &tb);
        let per_arm_bound = (budget / g_eps).floor() as u64 + 1;
        let safety_cap = num_arms as u64 * per_arm_bound + 1;
        Ok(MaxCb { cfg, tb, l, budget, g_eps, n0, per_arm_bound, safety_cap, arm_cap: None })
    }

    pub fn with_safety_cap(mut self, cap: u64) -> Self {
        self.safety_cap = cap;
        self
    }

    /// Crippled variant: never draw more than `cap` samples from `arm`.
    pub fn with_arm_cap(mut self, arm: usize, cap: u64) -> Self {
        self.arm_cap = Some((arm, cap));
        self
    }

    pub fn l(&self) -> LFactor {
        self.l
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    /// Deterministic per-arm ceiling `floor((L - ln delta) / G(epsilon)) + 1`.
    pub fn per_arm_bound(&self) -> u64 {
        self.per_arm_bound
    }

    pub fn safety_cap(&self) -> u64 {
        self.safety_cap
    }

    pub fn width(&self, count: u64) -> f64 {
        index_width(count, self.l.value, &self.cfg, &self.tb)
    }

    fn limit(&self, arm: usize) -> u64 {
        match self.arm_cap {
            Some((k, cap)) if k == arm => cap,
            _ => u64::MAX,
        }
    }

    pub fn run<O: ArmOracle + ?Sized>(&self, oracle: &mut O) -> RunTrace {
        let k = oracle.num_arms();
        let mut counts = vec![0u64; k];
        let mut best = vec![f64::NEG_INFINITY; k];
        let mut total = 0u64;
        let mut trace = |arm: usize, counts: &mut [u64], best: &mut [f64], total: &mut u64| {
            let r = oracle.pull(arm);
            counts[arm] += 1;
            *total += 1;
            if r > best[arm] {
                best[arm] = r;
            }
        };

        let mut termination = Termination::StoppedByRule;
        'init: for arm in 0..k {
            for _ in 0..self.n0.min(self.limit(arm)) {
                if total >= self.safety_cap {
                    termination = Termination::HitSafetyCap;
                    break 'init;
                }
                trace(arm, &mut counts, &mut best, &mut total);
            }
        }

        let mut widths: Vec<f64> = counts.iter().map(|&c| self.width(c.max(1))).collect();
        if termination == Termination::StoppedByRule {
            loop {
                let mut chosen: Option<usize> = None;
                let mut top = f64::NEG_INFINITY;
                for arm in 0..k {
                    if counts[arm] >= self.limit(arm) {
                        continue;
                    }
                    let y = best[arm] + widths[arm];
                    if chosen.is_none() || y > top {
                        chosen = Some(arm);
                        top = y;
                    }
                }
                let Some(arm) = chosen else { break };
                // U(C) < epsilon, compared on the probability scale
                if self.budget / (counts[arm] as f64) < self.g_eps {
                    break;
                }
                if total >= self.safety_cap {
                    termination = Termination::HitSafetyCap;
                    break;
                }
                trace(arm, &mut counts, &mut best, &mut total);
                widths[arm] = self.width(counts[arm]);
            }
        }

        RunTrace {
            returned_value: best.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            total_samples: total,
            per_arm_counts: counts,
            termination,
            l_warning: self.l.below_ten,
        }
    }
}

/// Runs Max-CB with the default safety cap, or `safety_cap` when given.
pub fn run_max_cb<O: ArmOracle + ?Sized>(
    oracle: &mut O,
    cfg: PolicyConfig,
    tb: &TailBound,
    safety_cap: Option<u64>,
) -> Result<RunTrace> {
    let mut policy = MaxCb::new(oracle.num_arms(), cfg, tb.clone())?;
    if let Some(cap) = safety_cap {
        policy = policy.with_safety_cap(cap);
    }
    Ok(policy.run(oracle))
}

/// Number of unified-arm draws, `ceil(ln(1/delta) |K| / G(epsilon)) + 1`.
pub fn unified_sample_count(num_arms: usize, cfg: &PolicyConfig, tb: &TailBound) -> Result<u64> {
    let g = cfg.check_against(tb)?;
    Ok((-cfg.delta.ln() * num_arms as f64 / g).ceil() as u64 + 1)
}

pub fn run_unified<O: UnifiedOracle + ?Sized>(
    oracle: &mut O,
    num_arms: usize,
    cfg: PolicyConfig,
    tb: &TailBound,
) -> Result<RunTrace> {
    let n = unified_sample_count(num_arms, &cfg, tb)?;
    let mut counts = vec![0u64; num_arms];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..n {
        let (arm, r) = oracle.pull();
        counts[arm] += 1;
        best = best.max(r);
    }
    Ok(RunTrace {
        returned_value: best,
        total_samples: n,
        per_arm_counts: counts,
        termination: Termination::StoppedByRule,
        l_warning: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArmModel;
    use crate::sampling::{SeededArms, SeededUnified};
    use std::f64::consts::E;

    fn identity() -> TailBound {
        TailBound::power_law(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn l_examples() {
        let tb = TailBound::power_law(0.01, 1.0, 1.0).unwrap();
        let cfg = PolicyConfig::new(1e-4, 1e-3).unwrap();
        let l = compute_l(10_000, &cfg, &tb).unwrap();
        // 6 ln(1e4 (1 + ln(1000) / 1e-6))
        let want = 6.0 * (1e4 * (1.0 + 1000f64.ln() / 1e-6)).ln();
        assert!((l.value - want).abs() < 1e-9);
        assert!((l.value - 149.75).abs() < 0.01);
        assert!(!l.below_ten);

        let tb = TailBound::power_law(1.0, 1.0, 1.0).unwrap();
        let cfg = PolicyConfig::new(0.1, (-1f64).exp()).unwrap();
        let l = compute_l(1, &cfg, &tb).unwrap();
        assert!((l.value - 6.0 * 11f64.ln()).abs() < 1e-12);
        assert!((l.value - 14.387).abs() < 1e-3);

        let cfg = PolicyConfig::new(0.1, 1.0 - 1e-12).unwrap();
        let l = compute_l(1, &cfg, &tb).unwrap();
        assert!(l.value < 1e-5 && l.below_ten);
    }

    #[test]
    fn l_rejects_zero_tail() {
        let tb = identity();
        let cfg = PolicyConfig::new(2.0, 0.1).unwrap();
        assert!(compute_l(2, &cfg, &tb).is_err());
    }

    #[test]
    fn n0_examples() {
        let tb = identity();
        let cfg = PolicyConfig::new(0.1, 1.0 / E).unwrap();
        assert_eq!(compute_n0(14.387, &cfg, &tb), 16);
        assert_eq!(compute_n0(0.0, &cfg, &tb), 2);
        let tb = TailBound::power_law(0.01, 1.0, 1.0).unwrap();
        let cfg = PolicyConfig::new(1e-4, 1e-3).unwrap();
        // (149.75 + ln 1000) / 0.01 = 15665.78
        assert_eq!(compute_n0(149.75, &cfg, &tb), 15666);
    }

    #[test]
    fn width_examples() {
        let tb = identity();
        let cfg = PolicyConfig::new(0.1, 1.0 / E).unwrap();
        let l = 14.387;
        let w = index_width(154, l, &cfg, &tb);
        assert!((w - 15.387 / 154.0).abs() < 1e-12 && w < 0.1);
        assert!((index_width(308, l, &cfg, &tb) - w / 2.0).abs() < 1e-12);
        assert_eq!(index_width(15, l, &cfg, &tb), 1.0);
        assert_eq!(index_width(1, l, &cfg, &tb), 1.0);
        assert!(index_width(16, l, &cfg, &tb) < 1.0);
    }

    #[test]
    fn single_arm_trace_is_154() {
        let tb = identity();
        let cfg = PolicyConfig::new(0.1, 1.0 / E).unwrap();
        let arms = vec![ArmModel::uniform(0.0, 1.0).unwrap()];
        for seed in 0..20 {
            let mut oracle = SeededArms::new(&arms, seed, 0);
            let trace = run_max_cb(&mut oracle, cfg, &tb, None).unwrap();
            assert_eq!(trace.total_samples, 154);
            assert_eq!(trace.per_arm_counts, vec![154]);
            assert_eq!(trace.termination, Termination::StoppedByRule);
        }
    }

    #[test]
    fn point_mass_arms_return_value() {
        let tb = identity();
        let cfg = PolicyConfig::new(0.1, 0.05).unwrap();
        let arms = vec![ArmModel::point_mass(0.3).unwrap(), ArmModel::point_mass(0.3).unwrap()];
        for seed in 0..5 {
            let mut oracle = SeededArms::new(&arms, seed, 0);
            assert_eq!(run_max_cb(&mut oracle, cfg, &tb, None).unwrap().returned_value, 0.3);
            let mut oracle = SeededUnified::new(&arms[..1], seed, 0);
            assert_eq!(run_unified(&mut oracle, 1, cfg, &tb).unwrap().returned_value, 0.3);
        }
    }

    #[test]
    fn safety_cap_is_reported() {
        let tb = identity();
        let cfg = PolicyConfig::new(0.1, 1.0 / E).unwrap();
        let arms = vec![ArmModel::uniform(0.0, 1.0).unwrap()];
        let mut oracle = SeededArms::new(&arms, 1, 0);
        let trace = run_max_cb(&mut oracle, cfg, &tb, Some(100)).unwrap();
        assert_eq!(trace.termination, Termination::HitSafetyCap);
        assert_eq!(trace.total_samples, 100);
        let mut oracle = SeededArms::new(&arms, 1, 0);
        let trace = run_max_cb(&mut oracle, cfg, &tb, Some(10)).unwrap();
        assert_eq!(trace.termination, Termination::HitSafetyCap);
        assert_eq!(trace.total_samples, 10);
    }

    #[test]
    fn unified_count_examples() {
        let tb = TailBound::power_law(1.0, 1.0, 1.0).unwrap();
        let cfg = PolicyConfig::new(0.1, 0.1).unwrap();
        assert_eq!(unified_sample_count(10, &cfg, &tb).unwrap(), 232);
        let tb = TailBound::power_law(0.01, 1.0, 1.0).unwrap();
        let cfg = PolicyConfig::new(1e-4, 1e-3).unwrap();
        let n = unified_sample_count(10_000, &cfg, &tb).unwrap();
        assert!((n as f64 - 6.9e10).abs() / 6.9e10 < 0.005);
    }

    #[test]
    fn unified_run_draws_exact_count() {
        let tb = TailBound::power_law(1.0, 1.0, 1.0).unwrap();
        let cfg = PolicyConfig::new(0.1, 0.1).unwrap();
        let arms: Vec<ArmModel> = (0..10).map(|i| ArmModel::uniform(0.0, 0.5 + 0.05 * i as f64).unwrap()).collect();
        let mut oracle = SeededUnified::new(&arms, 3, 0);
        let trace = run_unified(&mut oracle, 10, cfg, &tb).unwrap();
        assert_eq!(trace.total_samples, 232);
        assert_eq!(trace.per_arm_counts.iter().sum::<u64>(), 232);
    }

    #[test]
    fn arm_cap_limits_pulls() {
        let tb = identity();
        let cfg = PolicyConfig::new(0.05, 0.1).unwrap();
        let arms = vec![ArmModel::uniform(0.0, 1.0).unwrap(), ArmModel::uniform(0.0, 0.5).unwrap()];
        let policy = MaxCb::new(2, cfg, tb).unwrap().with_arm_cap(0, 7);
        let mut oracle = SeededArms::new(&arms, 9, 0);
        let trace = policy.run(&mut oracle);
        assert_eq!(trace.per_arm_counts[0], 7);
        assert!(trace.returned_value <= 1.0);
    }
}
