//! Seeded Monte-Carlo engine: many independent policy runs, aggregated and
//! set against the closed-form bounds.
//!
//! Trial `i` draws only from streams keyed on `(master_seed, i)`, and the
//! aggregate is built from exact integer sums, so reports are identical for
//! any worker count.

mod stats;

pub use stats::{estimate_correctness, Correctness, SampleStats, Z_95};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    lower_bound_multi, lower_bound_unified, robustness_optimistic, upper_bound_max_cb, upper_bound_unified,
    BoundFlags, RobustnessReport,
};
use crate::error::{Error, Result};
use crate::model::{AssumptionReport, BanditInstance};
use crate::policies::{run_unified, MaxCb, PolicyConfig, RunTrace, Termination};
use crate::sampling::{SeededArms, SeededUnified};
use stats::Accumulator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    MaxCb,
    Unified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instance: BanditInstance,
    pub policy: Policy,
    pub cfg: PolicyConfig,
    pub num_trials: u64,
    pub master_seed: u64,
    pub grid_points: usize,
    /// Hard cap `(arm, samples)` for the crippled Max-CB variant.
    pub arm_cap: Option<(usize, u64)>,
    /// Replaces the default Max-CB safety cap.
    pub safety_cap: Option<u64>,
}

impl ExperimentSpec {
    pub fn new(instance: BanditInstance, policy: Policy, cfg: PolicyConfig, num_trials: u64, master_seed: u64) -> Self {
        ExperimentSpec { instance, policy, cfg, num_trials, master_seed, grid_points: 1000, arm_cap: None, safety_cap: None }
    }

    fn validate(&self) -> Result<()> {
        if self.num_trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        if let Some((arm, _)) = self.arm_cap {
            if arm >= self.instance.num_arms() {
                return Err(Error::InvalidParameter(format!("capped arm {arm} out of range")));
            }
            if self.policy != Policy::MaxCb {
                return Err(Error::InvalidParameter("arm caps apply to Max-CB only".into()));
            }
        }
        self.cfg.check_against(self.instance.tail_bound())?;
        Ok(())
    }
}

/// How trials are spread over threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential execution when built without the `parallel` feature.
    Parallel { workers: usize },
}

impl Execution {
    pub fn with_workers(workers: usize) -> Self {
        if workers <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub value: f64,
    pub samples: u64,
    pub failed: bool,
    pub hit_cap: bool,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub empirical_mean: f64,
    pub lower: f64,
    pub lower_flags: BoundFlags,
    pub upper: f64,
    pub upper_flags: BoundFlags,
    /// `upper / empirical_mean`
    pub ratio: f64,
    /// Largest total any run can take: `|K| (floor((L - ln delta)/G(eps)) + 1)`
    /// for Max-CB, the exact draw count for the unified arm.
    pub deterministic_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub policy: Policy,
    pub epsilon: f64,
    pub delta: f64,
    pub master_seed: u64,
    pub trials: u64,
    pub failures: u64,
    pub safety_cap_hits: u64,
    pub correctness: Correctness,
    pub samples: SampleStats,
    pub bounds: BoundComparison,
    pub certified: bool,
    pub assumption: AssumptionReport,
    pub l_warning: bool,
    /// Guarantee under the measured tail ratio, for uncertified instances.
    pub robustness: Option<RobustnessReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub report: ExperimentReport,
    pub records: Vec<TrialRecord>,
}

enum Runner {
    MaxCb(MaxCb),
    Unified,
}

impl Runner {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        let tb = spec.instance.tail_bound().clone();
        Ok(match spec.policy {
            Policy::MaxCb => {
                let mut p = MaxCb::new(spec.instance.num_arms(), spec.cfg, tb)?;
                if let Some((arm, cap)) = spec.arm_cap {
                    p = p.with_arm_cap(arm, cap);
                }
                if let Some(cap) = spec.safety_cap {
                    p = p.with_safety_cap(cap);
                }
                Runner::MaxCb(p)
            }
            Policy::Unified => Runner::Unified,
        })
    }

    fn trial(&self, spec: &ExperimentSpec, trial: u64) -> TrialRecord {
        let arms = spec.instance.arms();
        let trace: RunTrace = match self {
            Runner::MaxCb(p) => p.run(&mut SeededArms::new(arms, spec.master_seed, trial)),
            Runner::Unified => run_unified(
                &mut SeededUnified::new(arms, spec.master_seed, trial),
                arms.len(),
                spec.cfg,
                spec.instance.tail_bound(),
            )
            .expect("configuration validated before the trials"),
        };
        TrialRecord {
            trial,
            value: trace.returned_value,
            samples: trace.total_samples,
            failed: trace.returned_value <= spec.instance.mu_star() - spec.cfg.epsilon,
            hit_cap: trace.termination == Termination::HitSafetyCap,
            counts: trace.per_arm_counts,
        }
    }
}

/// Runs every trial of `spec`, in trial order.
pub fn run_trials(spec: &ExperimentSpec, exec: Execution) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let runner = Runner::new(spec)?;
    match exec {
        Execution::Sequential => Ok(sequential(&runner, spec)),
        Execution::Parallel { workers } => parallel(&runner, spec, workers),
    }
}

fn sequential(runner: &Runner, spec: &ExperimentSpec) -> Vec<TrialRecord> {
    (0..spec.num_trials).map(|i| runner.trial(spec, i)).collect()
}

#[cfg(feature = "parallel")]
fn parallel(runner: &Runner, spec: &ExperimentSpec, workers: usize) -> Result<Vec<TrialRecord>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| (0..spec.num_trials).into_par_iter().map(|i| runner.trial(spec, i)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn parallel(runner: &Runner, spec: &ExperimentSpec, _workers: usize) -> Result<Vec<TrialRecord>> {
    Ok(sequential(runner, spec))
}

/// Table of the theoretical bounds next to an empirical mean sample count.
pub fn compare_bounds(
    empirical_mean: f64,
    policy: Policy,
    inst: &BanditInstance,
    cfg: &PolicyConfig,
) -> Result<BoundComparison> {
    let tb = inst.tail_bound();
    let n = inst.num_arms();
    let (lower, upper, cap) = match policy {
        Policy::MaxCb => {
            let up = upper_bound_max_cb(inst, cfg)?;
            let per_arm = MaxCb::new(n, *cfg, tb.clone())?.per_arm_bound();
            (lower_bound_multi(inst, cfg)?, up, n as u64 * per_arm)
        }
        Policy::Unified => {
            let up = upper_bound_unified(n, cfg, tb)?;
            (lower_bound_unified(n, cfg, tb)?, up.report, up.exact_count)
        }
    };
    Ok(BoundComparison {
        empirical_mean,
        lower: lower.value,
        lower_flags: lower.assumptions_met,
        upper: upper.value,
        upper_flags: upper.assumptions_met,
        ratio: upper.value / empirical_mean,
        deterministic_cap: cap,
    })
}

/// Aggregates trial records into a report. Record order is irrelevant.
pub fn summarize(spec: &ExperimentSpec, records: &[TrialRecord]) -> Result<ExperimentReport> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no trial records to summarize".into()));
    }
    let inst = &spec.instance;
    let mut acc = Accumulator::new(inst.num_arms());
    let (mut failures, mut cap_hits) = (0u64, 0u64);
    for r in records {
        acc.push(r.samples, &r.counts);
        failures += r.failed as u64;
        cap_hits += r.hit_cap as u64;
    }
    let samples = acc.finish();
    let assumption = inst.verify_assumption(spec.grid_points);
    let robustness = if assumption.certified || spec.policy != Policy::MaxCb {
        None
    } else {
        let alpha = inst.tail_ratio(spec.grid_points);
        if alpha > 0.0 {
            Some(robustness_optimistic(inst, &spec.cfg, alpha)?)
        } else {
            None
        }
    };
    let l_warning = match spec.policy {
        Policy::MaxCb => MaxCb::new(inst.num_arms(), spec.cfg, inst.tail_bound().clone())?.l().below_ten,
        Policy::Unified => false,
    };
    Ok(ExperimentReport {
        policy: spec.policy,
        epsilon: spec.cfg.epsilon,
        delta: spec.cfg.delta,
        master_seed: spec.master_seed,
        trials: records.len() as u64,
        failures,
        safety_cap_hits: cap_hits,
        correctness: estimate_correctness(failures, records.len() as u64),
        bounds: compare_bounds(samples.mean, spec.policy, inst, &spec.cfg)?,
        samples,
        certified: assumption.certified,
        assumption,
        l_warning,
        robustness,
    })
}

pub fn run_experiment(spec: &ExperimentSpec, exec: Execution) -> Result<Experiment> {
    let records = run_trials(spec, exec)?;
    let report = summarize(spec, &records)?;
    Ok(Experiment { report, records })
}

/// One CSV row per trial: `trial,V,T,failed,count_0..count_{K-1}`.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], num_arms: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["trial".to_string(), "V".into(), "T".into(), "failed".into()];
    header.extend((0..num_arms).map(|k| format!("count_{k}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.trial.to_string(), r.value.to_string(), r.samples.to_string(), (r.failed as u8).to_string()];
        row.extend(r.counts.iter().map(u64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
