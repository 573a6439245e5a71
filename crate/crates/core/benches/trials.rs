use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxk::harness::{run_trials, Execution, ExperimentSpec, Policy};
use maxk::model::{ArmModel, BanditInstance, TailBound};
use maxk::policies::PolicyConfig;

fn spec(trials: u64) -> ExperimentSpec {
    let arms = (0..5)
        .map(|k| ArmModel::uniform(0.0, 1.0 - 0.1 * k as f64).unwrap())
        .collect();
    let inst = BanditInstance::new(arms, TailBound::power_law(1.0, 1.0, 1.0).unwrap()).unwrap();
    ExperimentSpec::new(inst, Policy::MaxCb, PolicyConfig::new(0.05, 0.1).unwrap(), trials, 1)
}

fn trials(c: &mut Criterion) {
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    let mut group = c.benchmark_group("max_cb_trials");
    group.sample_size(10);
    for n in [64u64, 512] {
        let s = spec(n);
        group.bench_with_input(BenchmarkId::new("sequential", n), &s, |b, s| {
            b.iter(|| run_trials(black_box(s), Execution::Sequential).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &s, |b, s| {
            b.iter(|| run_trials(black_box(s), Execution::Parallel { workers }).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
