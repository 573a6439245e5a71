//! `maxk`: bounds, simulations, hypothesis checks and the published examples
//! from the command line.
//!
//! Exit codes: 0 ok, 2 input error, 3 domain error, 4 safety-cap hit,
//! 5 golden mismatch.

mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use maxk::adversarial::{build_hypothesis, build_unified_hypothesis, CaseTag, HypothesisParams, Target};
use maxk::bounds::{
    lower_bound_multi, lower_bound_unified, robustness_conservative, robustness_optimistic, upper_bound_max_cb,
    upper_bound_unified, BoundFlags, RobustnessReport,
};
use maxk::goldens::{reproduce_examples, GoldenCheck, EXAMPLE_A};
use maxk::harness::{run_experiment, write_trials_csv, Execution, ExperimentReport, ExperimentSpec, Policy};
use maxk::model::{AssumptionReport, BanditInstance};
use maxk::policies::PolicyConfig;
use maxk::schema::InstanceFile;
use maxk::Error;

use table::{sig3, Table};

const EXIT_INPUT: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_SAFETY_CAP: u8 = 4;
const EXIT_GOLDEN: u8 = 5;

#[derive(Parser)]
#[command(name = "maxk", version, about = "Max K-armed bandit bounds, simulations and hypothesis checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every applicable sample-complexity bound for an instance.
    Bounds {
        #[command(flatten)]
        input: InstanceArgs,
        /// Tail-bound misspecification factor for the robustness quantities.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run seeded Monte-Carlo trials of a policy.
    Simulate {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, value_enum, default_value_t = PolicyArg::MaxCb)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        /// Also write one CSV row per trial here.
        #[arg(long)]
        trials_csv: Option<PathBuf>,
        /// Override the Max-CB safety cap on total samples per trial.
        #[arg(long)]
        safety_cap: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the hypothesis instance for one arm (or `unified`) and check the tail bound on it.
    AdversarialCheck {
        #[command(flatten)]
        input: InstanceArgs,
        /// Arm index (0-based) or `unified`.
        #[arg(long)]
        arm: String,
        /// Write the hypothesis instance here, in the instance file format.
        #[arg(long)]
        export: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute the published example numbers and compare.
    ReproduceExamples {
        /// Override the tail-bound slope A.
        #[arg(long, default_value_t = EXAMPLE_A)]
        tail_a: f64,
        /// Shorthand for `--format json`.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Grid points for the tail-bound check.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    MaxCb,
    Unified,
}

enum Failure {
    Lib(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_domain() { EXIT_DOMAIN } else { EXIT_INPUT })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Bounds { input, alpha, output } => cmd_bounds(&input, alpha, &output),
        Command::Simulate { input, policy, trials, seed, workers, trials_csv, safety_cap, output } => {
            let run = SimulateArgs { policy, trials, seed, workers, safety_cap };
            cmd_simulate(&input, &run, trials_csv.as_deref(), &output)
        }
        Command::AdversarialCheck { input, arm, export, output } => {
            cmd_adversarial_check(&input, &arm, export.as_deref(), &output)
        }
        Command::ReproduceExamples { tail_a, json, output } => cmd_reproduce_examples(tail_a, json, &output),
    }
}

fn load(input: &InstanceArgs) -> CliResult<(BanditInstance, PolicyConfig)> {
    let file = InstanceFile::load(&input.instance)?;
    let inst = file.instance()?;
    let cfg = file.config(input.epsilon, input.delta)?;
    Ok((inst, cfg))
}

fn emit(output: &OutputArgs, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)? + "\n")
}

#[derive(Serialize)]
struct BoundRow {
    name: &'static str,
    value: f64,
    flags: Vec<&'static str>,
}

fn lower_flags(f: &BoundFlags) -> Vec<&'static str> {
    let mut out = Vec::new();
    if !f.concave_required_and_held {
        out.push("concavity_unmet");
    }
    if !f.delta_small_enough {
        out.push("delta_too_large");
    }
    out
}

fn upper_flags(f: &BoundFlags) -> Vec<&'static str> {
    if f.l_at_least_10 {
        Vec::new()
    } else {
        vec!["l_below_10"]
    }
}

#[derive(Serialize)]
struct BoundsReport {
    epsilon: f64,
    delta: f64,
    num_arms: usize,
    assumption: AssumptionReport,
    rows: Vec<BoundRow>,
    robustness: Vec<RobustnessReport>,
}

fn cmd_bounds(input: &InstanceArgs, alpha: Option<f64>, output: &OutputArgs) -> CliResult<u8> {
    let (inst, cfg) = load(input)?;
    let tb = inst.tail_bound();
    let n = inst.num_arms();
    let lower = lower_bound_multi(&inst, &cfg)?;
    let upper = upper_bound_max_cb(&inst, &cfg)?;
    let lower_u = lower_bound_unified(n, &cfg, tb)?;
    let upper_u = upper_bound_unified(n, &cfg, tb)?;
    let rows = vec![
        BoundRow { name: "lower_multi", value: lower.value, flags: lower_flags(&lower.assumptions_met) },
        BoundRow { name: "upper_max_cb", value: upper.value, flags: upper_flags(&upper.assumptions_met) },
        BoundRow { name: "lower_unified", value: lower_u.value, flags: lower_flags(&lower_u.assumptions_met) },
        BoundRow { name: "upper_unified", value: upper_u.report.value, flags: Vec::new() },
        BoundRow { name: "unified_count", value: upper_u.exact_count as f64, flags: Vec::new() },
    ];
    let mut robustness = Vec::new();
    if let Some(a) = alpha {
        if a <= 1.0 {
            robustness.push(robustness_optimistic(&inst, &cfg, a)?);
        }
        if a >= 1.0 {
            robustness.push(robustness_conservative(&inst, &cfg, a)?);
        }
    }
    let report = BoundsReport {
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        num_arms: n,
        assumption: inst.verify_assumption(input.grid.unwrap_or(1000)),
        rows,
        robustness,
    };

    let text = match output.format {
        Format::Json => json(&report)?,
        Format::Csv | Format::Table => {
            let mut t = Table::new(["bound", "value", "flags"]);
            for r in &report.rows {
                let value = match (output.format, r.name) {
                    (Format::Csv, _) => r.value.to_string(),
                    (_, "unified_count") => format!("{}", r.value as u64),
                    _ => sig3(r.value),
                };
                t.row([r.name.to_string(), value, r.flags.join(" ")]);
            }
            for r in &report.robustness {
                let fmt = |x: f64| if output.format == Format::Csv { x.to_string() } else { sig3(x) };
                let flag = if r.beyond_domain { "beyond_domain" } else { "" };
                t.row([format!("eps_prime(alpha={})", r.alpha), fmt(r.eps_prime), flag.to_string()]);
                t.row([format!("delta_prime(alpha={})", r.alpha), fmt(r.delta_prime), String::new()]);
                t.row([format!("complexity(alpha={})", r.alpha), fmt(r.complexity_bound), String::new()]);
            }
            let cert = if report.assumption.certified { "yes" } else { "no" };
            if output.format == Format::Csv {
                t.to_csv()
            } else {
                format!("{}certified: {cert}\n", t.render())
            }
        }
    };
    emit(output, &text)?;
    Ok(0)
}

struct SimulateArgs {
    policy: PolicyArg,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
    safety_cap: Option<u64>,
}

fn cmd_simulate(input: &InstanceArgs, run: &SimulateArgs, trials_csv: Option<&Path>, output: &OutputArgs) -> CliResult<u8> {
    let (inst, cfg) = load(input)?;
    let policy = match run.policy {
        PolicyArg::MaxCb => Policy::MaxCb,
        PolicyArg::Unified => Policy::Unified,
    };
    let num_arms = inst.num_arms();
    let mut spec = ExperimentSpec::new(inst, policy, cfg, run.trials, run.seed);
    spec.safety_cap = run.safety_cap;
    if let Some(g) = input.grid {
        spec.grid_points = g;
    }
    let workers = run.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let exp = run_experiment(&spec, Execution::with_workers(workers))?;

    if let Some(path) = trials_csv {
        write_csv(path, &exp.records, num_arms)?;
    }
    let text = match output.format {
        Format::Json => json(&exp.report)?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_trials_csv(&exp.records, num_arms, &mut buf)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Format::Table => simulate_table(&exp.report),
    };
    emit(output, &text)?;
    Ok(if exp.report.safety_cap_hits > 0 { EXIT_SAFETY_CAP } else { 0 })
}

fn write_csv(path: &Path, records: &[maxk::harness::TrialRecord], num_arms: usize) -> CliResult<()> {
    let file = File::create(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    write_trials_csv(records, num_arms, &mut w)?;
    w.flush().map_err(|e| Failure::Input(e.to_string()))
}

fn simulate_table(r: &ExperimentReport) -> String {
    let mut t = Table::new(["quantity", "value"]);
    let c = &r.correctness;
    let s = &r.samples;
    let b = &r.bounds;
    t.row(["trials".to_string(), r.trials.to_string()]);
    t.row(["failures".to_string(), r.failures.to_string()]);
    t.row(["correctness".to_string(), format!("{} [{}, {}]", sig3(c.rate), sig3(c.wilson_low), sig3(c.wilson_high))]);
    t.row(["mean T".to_string(), sig3(s.mean)]);
    t.row(["stddev T".to_string(), sig3(s.stddev)]);
    t.row(["min / max T".to_string(), format!("{} / {}", s.min, s.max)]);
    t.row(["lower bound".to_string(), format!("{} {}", sig3(b.lower), lower_flags(&b.lower_flags).join(" "))]);
    t.row(["upper bound".to_string(), format!("{} {}", sig3(b.upper), upper_flags(&b.upper_flags).join(" "))]);
    t.row(["upper / mean".to_string(), sig3(b.ratio)]);
    t.row(["deterministic cap".to_string(), b.deterministic_cap.to_string()]);
    t.row(["safety cap hits".to_string(), r.safety_cap_hits.to_string()]);
    t.row(["certified".to_string(), r.certified.to_string()]);
    if let Some(rb) = &r.robustness {
        t.row(["measured alpha".to_string(), sig3(rb.alpha)]);
        t.row(["eps' / delta'".to_string(), format!("{} / {}", sig3(rb.eps_prime), sig3(rb.delta_prime))]);
    }
    t.render()
}

#[derive(Serialize)]
struct AdversarialReport {
    target: Target,
    case: CaseTag,
    params: HypothesisParams,
    new_max: f64,
    certified: bool,
    worst_violation: f64,
    grid_points: usize,
}

fn cmd_adversarial_check(input: &InstanceArgs, arm: &str, export: Option<&Path>, output: &OutputArgs) -> CliResult<u8> {
    let (inst, cfg) = load(input)?;
    let h = if arm == "unified" {
        build_unified_hypothesis(&inst, &cfg)?
    } else {
        let k: usize = arm.parse().map_err(|_| Failure::Input(format!("--arm must be an index or `unified`, got {arm:?}")))?;
        build_hypothesis(&inst, k, &cfg)?
    };
    let grid = input.grid.unwrap_or(2000);
    let check = h.instance().verify_assumption(grid);
    if let Some(path) = export {
        InstanceFile::describe(h.instance(), Some(&cfg)).save(path)?;
    }
    let report = AdversarialReport {
        target: h.target(),
        case: h.case(),
        params: *h.params(),
        new_max: h.new_max(),
        certified: check.certified,
        worst_violation: check.worst_violation,
        grid_points: grid,
    };
    let text = match output.format {
        Format::Json => json(&report)?,
        Format::Csv | Format::Table => {
            let p = &report.params;
            let fmt = |x: f64| if output.format == Format::Csv { x.to_string() } else { sig3(x) };
            let mut t = Table::new(["quantity", "value"]);
            let target = match report.target {
                Target::Arm(k) => k.to_string(),
                Target::Unified => "unified".into(),
            };
            t.row(["target".to_string(), target]);
            t.row(["case".to_string(), format!("{:?}", report.case).to_lowercase()]);
            t.row(["new_max".to_string(), report.new_max.to_string()]);
            t.row(["gamma".to_string(), fmt(p.gamma)]);
            if let Some(pe) = p.p_eps {
                t.row(["p_eps".to_string(), fmt(pe)]);
            }
            t.row(["mu_bar".to_string(), fmt(p.mu_bar)]);
            t.row(["t_k".to_string(), fmt(p.t_k)]);
            t.row(["certified".to_string(), report.certified.to_string()]);
            t.row(["worst_violation".to_string(), fmt(report.worst_violation)]);
            if output.format == Format::Csv {
                t.to_csv()
            } else {
                t.render()
            }
        }
    };
    emit(output, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct GoldenReport<'a> {
    pass: bool,
    tail_a: f64,
    checks: &'a [GoldenCheck],
}

fn cmd_reproduce_examples(tail_a: f64, as_json: bool, output: &OutputArgs) -> CliResult<u8> {
    let checks = reproduce_examples(tail_a)?;
    let pass = checks.iter().all(|c| c.pass);
    let format = if as_json { Format::Json } else { output.format };
    let text = match format {
        Format::Json => json(&GoldenReport { pass, tail_a, checks: &checks })?,
        Format::Csv | Format::Table => {
            let mut t = Table::new(["value", "published", "computed", "result"]);
            for c in &checks {
                let computed = if format == Format::Csv { c.computed.to_string() } else { format!("{:.4e}", c.computed) };
                t.row([c.name.to_string(), format!("{:e}", c.expected), computed, if c.pass { "PASS" } else { "FAIL" }.to_string()]);
            }
            if format == Format::Csv {
                t.to_csv()
            } else {
                format!("{}{}\n", t.render(), if pass { "PASS" } else { "FAIL" })
            }
        }
    };
    emit(output, &text)?;
    Ok(if pass { 0 } else { EXIT_GOLDEN })
}
