use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use maxk::goldens::{example_config, example_instance, Example, EXAMPLE_A};
use maxk::model::{ArmModel, BanditInstance, TailBound};
use maxk::policies::PolicyConfig;
use maxk::schema::InstanceFile;
use serde_json::Value;
use tempfile::TempDir;

fn maxk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxk")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_instance(dir: &Path, name: &str, inst: &BanditInstance, cfg: &PolicyConfig) -> PathBuf {
    let path = dir.join(name);
    InstanceFile::describe(inst, Some(cfg)).save(&path).unwrap();
    path
}

fn single_uniform(dir: &Path) -> PathBuf {
    let inst = BanditInstance::new(
        vec![ArmModel::uniform(0.0, 1.0).unwrap()],
        TailBound::power_law(1.0, 1.0, 1.0).unwrap(),
    )
    .unwrap();
    let cfg = PolicyConfig::new(0.1, (-1.0f64).exp()).unwrap();
    write_instance(dir, "single.json", &inst, &cfg)
}

fn json_of(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON on stdout")
}

fn row_value(report: &Value, name: &str) -> f64 {
    report["rows"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap()["value"].as_f64().unwrap()
}

#[test]
fn bounds_on_the_published_examples() {
    let dir = TempDir::new().unwrap();
    let one_high = write_instance(dir.path(), "ex1.json", &example_instance(Example::OneHigh, EXAMPLE_A).unwrap(), &example_config());
    let one_low = write_instance(dir.path(), "ex2.json", &example_instance(Example::OneLow, EXAMPLE_A).unwrap(), &example_config());

    let out = maxk(&["bounds", "--instance", one_high.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let table = stdout(&out);
    assert!(table.contains("3.52e8") && table.contains("3.13e9") && table.contains("69077552"), "{table}");

    let out = maxk(&["bounds", "--instance", one_high.to_str().unwrap(), "--format", "json"]);
    let r = json_of(&out);
    assert!((row_value(&r, "lower_multi") / 1.957e5 - 1.0).abs() < 1e-3);
    let count = (1000f64.ln() * 1e4 / 1e-6).ceil() + 1.0;
    assert_eq!(row_value(&r, "unified_count"), count);

    let out = maxk(&["bounds", "--instance", one_low.to_str().unwrap(), "--format", "json"]);
    let r = json_of(&out);
    assert!((row_value(&r, "upper_max_cb") / 1.56e12 - 1.0).abs() < 0.01);
}

#[test]
fn non_concave_bound_flags_lower_rows() {
    let dir = TempDir::new().unwrap();
    let tb = TailBound::tabulated(vec![(0.0, 0.0), (0.5, 0.1), (1.0, 0.6)], None).unwrap();
    let inst = BanditInstance::new(vec![ArmModel::uniform(0.0, 1.0).unwrap(); 2], tb).unwrap();
    let path = write_instance(dir.path(), "tab.json", &inst, &PolicyConfig::new(0.1, 0.001).unwrap());
    let out = maxk(&["bounds", "--instance", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let r = json_of(&out);
    for row in r["rows"].as_array().unwrap() {
        let flagged = row["flags"].as_array().unwrap().iter().any(|f| f == "concavity_unmet");
        assert_eq!(flagged, row["name"].as_str().unwrap().starts_with("lower"), "{row}");
    }
}

#[test]
fn simulate_single_arm_rows_are_154() {
    let dir = TempDir::new().unwrap();
    let path = single_uniform(dir.path());
    let csv = dir.path().join("trials.csv");
    let out = maxk(&[
        "simulate", "--instance", path.to_str().unwrap(), "--trials", "10", "--seed", "5",
        "--trials-csv", csv.to_str().unwrap(), "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,V,T,failed,count_0"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        assert_eq!(row.split(',').nth(2), Some("154"), "{row}");
    }
    assert_eq!(json_of(&out)["samples"]["mean"], 154.0);
}

#[test]
fn simulate_unified_rows_are_232() {
    let dir = TempDir::new().unwrap();
    let inst = BanditInstance::new(
        vec![ArmModel::uniform(0.0, 1.0).unwrap(); 10],
        TailBound::power_law(1.0, 1.0, 1.0).unwrap(),
    )
    .unwrap();
    let path = write_instance(dir.path(), "ten.json", &inst, &PolicyConfig::new(0.1, 0.1).unwrap());
    let out = maxk(&["simulate", "--instance", path.to_str().unwrap(), "--policy", "unified", "--trials", "20", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("232")), "{text}");
}

#[test]
fn empty_arm_list_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, r#"{"tail_bound":{"kind":"power-law","A":1,"beta":1,"eps0":1},"arms":[],"config":{"epsilon":0.1,"delta":0.1}}"#).unwrap();
    let out = maxk(&["simulate", "--instance", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
    let out = maxk(&["bounds", "--instance", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn epsilon_beyond_domain_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let path = single_uniform(dir.path());
    let out = maxk(&["bounds", "--instance", path.to_str().unwrap(), "--epsilon", "2.0"]);
    assert_eq!(code(&out), 3);
    let out = maxk(&["simulate", "--instance", path.to_str().unwrap(), "--delta", "1.5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn safety_cap_hit_exits_4() {
    let dir = TempDir::new().unwrap();
    let path = single_uniform(dir.path());
    let out = maxk(&["simulate", "--instance", path.to_str().unwrap(), "--trials", "3", "--safety-cap", "20"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn adversarial_check_on_example_one() {
    let dir = TempDir::new().unwrap();
    let inst = example_instance(Example::OneHigh, EXAMPLE_A).unwrap();
    let path = write_instance(dir.path(), "ex1.json", &inst, &example_config());
    let out = maxk(&["adversarial-check", "--instance", path.to_str().unwrap(), "--arm", "1", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let r = json_of(&out);
    assert_eq!(r["certified"], true);
    assert!((r["new_max"].as_f64().unwrap() - 0.9001).abs() < 1e-12);
    assert!((r["params"]["t_k"].as_f64().unwrap() - 39.14).abs() < 0.01);
    assert!((r["params"]["p_eps"].as_f64().unwrap() - 0.998001).abs() < 1e-12);

    let out = maxk(&["adversarial-check", "--instance", path.to_str().unwrap(), "--arm", "10000"]);
    assert_eq!(code(&out), 2);
    let out = maxk(&["adversarial-check", "--instance", path.to_str().unwrap(), "--arm", "first"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unified_check_reports_mu_bar() {
    let dir = TempDir::new().unwrap();
    let path = single_uniform(dir.path());
    let out = maxk(&[
        "adversarial-check", "--instance", path.to_str().unwrap(), "--arm", "unified", "--format", "json",
        "--epsilon", "0.1", "--delta", "0.1",
    ]);
    assert_eq!(code(&out), 0);
    let r = json_of(&out);
    assert!((r["params"]["mu_bar"].as_f64().unwrap() - 0.1).abs() < 1e-11);
    assert_eq!(r["case"], "unified");
    assert_eq!(r["certified"], true);
}

#[test]
fn exported_hypothesis_round_trips() {
    let dir = TempDir::new().unwrap();
    let inst = BanditInstance::new(
        vec![
            ArmModel::uniform(0.5, 1.0).unwrap(),
            ArmModel::power_tail(0.8, 1.0, 0.5, 1.0).unwrap(),
            ArmModel::uniform(0.0, 0.3).unwrap(),
        ],
        TailBound::power_law(1.0, 1.0, 0.5).unwrap(),
    )
    .unwrap();
    let path = write_instance(dir.path(), "base.json", &inst, &PolicyConfig::new(0.05, 0.001).unwrap());
    for arm in ["0", "1", "2", "unified"] {
        let export = dir.path().join(format!("h{arm}.json"));
        let out = maxk(&["adversarial-check", "--instance", path.to_str().unwrap(), "--arm", arm, "--export", export.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let reread = InstanceFile::load(&export).unwrap().instance().unwrap();
        let out = maxk(&["bounds", "--instance", export.to_str().unwrap(), "--format", "json"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let r = json_of(&out);
        let cfg = PolicyConfig::new(0.05, 0.001).unwrap();
        let direct = maxk::bounds::upper_bound_max_cb(&reread, &cfg).unwrap().value;
        let via_cli = row_value(&r, "upper_max_cb");
        assert!((direct - via_cli).abs() <= 1e-9 * direct);
        assert_eq!(r["assumption"]["certified"], true);
    }
}

#[test]
fn reproduce_examples_pass_and_fail() {
    let out = maxk(&["reproduce-examples"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).trim_end().ends_with("PASS"));
    let out = maxk(&["reproduce-examples", "--json"]);
    let r = json_of(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 4);
    let out = maxk(&["reproduce-examples", "--tail-a", "0.02"]);
    assert_eq!(code(&out), 5);
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let dir = TempDir::new().unwrap();
    let path = single_uniform(dir.path());
    let run = || maxk(&["simulate", "--instance", path.to_str().unwrap(), "--trials", "50", "--format", "json", "--seed", "3"]);
    let (a, b) = (run(), run());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&a), code(&b));
}
