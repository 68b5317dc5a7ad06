use std::process::Command;

use jrt_cli::config::{ConfigError, OutputFormat, Overrides};
use jrt_cli::output::render;
use jrt_cli::runner::sub_seed;
use jrt_cli::{list_suites, run_suite, ScenarioConfig, Status};

fn config(suites: &[&str], samples: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        samples,
        seed,
        suites: suites.iter().map(|s| s.to_string()).collect(),
        ..ScenarioConfig::default()
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jrt"))
}

#[test]
fn fl_n1_twenty_five_samples_all_pass() {
    let rep = run_suite(&config(&["fl_n1"], 25, 7)).unwrap();
    assert_eq!(rep.records.len(), 25);
    assert!(rep.records.iter().all(|r| r.status == Status::Pass));
    assert_eq!(rep.summary.pass, 25);
    assert!(rep.all_pass());
}

#[test]
fn same_config_gives_identical_json() {
    let c = config(&["fl_n1", "orb_red", "constants"], 5, 3);
    let a = render(&run_suite(&c).unwrap(), OutputFormat::Json);
    let b = render(&run_suite(&c).unwrap(), OutputFormat::Json);
    assert_eq!(a, b);
    assert!(!a.contains("\"runtime_ms\": 1"), "timings are off by default");
}

#[test]
fn sample_streams_do_not_depend_on_other_suites() {
    let alone = run_suite(&config(&["orb_red"], 4, 9)).unwrap();
    let mixed = run_suite(&config(&["fl_n1", "orb_red"], 4, 9)).unwrap();
    let pick = |r: &jrt_cli::Report| r.suite_records("orb_red").map(|x| (x.seed, x.lhs.clone())).collect::<Vec<_>>();
    assert_eq!(pick(&alone), pick(&mixed));
}

#[test]
fn sub_seeds_differ_across_suites_and_samples() {
    assert_ne!(sub_seed(0, "fl_n1", 0), sub_seed(0, "fl_n1", 1));
    assert_ne!(sub_seed(0, "fl_n1", 0), sub_seed(0, "qcfl_n1", 0));
    assert_ne!(sub_seed(0, "fl_n1", 0), sub_seed(1, "fl_n1", 0));
}

#[test]
fn unknown_suite_is_a_config_error() {
    let err = run_suite(&config(&["no_such_suite"], 1, 0)).unwrap_err();
    assert!(matches!(err, ConfigError::UnknownSuite(ref s) if s == "no_such_suite"));
}

#[test]
fn invalid_values_are_rejected() {
    for bad in [
        ScenarioConfig { prime: 4, ..Default::default() },
        ScenarioConfig { prime: 2, ..Default::default() },
        ScenarioConfig { samples: 0, ..Default::default() },
        ScenarioConfig { rank: 0, ..Default::default() },
    ] {
        assert!(matches!(bad.validate(), Err(ConfigError::Invalid { .. })), "{bad:?}");
    }
}

#[test]
fn registry_listing() {
    let list = list_suites();
    assert!(list.len() >= 12);
    assert!(list.iter().any(|e| e.name == "qcfl_n1"));
    assert!(list.iter().all(|e| !e.anchor.is_empty()));
    let mut names: Vec<_> = list.iter().map(|e| e.name).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), list.len());
}

#[test]
fn flags_override_file_values() {
    let file = ScenarioConfig { prime: 5, samples: 3, seed: 4, ..Default::default() };
    let merged = file.clone().apply(Overrides { samples: Some(9), suites: vec!["fl_n1".into()], ..Default::default() });
    assert_eq!(merged.prime, 5);
    assert_eq!(merged.seed, 4);
    assert_eq!(merged.samples, 9);
    assert_eq!(merged.suites, vec!["fl_n1".to_string()]);
}

#[test]
fn failing_samples_do_not_stop_the_run() {
    // The alternative sign fails on nonsplit samples only; every sample still reports.
    let rep = run_suite(&config(&["type01_n1_alt", "fl_n1"], 6, 2)).unwrap();
    assert_eq!(rep.suite_records("type01_n1_alt").count(), 6);
    assert_eq!(rep.suite_records("fl_n1").count(), 6);
    assert!(rep.summary.fail > 0);
    assert!(!rep.all_pass());
}

#[test]
fn csv_has_one_row_per_record() {
    let rep = run_suite(&config(&["constants"], 1, 0)).unwrap();
    let text = render(&rep, OutputFormat::Csv);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), rep.records.len());
    assert_eq!(&rows[0][0], "constants");
}

#[test]
fn json_values_are_exact_integer_pairs() {
    let rep = run_suite(&config(&["hecke_conv"], 1, 0)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&render(&rep, OutputFormat::Json)).unwrap();
    let lhs = &v["records"][1]["lhs"]["rational"];
    assert_eq!(lhs, &serde_json::json!([1, 4]));
    assert_eq!(v["summary"]["config"]["prime"], 3);
}

#[test]
fn exit_code_zero_when_everything_passes() {
    let out = bin().args(["--suite", "constants", "--format", "text"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fail 0"));
}

#[test]
fn exit_code_one_on_a_failed_check() {
    let out = bin().args(["--suite", "type01_n1_alt", "--samples", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_two_on_config_errors() {
    let out = bin().args(["--suite", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["--prime", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["--config", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_then_flags() {
    let dir = std::env::temp_dir().join(format!("jrt-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("c.json");
    let out_path = dir.join("r.json");
    std::fs::write(&cfg, r#"{"prime": 5, "samples": 2, "suites": ["fl_n1"], "output": "text"}"#).unwrap();
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "--samples", "3", "--format", "json", "--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["summary"]["config"]["prime"], 5);
    assert_eq!(v["records"].as_array().unwrap().len(), 3);

    std::fs::write(&cfg, r#"{"prime": 5, "colour": "blue"}"#).unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn list_flag_prints_registry() {
    let out = bin().args(["--list"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().len() >= 12);
}
