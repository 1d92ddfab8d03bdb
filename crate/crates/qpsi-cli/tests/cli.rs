//! End-to-end CLI behavior: exit codes, input formats, config files, the
//! seed environment fallback, and report stability.

use std::io::Write;
use std::process::{Command, Output};

fn qpsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpsi"))
        .args(args)
        .env_remove("QPSI_SEED")
        .output()
        .expect("binary runs")
}

fn qpsi_with_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpsi"))
        .args(args)
        .env("QPSI_SEED", seed)
        .output()
        .expect("binary runs")
}

fn report(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON report")
}

const REFERENCE: [&str; 6] = [
    "--universe",
    "2,5,7,9,13,17,20,35",
    "--set-a",
    "5,7,17,20",
    "--set-b",
    "7,13,17,35",
];

#[test]
fn run_reference_sets_yields_their_intersection() {
    let out = qpsi(&[&["run"], &REFERENCE[..], &["--mode", "exact", "--seed", "7"]].concat());
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["command"], "run");
    assert_eq!(
        report["results"]["outcome"]["intersection"],
        serde_json::json!([7, 17])
    );
}

#[test]
fn every_report_carries_the_documented_top_level_fields() {
    let invocations: Vec<Vec<&str>> = vec![
        [&["run"][..], &REFERENCE[..]].concat(),
        vec!["demo-example"],
        vec!["verify-gates"],
        vec!["vuln-nqpsi", "--trials", "2"],
        vec!["attack", "--trials", "20", "--seed", "1"],
        vec!["monte-carlo", "--trials", "5", "--max-n", "4"],
    ];
    for args in &invocations {
        let out = qpsi(args);
        let report = report(&out);
        let object = report.as_object().unwrap();
        for field in ["schema_version", "command", "inputs", "results", "timing_ms"] {
            assert!(object.contains_key(field), "{args:?} report lacks {field}");
        }
        assert_eq!(object.len(), 5, "{args:?} report has extra top-level fields");
        assert_eq!(report["timing_ms"], 0, "timing must be off by default");
    }
}

#[test]
fn empty_set_yields_empty_intersection() {
    let out = qpsi(&[
        "run",
        "--universe",
        "2,5,7",
        "--set-a",
        "",
        "--set-b",
        "5,7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        report(&out)["results"]["outcome"]["intersection"],
        serde_json::json!([])
    );
}

#[test]
fn element_outside_universe_is_a_usage_error() {
    let out = qpsi(&["run", "--universe", "2,5,7", "--set-a", "99", "--set-b", ""]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = qpsi(&["run", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn invalid_mode_value_is_a_usage_error() {
    let out = qpsi(&[&["run"], &REFERENCE[..], &["--mode", "psychic"]].concat());
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn duplicate_universe_elements_are_a_usage_error() {
    let out = qpsi(&["run", "--universe", "2,2,5", "--set-a", "", "--set-b", ""]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn missing_universe_file_is_an_input_error() {
    let out = qpsi(&[
        "run",
        "--universe",
        "/no/such/file.txt",
        "--set-a",
        "",
        "--set-b",
        "",
    ]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn malformed_universe_file_is_an_input_error() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "2\nfive\n7").unwrap();
    let path = file.path().to_str().unwrap();
    let out = qpsi(&["run", "--universe", path, "--set-a", "", "--set-b", ""]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn universe_file_with_one_element_per_line_works() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "2\n5\n7\n\n9").unwrap();
    let path = file.path().to_str().unwrap();
    let out = qpsi(&["run", "--universe", path, "--set-a", "5,9", "--set-b", "9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        report(&out)["results"]["outcome"]["intersection"],
        serde_json::json!([9])
    );
}

#[test]
fn eavesdropped_session_without_retries_aborts_with_exit_2() {
    let out = qpsi(&[
        &["run"],
        &REFERENCE[..],
        &[
            "--eve-strategy",
            "intercept",
            "--retries",
            "0",
            "--decoys",
            "32",
            "--seed",
            "1",
        ],
    ]
    .concat());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["results"]["outcome"]["kind"], "aborted");
}

#[test]
fn overly_strict_tolerance_fails_gate_verification_with_exit_3() {
    let out = qpsi(&["verify-gates", "--tolerance", "1e-16"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["results"]["pass"], false);
}

#[test]
fn default_gate_verification_passes() {
    let out = qpsi(&["verify-gates"]);
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    assert_eq!(report["results"]["pass"], true);
    for route in report["results"]["routes"].as_array().unwrap() {
        assert_eq!(route["identical"], true);
    }
}

#[test]
fn demo_example_checks_out() {
    let out = qpsi(&["demo-example"]);
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    assert_eq!(report["results"]["all_match"], true);
    assert_eq!(report["results"]["announced"], serde_json::json!([3, 6]));
}

#[test]
fn passthrough_attack_detects_nothing() {
    let out = qpsi(&[
        "attack",
        "--strategy",
        "passthrough",
        "--trials",
        "50",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    assert_eq!(report["results"]["detections"], 0);
    assert_eq!(report["results"]["theoretical_rate"], 0.0);
}

#[test]
fn attack_without_decoys_disturbs_but_never_detects() {
    let out = qpsi(&[
        "attack",
        "--strategy",
        "intercept",
        "--decoys",
        "0",
        "--trials",
        "100",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["detections"], 0);
}

#[test]
fn monte_carlo_exact_mode_matches_oracle() {
    let out = qpsi(&[
        "monte-carlo",
        "--trials",
        "60",
        "--max-n",
        "8",
        "--seed",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    assert_eq!(report["results"]["matches"], 60);
    assert_eq!(report["results"]["mismatches"], serde_json::json!([]));
}

#[test]
fn reports_are_byte_identical_across_reruns() {
    let args: Vec<&str> = [&["run"][..], &REFERENCE[..], &["--seed", "123"][..]].concat();
    let first = qpsi(&args);
    let second = qpsi(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.status.code(), Some(0));
}

#[test]
fn seed_env_fallback_applies_and_flag_wins() {
    let args: Vec<&str> = [&["run"][..], &REFERENCE[..]].concat();
    let via_env = qpsi_with_env(&args, "123");
    let via_flag = qpsi(&[&args[..], &["--seed", "123"]].concat());
    assert_eq!(via_env.stdout, via_flag.stdout);

    let flag_args: Vec<&str> = [&args[..], &["--seed", "5"]].concat();
    let flag_wins = qpsi_with_env(&flag_args, "123");
    let plain_flag = qpsi(&flag_args);
    assert_eq!(flag_wins.stdout, plain_flag.stdout);
}

#[test]
fn invalid_env_seed_is_a_usage_error() {
    let args: Vec<&str> = [&["run"][..], &REFERENCE[..]].concat();
    let out = qpsi_with_env(&args, "not-a-number");
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn json_config_file_supplies_the_session() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(
        file,
        r#"{{"universe": [2,5,7,9], "set_a": "5,7", "set_b": [7,9], "seed": 3, "decoys_per_hop": 2}}"#
    )
    .unwrap();
    let path = file.path().to_str().unwrap();
    let out = qpsi(&["run", "--config", path]);
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    assert_eq!(
        report["results"]["outcome"]["intersection"],
        serde_json::json!([7])
    );
    assert_eq!(report["inputs"]["seed"], 3);
    assert_eq!(report["inputs"]["decoys_per_hop"], 2);
}

#[test]
fn key_value_config_file_works_and_flags_override_it() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(
        file,
        "universe=2,5,7,9\nset_a=5,7\nset_b=7,9\nseed=3\nmax_retries=1\n"
    )
    .unwrap();
    let path = file.path().to_str().unwrap();
    let out = qpsi(&["run", "--config", path, "--set-b", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    assert_eq!(
        report["results"]["outcome"]["intersection"],
        serde_json::json!([5])
    );
    assert_eq!(report["inputs"]["max_retries"], 1);
}

#[test]
fn malformed_config_file_is_an_input_error() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "universe=2,5\nwat\n").unwrap();
    let path = file.path().to_str().unwrap();
    let out = qpsi(&["run", "--config", path]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qpsi(&[
        "verify-gates",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["command"], "verify-gates");
}

#[test]
fn help_exits_zero() {
    let out = qpsi(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verbose_transcript_embeds_payloads() {
    let args: Vec<&str> =
        [&["run"][..], &REFERENCE[..], &["--seed", "9", "--verbose-transcript"]].concat();
    let out = qpsi(&args);
    assert_eq!(out.status.code(), Some(0));
    let report = report(&out);
    let steps = report["results"]["transcript"]["steps"].as_array().unwrap();
    assert!(steps[0].get("payload").is_some());
}
