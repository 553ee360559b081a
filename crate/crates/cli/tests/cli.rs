use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PSI: &str = r#"{"prime": 3, "function": [{"gamma": 0, "n": "0", "j": 1}]}"#;

const REFLECTION_PAIR: &str = r#"{
  "prime": 3,
  "function": [
    {"gamma": -1, "n": "1/3", "j": 1},
    {"gamma": -1, "n": "2/3", "j": 2, "coeff": {"zeta_powers": [[2, "1"]]}}
  ]
}"#;

fn run(dir: &TempDir, config: &str, args: &[&str]) -> Output {
    let path = dir.path().join("config.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_padic-frames"))
        .arg("--config")
        .arg(&path)
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn frame_bound_of_mother_wavelet() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, PSI, &["--command", "frame-bound"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["frame_bound"], "3");
    assert_eq!(r["status"], "pass");
}

#[test]
fn genericity_lists_reflection_witness() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, REFLECTION_PAIR, &["--command", "genericity"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["genericity"]["generic_up_to_depth"], false);
    assert_eq!(r["genericity"]["witnesses"][0]["a"], "-1");
    assert_eq!(r["genericity"]["witnesses"][0]["b"], "0");
}

#[test]
fn seeded_frame_check_has_zero_residuals() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, PSI, &["--command", "frame-check", "--random-g", "25", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["frame"]["g_count"], 25);
    assert_eq!(r["frame"]["all_zero_residuals"], true);
    assert!(r["frame"]["residuals"].as_array().unwrap().iter().all(|x| x["residual"] == "0"));
    assert_eq!(r["random_grid"]["gamma_max"], 2);
}

#[test]
fn float_mode_frame_check() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, PSI, &["--command", "frame-check", "--random-g", "5", "--mode", "float"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(&out)["frame"]["exact"], false);
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["--command", "orbit", "--random-g", "6", "--seed", "11"];
    let first = run(&dir, PSI, &args);
    let second = run(&dir, PSI, &args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let file = dir.path().join("report.json");
    let mut with_file = args.to_vec();
    with_file.extend(["--output", file.to_str().unwrap()]);
    let third = run(&dir, PSI, &with_file);
    assert!(third.stdout.is_empty());
    assert_eq!(std::fs::read(Path::new(&file)).unwrap(), first.stdout);
}

#[test]
fn every_command_passes_on_mother_wavelet() {
    let dir = TempDir::new().unwrap();
    for command in ["stabilizer", "genericity", "orbit", "frame-bound", "oracle-check", "mra-demo"] {
        let out = run(&dir, PSI, &["--command", command]);
        assert_eq!(out.status.code(), Some(0), "{command}: {}", stderr(&out));
        assert_eq!(report(&out)["command"], command);
    }
}

#[test]
fn mra_demo_reports_threshold() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"prime": 3, "function": [{"gamma": 0, "n": "0", "j": 1}, {"gamma": 1, "n": "0", "j": 1}]}"#;
    let out = run(&dir, config, &["--command", "mra-demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["mra"]["gram_identity"], true);
    assert_eq!(r["mra"]["orthogonality_threshold_observed"], 2);
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, "{\"prime\": 3,\n \"function\": [}", &["--command", "stabilizer"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2 column"), "{}", stderr(&out));
}

#[test]
fn field_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"prime": 4, "function": [{"gamma": 0, "n": "0", "j": 1}]}"#, "prime:"),
        (r#"{"prime": 3, "function": [{"gamma": 0, "n": "0", "j": 1}, {"gamma": 0, "n": "1/2", "j": 1}]}"#, "function[1].n"),
        (r#"{"prime": 3, "function": [{"gamma": 0, "n": "0", "j": 3}]}"#, "function[0].j"),
        (r#"{"prime": 3, "function": [{"gamma": 0, "n": "0", "j": 1, "coeff": {"re": 1.0, "im": 0.0}}]}"#, "function[0].coeff"),
        (r#"{"prime": 3, "function": [{"gamma": 0, "n": "0", "j": 1}], "colour": 1}"#, "unknown field"),
        (r#"{"prime": 3, "function": [{"gamma": 0, "n": "0", "j": 1}], "elements": [{"a": "0", "b": "1"}]}"#, "elements[0].a"),
    ];
    for (config, needle) in cases {
        let out = run(&dir, config, &["--command", "stabilizer"]);
        assert_eq!(out.status.code(), Some(2), "{config}");
        assert!(stderr(&out).contains(needle), "{needle}: {}", stderr(&out));
    }
}

#[test]
fn complex_coefficients_accepted_in_float_mode() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"prime": 3, "mode": "float", "function": [{"gamma": 0, "n": "0", "j": 1, "coeff": {"re": 0.5, "im": 0.5}}]}"#;
    let out = run(&dir, config, &["--command", "frame-bound"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn depth_below_minimum_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, PSI, &["--command", "genericity", "--depth", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("depth"));
}

#[test]
fn oversized_problems_fail_cleanly() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"prime": 2, "function": [{"gamma": 0, "n": "0", "j": 1}, {"gamma": 0, "n": "1/1180591620717411303424", "j": 1}], "random_g": 1}"#;
    let out = run(&dir, config, &["--command", "frame-check"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("analysis failed"));
}
