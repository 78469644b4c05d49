use std::process::{Command, Output};

use symbiosis_core::corpus::corpus_dir;

fn symkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symkit"))
        .args(args)
        .current_dir(corpus_dir())
        .output()
        .expect("symkit runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn warnings_pass_unless_strict() {
    let o = symkit(&["check", "heartland_broken.sym"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("V009 warning"));
    let o = symkit(&["check", "--strict", "heartland_broken.sym"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sym");
    std::fs::write(&path, "objective BO1 { object: \"o\" refines: NOPE }\n").unwrap();
    let o = symkit(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("V002"));
}

#[test]
fn missing_file_and_bad_usage_exit_two() {
    assert_eq!(symkit(&["check", "no_such_file.sym"]).status.code(), Some(2));
    assert_eq!(symkit(&["check", "--bogus", "jpmorgan.sym"]).status.code(), Some(2));
    assert_eq!(symkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(symkit(&["graph", "jpmorgan.sym", "--format", "svg"]).status.code(), Some(2));
}

#[test]
fn check_json_lists_diagnostics() {
    let o = symkit(&["check", "--format", "json", "heartland_broken.sym", "heartland_fixed.sym"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(v[0]["diagnostics"].as_array().unwrap().iter().any(|d| d["code"] == "V009"));
}

#[test]
fn eval_json_carries_value_and_band() {
    let o = symkit(&[
        "eval", "jpmorgan.sym", "--measurements", "jpmorgan_2014-09.jsonl", "--metric", "ME1.1.1.1.1",
        "--period", "2014-09", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("\"value\": 70.0"));
    assert!(text.contains("\"band\": \"watch\""));
}

#[test]
fn eval_refuses_invalid_models() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sym");
    let text = std::fs::read_to_string(corpus_dir().join("anthem.sym"))
        .unwrap()
        .replace("[90, 100)", "[91, 100)");
    std::fs::write(&path, text).unwrap();
    let o = symkit(&[
        "eval", path.to_str().unwrap(), "--measurements", "anthem_2015.jsonl", "--period", "2015-10",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("V008"));
}

#[test]
fn malformed_log_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    std::fs::write(&log, "{\"timestamp\": \"2015-13-01\", \"base\": \"bm_credentials_justified\", \"value\": 1}\n").unwrap();
    let o = symkit(&["eval", "anthem.sym", "--measurements", log.to_str().unwrap(), "--period", "2015"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("I003"), "{}", stderr(&o));
}

#[test]
fn render_single_sentence() {
    let o = symkit(&["render", "jpmorgan.sym", "--id", "BO1"]);
    assert!(stdout(&o).starts_with("One of our primary business objectives is to apply a systematic approach"));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn report_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.svg");
    let o = symkit(&[
        "report", "anthem.sym", "--measurements", "anthem_2015.jsonl", "--from", "2015-01", "--to", "2015-12",
        "--format", "svg", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("<svg"));
}

#[test]
fn fmt_rewrites_canonically_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.sym");
    std::fs::copy(corpus_dir().join("anthem.sym"), &path).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(symkit(&["fmt", "--quiet", p]).status.code(), Some(0));
    let once = std::fs::read_to_string(&path).unwrap();
    assert_eq!(symkit(&["fmt", "--quiet", p]).status.code(), Some(0));
    assert_eq!(once, std::fs::read_to_string(&path).unwrap());
    assert_eq!(symkit(&["check", p]).status.code(), Some(0));
}

#[test]
fn fmt_refuses_includes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.sym");
    std::fs::write(&path, "include \"other.sym\"\n").unwrap();
    let o = symkit(&["fmt", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "include \"other.sym\"\n");
}

#[test]
fn impact_names_orphans() {
    let o = symkit(&["impact", "jpmorgan.sym", "changes/jpmorgan_without_BO1.1.1.sym"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("REMOVED objective BO1.1.1"));
    assert!(text.contains("MG1.1.1.1") && text.contains("ME1.1.1.1.1"));
    let o = symkit(&["impact", "jpmorgan.sym", "jpmorgan.sym"]);
    assert_eq!(stdout(&o), "no changes\n");
}
