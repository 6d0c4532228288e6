use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn atorus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atorus"))
        .args(args)
        .output()
        .expect("run atorus")
}

fn spec(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(name)
        .display()
        .to_string()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn verify_heisenberg_passes_with_structured_output() {
    let out = atorus(&["verify", "heisenberg", "--samples", "20", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "atorus-report/1");
    assert_eq!(v["passed"], true);
    assert_eq!(
        v["classification"]["labels"],
        serde_json::json!(["a", "strict-a", "ac-perp"])
    );
    assert!(v.get("timings").is_none());
}

#[test]
fn report_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = atorus(&["report", "hopf-berger", "--samples", "15", "--seed", "3", "--output", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let seq = dir.path().join("seq.json");
    let out = atorus(&[
        "report",
        "hopf-berger",
        "--samples",
        "15",
        "--seed",
        "3",
        "--sequential",
        "--output",
        seq.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&seq).unwrap());
}

#[test]
fn wrong_expected_labels_exit_with_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let body = std::fs::read_to_string(spec("heisenberg.toml"))
        .unwrap()
        .replace(r#"expected_labels = ["a", "strict-a", "ac-perp"]"#, r#"expected_labels = ["einstein"]"#);
    let p = write(dir.path(), "wrong.toml", &body);
    let out = atorus(&["verify", p.to_str().unwrap(), "--samples", "10", "--suites", "classify"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall: FAIL"));
}

#[test]
fn malformed_spec_exits_with_usage_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "half.toml",
        "b = [[1.0]]\na = [[0.5]]\npotentials = [[\"0\", \"x\"]]\n[[factors]]\nzoo = \"flat-torus2\"\n",
    );
    let out = atorus(&["verify", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("half.toml:2: field `a[0][0]`"), "{err}");
    assert!(err.contains("integer coefficients"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(atorus(&["verify", "no-such-target"]).status.code(), Some(2));
    assert_eq!(atorus(&["verify", "heisenberg", "--samples", "9"]).status.code(), Some(2));
    assert_eq!(atorus(&["verify", "round-s2", "--suites", "bundle"]).status.code(), Some(2));
    assert_eq!(atorus(&["verify", "heisenberg", "--tier", "sloppy"]).status.code(), Some(2));
}

#[test]
fn counterexample_target_reports_expected_failure() {
    let out = atorus(&["verify", "counterexample:dxdx-lift", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("expected failure observed"), "{text}");
}

#[test]
fn classify_verb_on_trivial_bundle_gives_product_labels() {
    let out = atorus(&["classify", "trivial-s2", "--samples", "10", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        v["classification"]["labels"],
        serde_json::json!(["parallel-ricci", "a", "ac-perp"])
    );
    assert_eq!(v["suites"].as_array().unwrap().len(), 1);
}

#[test]
fn finite_difference_tier_runs_with_relaxed_tolerance() {
    let out = atorus(&["verify", "heisenberg", "--samples", "10", "--tier", "finite-difference", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["tolerance"], 1e-4);
}

#[test]
fn list_names_zoo_and_counterexamples() {
    let out = atorus(&["list"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l == "t2-over-s2xs2"));
    assert!(text.lines().any(|l| l == "counterexample:non-spd-b"));
}
