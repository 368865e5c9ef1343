use std::path::Path;
use std::process::{Command, Output};

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-ppt"))
        .args(args)
        .env("LATTICE_PPT_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn check_four_state_set_writes_verifiable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("out.json");
    let out = run(dir.path(), &["check", "--set", "00,11,21,31", "--certificate", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["alpha"], "7/8");
    assert_eq!(v["verdict"], "indistinguishable");
    assert_eq!(v["certificate_verified"], true);

    let verified = run(dir.path(), &["check", "--verify", cert.to_str().unwrap()]);
    assert_eq!(verified.status.code(), Some(0));
    assert_eq!(json(&verified)["value"], "7/8");

    // Claiming a smaller bound than the dual point supports is rejected.
    let text = std::fs::read_to_string(&cert).unwrap().replace("\"value\":\"7/8\"", "\"value\":\"3/4\"");
    std::fs::write(&cert, text).unwrap();
    let rejected = run(dir.path(), &["check", "--verify", cert.to_str().unwrap()]);
    assert_eq!(rejected.status.code(), Some(1));
    assert_eq!(json(&rejected)["verified"], false);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["check", "--set", "00,00"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["check", "--set", "04"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify-theorem", "--name", "thm9"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["lemmas", "--t", "4", "--m", "5", "--full"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn lemmas_report_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["lemmas", "--t", "3", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["max_count"], 12);
    assert_eq!(v["histogram"]["12"], 63);
    let full = json(&run(dir.path(), &["lemmas", "--t", "2", "--m", "1", "--full"]));
    assert_eq!(full["histogram"]["6"], 16);
}

#[test]
fn oracle_families_bound() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = run(dir.path(), &["oracle", "--t", "1"]);
    assert_eq!(oracle.status.code(), Some(0));
    assert_eq!(json(&oracle)["pass"], true);
    let families = json(&run(dir.path(), &["families"]));
    assert_eq!(families["families"].as_array().unwrap().len(), 16);
    assert_eq!(families["families"][0]["members"], "02,12,20,21,23,32");
    let bound = json(&run(dir.path(), &["bound", "--set", "00,11,21,31"]));
    assert_eq!(bound["beta_prime"], "7/8");
    assert_eq!(bound["beta_prime_lp"], "7/8");
}

#[test]
fn reduced_costs_pass_for_seeded_quadruple() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["reduced-costs", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["z0"], "1");
}

#[test]
fn sample_output_is_reproducible_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--t", "2", "--k", "5", "--n", "8", "--seed", "11", "--no-timestamp"];
    let first = run(dir.path(), &args);
    let second = run(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&second.stderr).contains("0 LP solves"));
    let csv = run(dir.path(), &[&args[..], &["--format", "csv"]].concat());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("t,k,set,alpha,distinguishable,method,certificate_digest,timestamp\n"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn text_output_renders_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["check", "--set", "00,01,02", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("alpha: 1\n"));
    assert!(text.contains("verdict: distinguishable\n"));
}
