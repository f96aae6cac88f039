use std::path::PathBuf;
use std::process::{Command, Output};

use confound_kit::cli::{ClassifyOutput, HypothesisListing};
use confound_kit::theorems::VerificationReport;
use confound_kit::{ClassificationReport, Rational, Scalar, Verdict};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confound-kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

#[test]
fn analyze_table1_with_coarsening() {
    let out = run(&["analyze", &fixture("table1.csv"), "--coarsen", "0=1,2,3;1=4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r: ClassificationReport<Rational> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r.verdict, Verdict::Neither);
    assert_eq!(r.adjusted_gap, q(75, 1000));
}

#[test]
fn analyze_binary_table_directly() {
    let out = run(&["analyze", &fixture("table1.csv")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Neither"), "{text}");
    assert!(text.contains("doomed"));
}

#[test]
fn analyze_reconstructed_base() {
    let out = run(&["analyze", &fixture("table2_base.csv"), "--coarsen", "0=1,3,4;1=2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r: ClassificationReport<Rational> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r.verdict, Verdict::Confounder);
    assert_eq!(r.adjusted_gap, q(48, 1000));
}

#[test]
fn analyze_four_levels_without_map_fails() {
    let out = run(&["analyze", &fixture("table2_base.csv")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn classify_independent_model_is_irrelevant() {
    let out = run(&[
        "classify", "--model", "3", "--a", "0.5", "--t", "0.3", "--b0", "0.2", "--b1", "0.7",
        "--u0", "0.4", "--u1", "0.1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let o: ClassifyOutput<f64> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(o.report.verdict, Verdict::Irrelevant);
    assert_eq!(o.hypotheses.len(), 7);
}

#[test]
fn classify_balanced_exposure_is_irrelevant() {
    let out = run(&[
        "classify", "--model", "1", "--t", "0.4", "--a0", "0.3", "--a1", "0.3", "--b0", "0.1",
        "--b1", "0.7", "--u0", "0.3", "--u1", "0.9", "--format", "json",
    ]);
    let o: ClassifyOutput<f64> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(o.report.verdict, Verdict::Irrelevant);
}

/// Gap 0.2 against |B| = 0.45 meets the strict inequality, so this is a
/// confounder even though the worked example is sometimes listed as Neither.
#[test]
fn classify_model1_example_exact() {
    let out = run(&[
        "classify", "--model", "1", "--t", "0.4", "--a0", "0.2", "--a1", "0.6", "--b0", "0.1",
        "--b1", "0.7", "--u0", "0.3", "--u1", "0.9", "--exact", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let o: ClassifyOutput<Rational> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(o.report.standardized, q(1, 2));
    assert_eq!(o.report.observed, q(1, 4));
    assert_eq!(o.report.bias, q(9, 20));
    assert_eq!(o.report.adjusted_gap, q(1, 5));
    assert_eq!(o.report.verdict, Verdict::Confounder);
}

#[test]
fn classify_usage_errors() {
    let missing = run(&["classify", "--model", "3", "--a", "0.5"]);
    assert_eq!(missing.status.code(), Some(2));
    let foreign = run(&[
        "classify", "--model", "3", "--a", "0.5", "--t", "0.3", "--a0", "0.1", "--b0", "0.2",
        "--b1", "0.7", "--u0", "0.4", "--u1", "0.1",
    ]);
    assert_eq!(foreign.status.code(), Some(2));
    let range = run(&[
        "classify", "--model", "3", "--a", "1.5", "--t", "0.3", "--b0", "0.2", "--b1", "0.7",
        "--u0", "0.4", "--u1", "0.1",
    ]);
    assert_eq!(range.status.code(), Some(2));
    assert_eq!(run(&["classify", "--model", "4"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "x.csv", "--bogus"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_reports() {
    let out = run(&["verify", "--theorem", "T1", "--clause", "a", "--samples", "10000", "--seed", "7", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r: VerificationReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(r.passed());
    assert_eq!(r.samples, 10_000);
    assert!(r.max_violation >= 0.0);
}

#[test]
fn verify_exact_at_zero_tolerance() {
    let out = run(&["verify", "--theorem", "T4", "--clause", "d", "--samples", "100", "--exact", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r: VerificationReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(r.exact);
    assert_eq!(r.tol, 0.0);
    assert_eq!(r.max_violation, 0.0);
}

#[test]
fn verify_is_byte_deterministic() {
    let args = ["verify", "--theorem", "T2", "--clause", "e", "--samples", "1", "--seed", "1", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let threaded = Command::new(env!("CARGO_BIN_EXE_confound-kit"))
        .args(["verify", "--theorem", "T5", "--clause", "c", "--samples", "2000", "--format", "json"])
        .env("CONFOUND_KIT_THREADS", "1")
        .output()
        .unwrap();
    let pooled = run(&["verify", "--theorem", "T5", "--clause", "c", "--samples", "2000", "--format", "json"]);
    assert_eq!(threaded.stdout, pooled.stdout);
}

#[test]
fn verify_rejects_unknown_clauses() {
    assert_eq!(run(&["verify", "--theorem", "T6", "--clause", "a"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--theorem", "T1", "--clause", "d"]).status.code(), Some(2));
    let inexact = run(&["verify", "--theorem", "T1", "--clause", "a", "--exact", "--tol", "1e-3"]);
    assert_eq!(inexact.status.code(), Some(2));
}

#[test]
fn json_round_trips_without_extra_fields() {
    let out = stdout(&run(&["analyze", &fixture("table2.csv"), "--format", "json"]));
    let r: ClassificationReport<Rational> = serde_json::from_str(&out).unwrap();
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&r).unwrap()), out);

    let out = stdout(&run(&["hypotheses", "--format", "json"]));
    let l: HypothesisListing = serde_json::from_str(&out).unwrap();
    assert_eq!(l.hypotheses.len(), 7);
    assert_eq!(l.clauses.len(), 19);
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&l).unwrap()), out);

    let out = stdout(&run(&["verify", "--theorem", "T3", "--clause", "c", "--samples", "50", "--format", "json"]));
    let v: VerificationReport = serde_json::from_str(&out).unwrap();
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()), out);
}

#[test]
fn version_flag() {
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains(env!("CARGO_PKG_VERSION")));
}
