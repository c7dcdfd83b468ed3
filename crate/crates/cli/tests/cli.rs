use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.display().to_string()
}

fn setdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setdiv")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid JSON document")
}

fn binary_entropy_of_eigs(a: f64, b: f64) -> f64 {
    -(a * a.log2() + b * b.log2())
}

#[test]
fn umegaki_against_maximally_mixed() {
    let o = setdiv(&["div", "--kind", "umegaki", &data("rho.json"), &data("mixed.json")]);
    let v = stdout_json(&o).as_f64().unwrap();
    // D(ρ‖I/2) = 1 − S(ρ); eigenvalues of ρ are ½ ± √0.08
    let r = 0.08f64.sqrt();
    let want = 1.0 - binary_entropy_of_eigs(0.5 + r, 0.5 - r);
    assert!((v - want).abs() < 1e-10, "{v} vs {want}");
}

#[test]
fn div_csv_and_missing_alpha() {
    let o = setdiv(&["--format", "csv", "div", "--kind", "dmax", &data("diag.json"), &data("mixed.json")]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value"));
    let v: f64 = lines.next().unwrap().parse().unwrap();
    assert!((v - 1.8f64.log2()).abs() < 1e-9);

    let o = setdiv(&["div", "--kind", "petz", &data("rho.json"), &data("mixed.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_points_at_the_field() {
    let o = setdiv(&["setdiv", "--kind", "dmax", &data("bad_entry.json"), &data("incoherent2.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["pointer"], "/generators/0/re/1/1");
    assert!(o.stdout.is_empty());

    let o = setdiv(&["div", "--kind", "umegaki", &data("not_hermitian.json"), &data("mixed.json")]);
    assert_eq!(o.status.code(), Some(2));

    let o = setdiv(&["div", "--kind", "umegaki", &data("absent.json"), &data("mixed.json")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn robustness_of_plus_state() {
    let o = setdiv(&["setdiv", "--kind", "dmax", &data("plus.json"), &data("incoherent2.json")]);
    let doc = stdout_json(&o);
    assert!((doc["value"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    assert_eq!(doc["heuristic"], false);
}

#[test]
fn heuristic_results_are_gated() {
    let c = data("conditional.json");
    let o = setdiv(&["setdiv", "--kind", "dmin", &c, &c]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    let o = setdiv(&["--allow-heuristic", "setdiv", "--kind", "dmin", &c, &c]);
    let doc = stdout_json(&o);
    assert_eq!(doc["heuristic"], true);
}

#[test]
fn aep_table_on_singletons() {
    let o = setdiv(&["aep", "--m-max", "2", &data("plus.json"), &data("diag_set.json")]);
    let doc = stdout_json(&o);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    // D(|+⟩‖diag(0.8, 0.2)) = −½ log 0.8 − ½ log 0.2
    let d = -0.5 * (0.8f64.log2() + 0.2f64.log2());
    for r in rows {
        assert!((r["upper"].as_f64().unwrap() - d).abs() < 1e-6, "{r}");
        assert!(r["lower"].as_f64().unwrap() <= d + 1e-9);
    }

    let o = setdiv(&["--format", "csv", "aep", "--m-max", "2", &data("plus.json"), &data("diag_set.json")]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("m,lower,upper,gap_guarantee,heuristic\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn stein_csv() {
    let o = setdiv(&["--format", "csv", "stein", "--epsilon", "0.3", "--n-max", "2", &data("plus.json"), &data("diag_set.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["n", "dh_per_n", "floor", "ceiling"]);
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let (dh, lo, hi): (f64, f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(lo - 1e-4 <= dh && dh <= hi + 1e-4);
    }
}

#[test]
fn coherence_rate() {
    let o = setdiv(&["rate", "--m-max", "1", &data("plus.json"), &data("plus3.json"), &data("incoherent2.json"), &data("incoherent3.json")]);
    let doc = stdout_json(&o);
    let (lo, hi) = (doc["rate_interval"]["lo"].as_f64().unwrap(), doc["rate_interval"]["hi"].as_f64().unwrap());
    let want = 1.0 / 3f64.log2();
    assert!(lo <= want && want <= hi, "[{lo}, {hi}]");
}

#[test]
fn protocol_null_control() {
    let o = setdiv(&["protocol", "--epsilon", "0.2", "--delta", "0.1", &data("diag_set.json"), &data("incoherent2.json"), &data("diag_set.json")]);
    let doc = stdout_json(&o);
    assert!(doc["audit"]["trans_error"].as_f64().unwrap() <= 0.2 + 5e-3);
    assert!(doc["audit"]["rng_violation"].as_f64().unwrap() <= 5e-3);
    assert!((doc["audit"]["delta_target"].as_f64().unwrap() - 0.1f64.exp2().recip()).abs() < 1e-12);
}

#[test]
fn validate_named_family() {
    let o = setdiv(&["validate", "--family", "incoherent", "--d", "2", "--m", "2", "--k", "1"]);
    let doc = stdout_json(&o);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn tolerance_overrides() {
    let o = setdiv(&["--tol", "gap=0.001", "tolerances"]);
    let doc = stdout_json(&o);
    let gap = doc.as_array().unwrap().iter().find(|e| e["name"] == "gap").unwrap();
    assert_eq!(gap["value"].as_f64(), Some(1e-3));
    assert_eq!(gap["default"].as_f64(), Some(1e-4));
    for bad in ["gap", "gap=-1", "unknown=1"] {
        assert_eq!(setdiv(&["--tol", bad, "tolerances"]).status.code(), Some(2), "{bad}");
    }
}

#[test]
fn runs_are_reproducible_and_out_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let args = ["--seed", "7", "validate", "--family", "conditional", "--d", "2", "--samples", "3"];
    let a = setdiv(&args);
    let b = setdiv(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut with_out = args.to_vec();
    with_out.splice(0..0, ["--out", out.to_str().unwrap()]);
    let c = setdiv(&with_out);
    assert!(c.status.success() && c.stdout.is_empty());
    let written = std::fs::read(&out).unwrap();
    assert_eq!(serde_json::from_slice::<serde_json::Value>(&written).unwrap(), stdout_json(&a));
}

#[test]
fn csv_rejected_where_there_is_no_table() {
    let o = setdiv(&["--format", "csv", "rate", &data("plus.json"), &data("plus3.json"), &data("incoherent2.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_cleanly() {
    assert!(setdiv(&["--help"]).status.success());
    assert!(setdiv(&["--version"]).status.success());
    assert_eq!(setdiv(&[]).status.code(), Some(2));
}
