use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn walklab(args: &[&str], config: &Path, out: &Path) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_walklab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    Run {
        code: o.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn report(path: PathBuf) -> Value {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert!(doc["quantity"].is_string());
    assert!(doc["config"].is_object());
    doc["report"].clone()
}

/// Data rows of a report CSV, header comments dropped.
fn csv_rows(path: PathBuf) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# quantity: "));
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn s3_transpositions_period_two_with_alternating_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["period"], &configs().join("s3_transpositions.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(dir.path().join("period.json"));
    assert_eq!(rep["period"]["d"], 2);
    assert_eq!(rep["period"]["certification"]["status"], "exact");
    let gamma0: Vec<&str> = rep["partition"]["gamma0"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(gamma0, ["[0,1,2]", "[1,2,0]", "[2,0,1]"]);
    assert_eq!(rep["gamma0_union"]["equals_label0_class"], true);
    assert!(rep["verification"]["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(rep["caveat"].is_null());
}

#[test]
fn z2_labels_are_coordinate_parity() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["period"], &configs().join("z2_srw.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("caveat: candidate(64)"));
    let rep = report(dir.path().join("period.json"));
    assert_eq!(rep["period"]["d"], 2);
    assert_eq!(rep["period"]["certification"]["status"], "candidate");
    let rows = csv_rows(dir.path().join("coset_labels.csv"));
    // forward ball of radius 8 in Z^2: 2 r^2 + 2 r + 1 points
    assert_eq!(rows.len(), 145);
    for row in rows {
        let coords: Vec<i64> = row[0].trim_matches(|c| c == '(' || c == ')').split(',').map(|t| t.parse().unwrap()).collect();
        let parity = (coords[0] + coords[1]).rem_euclid(2);
        assert_eq!(row[1], parity.to_string());
    }
}

#[test]
fn one_sided_walk_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["period"], &configs().join("z_one_sided.json"), dir.path());
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("not irreducible"));
}

#[test]
fn invalid_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(
        dir.path(),
        r#"{"group": {"kind": "free_abelian", "rank": 1}, "measure": [{"elem": "(1)", "prob": "1"}], "bogus": 3}"#,
    );
    assert_eq!(walklab(&["period"], &unknown, dir.path()).code, 1);
    let heavy = write_config(
        dir.path(),
        r#"{"group": {"kind": "free_abelian", "rank": 1}, "measure": [{"elem": "(1)", "prob": "0.7"}, {"elem": "(-1)", "prob": "0.4"}]}"#,
    );
    assert_eq!(walklab(&["spectral"], &heavy, dir.path()).code, 1);
    let syntax = write_config(
        dir.path(),
        r#"{"group": {"kind": "free_abelian", "rank": 2}, "measure": [{"elem": "(1,", "prob": "1"}]}"#,
    );
    assert_eq!(walklab(&["period"], &syntax, dir.path()).code, 1);
    let missing = dir.path().join("absent.json");
    assert_eq!(walklab(&["period"], &missing, dir.path()).code, 1);
}

#[test]
fn size_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // not isotropic, so the walk is convolved on the full free group
    let cfg = write_config(
        dir.path(),
        r#"{"group": {"kind": "free_group", "rank": 2},
            "measure": [{"elem": "a", "prob": "0.4"}, {"elem": "A", "prob": "0.2"},
                        {"elem": "b", "prob": "0.2"}, {"elem": "B", "prob": "0.2"}],
            "cap": 2000, "n_max": 100}"#,
    );
    let r = walklab(&["spectral"], &cfg, dir.path());
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("cap"));
}

#[test]
fn spectral_lazy_drift() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["spectral"], &configs().join("z_lazy_drift.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(dir.path().join("spectral.json"));
    let rho_hat = rep["estimate"]["rho_hat"].as_f64().unwrap();
    assert!((rho_hat - 0.958257569495584).abs() < 1e-3, "{rho_hat}");
    assert_eq!(rep["exact_rho"]["method"], "laplace_exact");
    assert_eq!(rep["gerl"]["status"], "passed");
    let rows = csv_rows(dir.path().join("spectral.csv"));
    assert_eq!(rows.len(), 4000);
    let exact = 0.958257569495584;
    for row in &rows {
        if let Ok(root) = row[2].parse::<f64>() {
            assert!(root <= exact + 1e-9);
        }
    }
}

#[test]
fn spectral_free_group_fast_path() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["spectral"], &configs().join("f2_lazy.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rho_hat = report(dir.path().join("spectral.json"))["estimate"]["rho_hat"].as_f64().unwrap();
    assert!((rho_hat - (1.0 + 3f64.sqrt() / 2.0) / 2.0).abs() < 2e-3, "{rho_hat}");
}

#[test]
fn exact_flag_adds_exact_supermultiplicativity() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["spectral", "--exact", "--nmax", "200"], &configs().join("z_lazy_drift.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("spectral.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["weight_mode"], "exact");
    assert_eq!(doc["config"]["n_max"], 200);
    assert!(doc["report"]["supermultiplicativity_exact"]["pairs_checked"].as_u64().unwrap() > 0);
}

#[test]
fn ratio_limits_agree_across_targets() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["ratio"], &configs().join("z_lazy_drift.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(dir.path().join("ratio.json"));
    assert_eq!(rep["reports"].as_array().unwrap().len(), 5);
    assert!(rep["limit_spread"].as_f64().unwrap() < 1e-3);
    for x in rep["reports"].as_array().unwrap() {
        assert!((x["extrapolated_limit"].as_f64().unwrap() - 0.958257569495584).abs() < 2e-3);
    }
}

#[test]
fn limit_measure_lazy_drift() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["limit-measure"], &configs().join("z_lazy_drift.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(dir.path().join("limit_measure.json"));
    let values = rep["values"].as_array().unwrap();
    let at = |x: &str| values.iter().find(|v| v[0] == x).unwrap()[1].as_f64().unwrap();
    assert_eq!(at("(0)"), 1.0);
    assert!((at("(1)") - (3.0f64 / 7.0).sqrt()).abs() < 1e-2);
    assert!(rep["residual_rho_hat"]["residual"].as_f64().unwrap() <= 1e-2);
    let rows = csv_rows(dir.path().join("nu.csv"));
    assert_eq!(rows.len(), 21);
}

#[test]
fn hprocess_rows_are_symmetric_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["hprocess"], &configs().join("z_drift_doob.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(dir.path().join("hprocess.json"));
    assert_eq!(rep["weight_mode"], "exact");
    assert_eq!(rep["symmetric"], true);
    for row in rep["rows"].as_array().unwrap() {
        assert_eq!(row["mass"], "1");
        for t in row["targets"].as_array().unwrap() {
            assert_eq!(t["probability"], "1/2");
        }
    }
    assert!(rep["diagonal"]["max_relative_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn bernoulli_tail_decays() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["bernoulli"], &configs().join("bernoulli.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(dir.path().join("bernoulli.json"));
    assert!(rep["upper"]["fitted_delta"].as_f64().unwrap() > 0.0);
    assert_eq!(rep["passed"], true);
    let rows = csv_rows(dir.path().join("bernoulli_tail.csv"));
    assert_eq!(rows.len(), 2 * 451);
    for row in rows {
        let (t, b): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        assert!(t <= b * (1.0 + 1e-12));
    }
}

#[test]
fn chain_matches_power_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let r = walklab(&["chain"], &configs().join("chain.json"), dir.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = report(dir.path().join("chain.json"));
    assert!(rep["eigenvalue_gap"].as_f64().unwrap() < 1e-6);
    let reducible = write_config(dir.path(), r#"{"matrix": [[0.5, 0.5], [0.0, 0.9]]}"#);
    assert_eq!(walklab(&["chain"], &reducible, dir.path()).code, 2);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["spectral", "ratio"] {
        let cfg = configs().join("z_lazy_drift.json");
        assert_eq!(walklab(&[cmd, "--nmax", "500"], &cfg, a.path()).code, 0);
        assert_eq!(walklab(&[cmd, "--nmax", "500"], &cfg, b.path()).code, 0);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}
