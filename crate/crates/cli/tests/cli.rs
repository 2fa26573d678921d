//! End-to-end runs of the `hubbard-pt` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubbard-pt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

#[test]
fn sweep_single_point() {
    let out = ok(&["sweep", "--lambdas", "0.05"]);
    assert_eq!(
        header(&out),
        "lambda,exact_ground_delta,pt_first,pt_second,pt_total,e1_oracle,e1_est,e1_rel_err,\
         e2_oracle,e2_est,e2_rel_err,e2_sign_ambiguous,psi1_rel_err,success_prob,rus_attempts"
    );
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    let e2_err: f64 = r[0][10].parse().unwrap();
    assert!(e2_err < 0.05, "{e2_err}");
}

#[test]
fn sweep_rows_are_sorted() {
    let out = ok(&["sweep", "--lambdas", "0.1,0.02,0.05"]);
    let l: Vec<f64> = rows(&out).iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(l, vec![0.02, 0.05, 0.1]);
}

#[test]
fn shots_without_seed_is_a_config_error() {
    let o = run(&["sweep", "--readout", "shots"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn bad_config_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"lamda": 0.1}"#).unwrap();
    let o = run(&["oracle", "--config", typo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(run(&["oracle", "--config", broken.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["oracle", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(run(&["oracle", "--t", "-1"]).status.code(), Some(2));
}

#[test]
fn config_file_values_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"w": 0.4, "k": 0}"#).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["oracle", "--config", p.to_str().unwrap()])).unwrap();
    assert!((v["lambda"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    // Flags win over the file.
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["oracle", "--config", p.to_str().unwrap(), "--w", "2"])).unwrap();
    assert!((v["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn oracle_at_unit_parameters() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["oracle"])).unwrap();
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 6);
    let degs: Vec<u64> = levels.iter().map(|l| l["degeneracy"].as_u64().unwrap()).collect();
    assert_eq!(degs, vec![1, 2, 6, 3, 3, 1]);
    let root17 = 17f64.sqrt();
    assert!((v["e_gs"].as_f64().unwrap() - (1.0 - root17) / 2.0).abs() < 1e-12);
    assert!((v["e_h"].as_f64().unwrap() - (1.0 + root17) / 2.0).abs() < 1e-12);
    assert_eq!(v["coefficients"]["psi1"].as_array().unwrap().len(), 16);
}

#[test]
fn zero_coupling_gives_zero_corrections() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["oracle", "--w", "0"])).unwrap();
    assert_eq!(v["scaled"]["e1"].as_f64().unwrap(), 0.0);
    assert_eq!(v["scaled"]["e2"].as_f64().unwrap(), 0.0);
    for p in v["scaled"]["psi1"].as_array().unwrap() {
        assert_eq!(p[0].as_f64().unwrap().abs(), 0.0);
    }
}

#[test]
fn degenerate_target_exits_3() {
    let o = run(&["oracle", "--k", "11"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
    assert!(o.stdout.is_empty());
}

#[test]
fn calibration_matches_prediction() {
    let r = rows(&ok(&["calibrate"]));
    assert_eq!(r.len(), 6);
    for row in &r {
        let measured: f64 = row[3].parse().unwrap();
        let predicted: f64 = row[4].parse().unwrap();
        assert!((measured - predicted).abs() < 1e-10, "{row:?}");
    }
    let target: f64 = r[0][3].parse().unwrap();
    assert!(target.abs() < 1e-24);
    let nearest: f64 = r[1][3].parse().unwrap();
    assert!((nearest - 1.0).abs() < 1e-12);
}

#[test]
fn calibration_with_shots() {
    let r = rows(&ok(&["calibrate", "--readout", "shots", "--seed", "5", "--shots", "20000"]));
    for row in &r {
        let measured: f64 = row[3].parse().unwrap();
        let predicted: f64 = row[4].parse().unwrap();
        let sigma: f64 = row[5].parse().unwrap();
        assert!((measured - predicted).abs() <= 3.0 * sigma + 1e-12, "{row:?}");
    }
}

#[test]
fn qasm_export() {
    let q = ok(&["export-qasm"]);
    assert!(q.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
    assert!(q.contains("qreg q[4];"));
    let n = ok(&["export-qasm", "--circuit", "u_e", "--compile", "naive"]);
    assert!(!n.contains("ccx"));
    assert!(ok(&["export-qasm", "--circuit", "u_dis"]).contains("qreg q[4];"));
}

#[test]
fn qasm_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("psi1.qasm");
    let out = ok(&["export-qasm", "-o", p.to_str().unwrap()]);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(&p).unwrap().starts_with("OPENQASM 2.0;"));
}

#[test]
fn census_is_within_bands() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["census"])).unwrap();
    assert_eq!(v["within_bands"], serde_json::Value::Bool(true));
    // The difference-mode state circuit is wider than the tree.
    assert!(v["optimized_violations"].is_null());
    let u: serde_json::Value = serde_json::from_str(&ok(&["census", "--circuit", "u_e"])).unwrap();
    assert_eq!(u["optimized_violations"].as_u64(), Some(0));
    assert!(u["naive_violations"].as_u64().is_some());
    assert!(u["within_bands"].is_null());
    let naive = v["naive"]["two_qubit"].as_u64().unwrap();
    let opt = v["optimized"]["two_qubit"].as_u64().unwrap();
    assert!(opt < naive);
}

#[test]
fn noiseless_run_reproduces_ideal() {
    let r = rows(&ok(&["noise-run", "--no-noise", "--trajectories", "1"]));
    assert!(!r.is_empty());
    for row in &r {
        let ideal: f64 = row[2].parse().unwrap();
        let naive: f64 = row[3].parse().unwrap();
        let opt: f64 = row[4].parse().unwrap();
        assert!((ideal - naive).abs() < 1e-12 && (ideal - opt).abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn optimized_compilation_is_closer_under_noise() {
    let out = ok(&["noise-run", "--seed", "11", "--trajectories", "150"]);
    let mut seen = std::collections::BTreeSet::new();
    for row in rows(&out) {
        if seen.insert(row[0].clone()) {
            let tv_naive: f64 = row[5].parse().unwrap();
            let tv_opt: f64 = row[6].parse().unwrap();
            assert!(tv_opt < tv_naive, "{}: {tv_opt} vs {tv_naive}", row[0]);
        }
    }
    assert!(seen.len() >= 2);
    assert_eq!(run(&["noise-run"]).status.code(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let a = ["sweep", "--lambdas", "0.1,0.2", "--readout", "shots", "--seed", "9", "--shots", "4000"];
    assert_eq!(ok(&a), ok(&a));
    let b = ["noise-run", "--seed", "3", "--trajectories", "20"];
    assert_eq!(ok(&b), ok(&b));
    let c = ["sweep", "--lambdas", "0.1", "--readout", "shots", "--seed", "10", "--shots", "4000"];
    assert_ne!(ok(&a), ok(&c));
}
