use std::path::{Path, PathBuf};
use std::process::Command;

use synthcs::harness::{ExperimentConfig, TrialRecord, TRIALS_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synthcs"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_parse() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 7);
}

#[test]
fn phase_run_writes_results_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    std::fs::write(
        &cfg,
        r#"{"name":"tiny","kind":"phase","n":20,"d":20,"s":2,"m_grid":[6,14],
            "ensembles":[{"kind":"gaussian"},{"kind":"laplace"}],"trials_per_cell":3}"#,
    )
    .unwrap();
    let out = dir.path().join("res");
    let st = bin()
        .args(["phase", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "2", "--seed", "77"])
        .status()
        .unwrap();
    assert!(st.success());
    let csv = std::fs::read_to_string(out.join("tiny/trials.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(TRIALS_HEADER));
    assert_eq!(csv.lines().skip(1).filter_map(TrialRecord::parse_csv_row).count(), 12);
    let saved = ExperimentConfig::load(&out.join("tiny/config.json")).unwrap();
    assert_eq!(saved.master_seed, 77);
    let rep = bin().arg("report").arg("--out").arg(&out).output().unwrap();
    assert!(rep.status.success());
    assert!(String::from_utf8(rep.stdout).unwrap().contains("tiny (phase)"));
}

#[test]
fn matrix_solve_and_certify() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let st = bin()
        .args(["gen-matrix", "--law", "gaussian", "--rows", "10", "--cols", "20", "--seed", "5", "--out"])
        .arg(&a)
        .status()
        .unwrap();
    assert!(st.success());
    let mat = synthcs::matcore::Mat::load(&a).unwrap();
    let mut x0 = vec![0.0; 20];
    x0[3] = 1.0;
    x0[11] = -0.5;
    let y = mat.matvec(&x0);
    let yp = dir.path().join("y.txt");
    std::fs::write(&yp, y.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")).unwrap();
    let out = bin().arg("solve").arg("--matrix").arg(&a).arg("--y").arg(&yp).output().unwrap();
    assert!(out.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let x: Vec<f64> = serde_json::from_value(rep["x_hat"].clone()).unwrap();
    let err: f64 = x.iter().zip(&x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(err < 1e-6, "err {err}");

    let out = bin().arg("nsp-cert").arg("--matrix").arg(&a).args(["--s", "1"]).output().unwrap();
    assert!(out.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["lp_count"], 40);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"phase","n":8,"d":8,"s":1,"m_grid":[4],"typo":true}"#).unwrap();
    let st = bin().arg("phase").arg("--config").arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let missing = bin().args(["noise", "--config", "/nonexistent.json"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));
    let wrong_kind = dir.path().join("phase.json");
    std::fs::write(&wrong_kind, r#"{"kind":"phase","n":8,"d":8,"s":1,"m_grid":[4]}"#).unwrap();
    let st = bin().arg("noise").arg("--config").arg(&wrong_kind).status().unwrap();
    assert_eq!(st.code(), Some(2));
    assert_eq!(bin().arg("no-such-command").status().unwrap().code(), Some(2));
}
