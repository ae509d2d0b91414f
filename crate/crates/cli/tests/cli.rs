use std::f64::consts::PI;

use holonomic_cli::commands::{sweep, SWEEP_HEADER};
use holonomic_cli::report::ReportFile;

mod common;
use common::{fixture, run};

fn report_for(dir: &tempfile::TempDir, name: &str) -> std::path::PathBuf {
    let out = dir.path().join(format!("{name}.json"));
    let r = run([
        "synthesize".as_ref(),
        fixture(&format!("{name}.toml")).as_os_str(),
        "-o".as_ref(),
        out.as_os_str(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    out
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn contract() {
    let failures: Vec<String> = common::contract_checks()
        .into_iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn cnot_report_length() {
    let dir = tempfile::tempdir().unwrap();
    let report = ReportFile::read(&report_for(&dir, "cnot")).unwrap();
    assert!((report.length.0 - PI).abs() <= 1e-10);
    let id = ReportFile::read(&report_for(&dir, "identity")).unwrap();
    assert_eq!(id.length.0, 0.0);
}

#[test]
fn verify_cnot_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cnot = report_for(&dir, "cnot");
    let r = run([
        "verify".as_ref(),
        cnot.as_os_str(),
        "--method".as_ref(),
        "ordered_product".as_ref(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let row = r
        .stdout
        .lines()
        .find(|l| l.starts_with("ordered_product"))
        .unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    let error: f64 = cols[2].parse().unwrap();
    let order: f64 = cols[5].parse().unwrap();
    assert!(error <= 1e-4);
    assert!((1.8..=2.2).contains(&order), "{order}");

    let id = report_for(&dir, "identity");
    for steps in ["3", "50", "2000"] {
        let r = run([
            "verify".as_ref(),
            id.as_os_str(),
            "--steps".as_ref(),
            steps.as_ref(),
            "--tol".as_ref(),
            "1e-12".as_ref(),
        ]);
        assert_eq!(r.code, 0, "{}", r.stdout);
    }
}

#[test]
fn simulate_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let phase = report_for(&dir, "phase");
    let csv = dir.path().join("sweep.csv");
    let r = run([
        "simulate".as_ref(),
        phase.as_os_str(),
        "--T-total".as_ref(),
        "0.5,25,50,100,200".as_ref(),
        "--csv".as_ref(),
        csv.as_os_str(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().any(|l| l == SWEEP_HEADER));
    let rows = csv_rows(&text);
    let errors: Vec<f64> = rows[1..].iter().map(|r| r[2]).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    // The fast row: barely any leakage (the state has no time to move) but
    // flagged as diabatic, with a large holonomy error.
    assert_eq!(rows[0][6], 1.0);
    assert!(rows[0][2] > 1.0);

    let id = ReportFile::read(&report_for(&dir, "identity")).unwrap();
    for row in sweep(&id, &[0.5, 25.0, 50.0], 1.0, None).unwrap() {
        assert!(row.holonomy_error <= 1e-9 && row.leakage <= 1e-9);
    }
}

#[test]
fn simulate_marks_hard_failures_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let phase = ReportFile::read(&report_for(&dir, "phase")).unwrap();
    let rows = sweep(&phase, &[6.0, 50.0], 1.0, None).unwrap();
    assert!(rows[0].hard_failure());
    assert!(!rows[1].hard_failure());
}

#[test]
fn export_bloch_and_frames() {
    let dir = tempfile::tempdir().unwrap();
    let phase = report_for(&dir, "phase");
    let r = run([
        "export-curve".as_ref(),
        phase.as_os_str(),
        "--samples".as_ref(),
        "2000".as_ref(),
        "--what".as_ref(),
        "bloch".as_ref(),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("# solid angle"));
    let last = csv_rows(&r.stdout).pop().unwrap();
    assert!((last[4].abs() - 2.0 * PI).abs() <= 0.01 * 2.0 * PI);
    assert!((last[5] - 1.0).abs() <= 0.01);

    let id = report_for(&dir, "identity");
    let r = run([
        "export-curve".as_ref(),
        id.as_os_str(),
        "--what".as_ref(),
        "bloch".as_ref(),
    ]);
    for row in csv_rows(&r.stdout) {
        assert_eq!(row[4], 0.0);
        assert_eq!(row[9], 0.0);
    }

    let out = dir.path().join("frames.csv");
    let r = run([
        "export-curve".as_ref(),
        phase.as_os_str(),
        "--samples".as_ref(),
        "2".as_ref(),
        "-o".as_ref(),
        out.as_os_str(),
    ]);
    assert_eq!(r.code, 0);
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], vec![0.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(rows[1][0], 1.0);
    assert!((rows[1][1] + 1.0).abs() < 1e-15 && rows[1][4].abs() < 1e-15);
}

#[test]
fn catalog_lists_every_gate() {
    let r = run(["catalog"]);
    assert_eq!(r.code, 0);
    for name in ["identity", "phase", "hadamard", "cnot", "dft"] {
        assert!(r.stdout.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
