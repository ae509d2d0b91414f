//! End-to-end checks of the `holonomic` binary, shared by the integration
//! tests and the acceptance suite.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use holonomic_cli::report::{Real, ReportFile};

pub const CATALOG_FIXTURES: &[&str] = &[
    "identity",
    "phase",
    "phase-shift",
    "hadamard",
    "pauli-x",
    "cnot",
    "dft",
    "matrix",
];

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_holonomic"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Blanks the one field allowed to differ between runs.
pub fn mask_timestamp(text: &str) -> String {
    text.lines()
        .map(|l| {
            if l.trim_start().starts_with("\"created\":") {
                "    \"created\": \"<masked>\""
            } else {
                l
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn synthesize(spec: &Path, out: &Path) -> Run {
    run([
        "synthesize".as_ref(),
        spec.as_os_str(),
        "-o".as_ref(),
        out.as_os_str(),
    ])
}

/// Golden comparison, determinism, round trip and verify for every catalog
/// fixture, then each documented exit code. With `UPDATE_GOLDEN` set, golden
/// files are rewritten instead of compared.
pub fn contract_checks() -> Vec<Check> {
    let dir = tempfile::tempdir().expect("temp dir");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut checks = Vec::new();

    for name in CATALOG_FIXTURES {
        let spec = fixture(&format!("{name}.toml"));
        let (a, b) = (
            dir.path().join(format!("{name}-a.json")),
            dir.path().join(format!("{name}-b.json")),
        );
        let first = synthesize(&spec, &a);
        let second = synthesize(&spec, &b);
        if first.code != 0 || second.code != 0 {
            checks.push(check(
                format!("{name}: synthesize"),
                false,
                format!("exit {} / {}: {}", first.code, second.code, first.stderr),
            ));
            continue;
        }
        let text_a = std::fs::read_to_string(&a).expect("report a");
        let text_b = std::fs::read_to_string(&b).expect("report b");
        checks.push(check(
            format!("{name}: determinism"),
            mask_timestamp(&text_a) == mask_timestamp(&text_b),
            "two runs identical apart from the timestamp",
        ));

        let golden_path = golden(&format!("{name}.json"));
        if update {
            std::fs::write(&golden_path, mask_timestamp(&text_a) + "\n").expect("write golden");
        }
        let expected = std::fs::read_to_string(&golden_path).unwrap_or_default();
        checks.push(check(
            format!("{name}: golden"),
            mask_timestamp(&expected) == mask_timestamp(&text_a),
            format!("{}", golden_path.display()),
        ));

        let round_trip = ReportFile::from_json(&text_a).map(|r| r.to_json());
        checks.push(check(
            format!("{name}: round trip"),
            round_trip.as_deref().ok() == Some(text_a.as_str()),
            "read -> write reproduces the bytes",
        ));

        let verify = run([
            "verify".as_ref(),
            a.as_os_str(),
            "--steps".as_ref(),
            "500".as_ref(),
        ]);
        checks.push(check(
            format!("{name}: verify"),
            verify.code == 0,
            format!("exit {}", verify.code),
        ));
    }

    let out = dir.path().join("err.json");
    let cases: [(&str, Run, i32, &str); 5] = [
        (
            "non-unitary matrix",
            synthesize(&fixture("non_unitary.toml"), &out),
            2,
            "residual",
        ),
        (
            "malformed TOML",
            synthesize(&fixture("malformed.toml"), &out),
            2,
            "line 2",
        ),
        (
            "unknown gate",
            synthesize(&fixture("unknown.toml"), &out),
            2,
            "toffoli",
        ),
        (
            "missing spec",
            synthesize(&fixture("absent.toml"), &out),
            4,
            "absent.toml",
        ),
        (
            "unwritable output",
            synthesize(&fixture("cnot.toml"), &dir.path().join("no/such/dir.json")),
            4,
            "dir.json",
        ),
    ];
    for (name, r, code, needle) in cases {
        checks.push(check(
            format!("exit {code}: {name}"),
            r.code == code && r.stderr.contains(needle),
            format!("exit {}, stderr {:?}", r.code, r.stderr.trim()),
        ));
    }

    let strict = run([
        "synthesize".as_ref(),
        fixture("dft.toml").as_os_str(),
        "-o".as_ref(),
        out.as_os_str(),
        "--tol".as_ref(),
        "1e-300".as_ref(),
    ]);
    let written = ReportFile::read(&out)
        .map(|r| !r.verification.passed)
        .unwrap_or(false);
    checks.push(check(
        "exit 3: synthesis tolerance not met",
        strict.code == 3 && written,
        format!("exit {}, failing report written: {written}", strict.code),
    ));

    let cnot = dir.path().join("cnot-a.json");
    let tampered = dir.path().join("tampered.json");
    if let Ok(mut report) = ReportFile::read(&cnot) {
        let k = report.gate.k;
        report.controller.x[k][k][1] = Real(0.5);
        report.controller.x[k][k][0] = Real(0.0);
        let _ = report.write(&tampered);
    }
    let r = run([
        "verify".as_ref(),
        tampered.as_os_str(),
        "--steps".as_ref(),
        "200".as_ref(),
    ]);
    checks.push(check(
        "exit 3: tampered X",
        r.code == 3 && r.stdout.contains("FLAGGED"),
        format!("exit {}", r.code),
    ));

    let corrupt = dir.path().join("corrupt.json");
    let text = std::fs::read_to_string(&cnot).unwrap_or_default();
    let _ = std::fs::write(&corrupt, text.replacen("(1.0)", "(1.5)", 1));
    let r = run(["verify".as_ref(), corrupt.as_os_str()]);
    checks.push(check(
        "exit 2: corrupted report",
        r.code == 2 && r.stderr.contains("disagree"),
        format!("exit {}", r.code),
    ));

    let r = run(["frobnicate"]);
    checks.push(check(
        "exit 2: unknown subcommand",
        r.code == 2,
        format!("exit {}", r.code),
    ));
    checks
}
