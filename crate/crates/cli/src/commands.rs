//! The subcommands, independent of argument parsing.
//!
//! Each returns the text to print plus whether the run counts as a success.

use std::fmt::Write as _;
use std::path::Path;

use holonomic_core::adiabatic::{simulate_holonomy, HamiltonianSchedule, LEAKAGE_FAILURE};
use holonomic_core::bloch::{mode_loops, SOLID_ANGLE_CONVENTION};
use holonomic_core::extremal::{constraint_residual, ExtremalCurve};
use holonomic_core::holonomy::{
    convergence_order, lifted_holonomy, ordered_product_holonomy, reference_twist, transport_error,
    twisted_path, TOL_LOOP,
};
use holonomic_core::matcore::{frobenius_norm, CMatrix};
use holonomic_core::synthesis::{boundary_conditions, synthesize_with, SynthesisOptions, CATALOG};
use holonomic_core::{Error, StiefelFrame};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::report::{Provenance, ReportFile};
use crate::spec::GateSpecFile;

/// Leakage above this sets the leakage flag of a sweep row.
pub const LEAKAGE_FLAG: f64 = 1e-2;
/// Adiabatic parameter above this marks a row as diabatic.
pub const DIABATIC_FLAG: f64 = 0.1;
/// Constraint residual above this marks a stored X as off the extremal family.
pub const CONSTRAINT_FLAG: f64 = 1e-10;
pub const DEFAULT_VERIFY_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub text: String,
    pub success: bool,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub struct SynthesizeArgs<'a> {
    pub spec: &'a Path,
    pub output: &'a Path,
    pub phases: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
}

pub fn synthesize(args: &SynthesizeArgs) -> CliResult<CommandOutput> {
    let bytes = read_bytes(args.spec)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Parse(format!("{}: not UTF-8", args.spec.display())))?;
    let spec = GateSpecFile::parse(&text)?.resolve()?;
    let options = SynthesisOptions {
        phases: args.phases.clone().or(spec.phases),
        tolerance: args.tolerance.unwrap_or(spec.tolerance),
        ambient_dim: None,
    };
    if !(options.tolerance > 0.0 && options.tolerance.is_finite()) {
        return Err(CliError::Parse(format!(
            "--tol must be positive, got {}",
            options.tolerance
        )));
    }
    let report = match synthesize_with(&spec.gate, &options) {
        Ok(r) => r,
        Err(Error::Verification { report, .. }) => *report,
        Err(e) => return Err(CliError::input("synthesis", e)),
    };
    let provenance = Provenance {
        tool: "holonomic".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input_sha256: sha256_hex(&bytes),
        created: timestamp(),
    };
    let file = ReportFile::from_synthesis(&report, provenance);
    file.write(args.output)?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "gate            {} (k = {})",
        file.label(),
        report.gate.dim()
    );
    let _ = writeln!(out, "length          {:.17e}", report.length);
    let _ = writeln!(out, "closure error   {:.3e}", report.closure_error);
    let _ = writeln!(out, "holonomy error  {:.3e}", report.holonomy_error);
    let _ = writeln!(out, "tolerance       {:.1e}", report.tolerance);
    let _ = writeln!(
        out,
        "verification    {}",
        if report.succeeded() { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(out, "report          {}", args.output.display());
    Ok(CommandOutput {
        text: out,
        success: report.succeeded(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMethod {
    OrderedProduct,
    LiftedOde,
    All,
}

impl VerifyMethod {
    fn includes(self, other: VerifyMethod) -> bool {
        self == VerifyMethod::All || self == other
    }
}

pub struct VerifyArgs<'a> {
    pub report: &'a Path,
    pub steps: usize,
    pub method: VerifyMethod,
    pub tolerance: f64,
}

/// One method's numbers at n and 2n samples.
#[derive(Clone, Debug)]
pub struct MethodCheck {
    pub name: &'static str,
    /// Holonomy error on the loop at n samples.
    pub error: f64,
    /// The errors whose ratio defines the order.
    pub order_errors: (f64, f64),
    pub order: Option<f64>,
}

fn order_of(e: (f64, f64)) -> Option<f64> {
    // Below this the errors are roundoff and carry no rate.
    if e.0 <= 1e-13 || e.1 <= 1e-13 {
        None
    } else {
        Some(convergence_order(e.0, e.1))
    }
}

fn check_ordered_product(
    curve: &ExtremalCurve,
    expected: &CMatrix,
    n: usize,
) -> CliResult<MethodCheck> {
    let twist = reference_twist(curve.controller().gate_dim());
    let run = |samples: usize| -> CliResult<(f64, f64)> {
        let path = curve
            .sample(samples)
            .map_err(|e| CliError::input("sampling", e))?;
        let plain =
            ordered_product_holonomy(&path).map_err(|e| CliError::input("ordered product", e))?;
        let twisted = twisted_path(&path, &twist).map_err(|e| CliError::input("gauge twist", e))?;
        let twisted = ordered_product_holonomy(&twisted)
            .map_err(|e| CliError::input("ordered product", e))?;
        Ok((
            plain.error_against(expected),
            twisted.error_against(expected),
        ))
    };
    let (coarse, fine) = (run(n)?, run(2 * n)?);
    let order_errors = (coarse.1, fine.1);
    Ok(MethodCheck {
        name: "ordered_product",
        error: coarse.0,
        order_errors,
        order: order_of(order_errors),
    })
}

fn check_lift(curve: &ExtremalCurve, expected: &CMatrix, n: usize) -> CliResult<MethodCheck> {
    let run = |samples: usize| -> CliResult<(f64, f64)> {
        let path = curve
            .sample(samples)
            .map_err(|e| CliError::input("sampling", e))?;
        let (report, lifted) = lifted_holonomy(&path.projector_path(), path.first(), TOL_LOOP)
            .map_err(|e| CliError::input("horizontal lift", e))?;
        Ok((
            report.error_against(expected),
            transport_error(&lifted, expected),
        ))
    };
    let (coarse, fine) = (run(n)?, run(2 * n)?);
    let order_errors = (coarse.1, fine.1);
    Ok(MethodCheck {
        name: "lifted_ode",
        error: coarse.0,
        order_errors,
        order: order_of(order_errors),
    })
}

pub fn verify(args: &VerifyArgs) -> CliResult<CommandOutput> {
    if args.steps < 3 {
        return Err(CliError::Parse(format!(
            "--steps must be at least 3, got {}",
            args.steps
        )));
    }
    let file = ReportFile::read(args.report)?;
    let gate = file.gate()?;
    let controller = file.controller()?;
    let stored_x = file.stored_x()?;
    let k = controller.gate_dim();
    let v0 = StiefelFrame::canonical(2 * k, k);
    let residual = constraint_residual(&stored_x, &v0);
    let x_mismatch = frobenius_norm(&(stored_x.as_matrix() - controller.x().as_matrix()));
    let (closure, holonomy) =
        boundary_conditions(&controller).map_err(|e| CliError::input("report", e))?;
    let analytic_error = frobenius_norm(&(&holonomy - gate.matrix()));
    let curve = ExtremalCurve::new(controller).map_err(|e| CliError::input("report", e))?;

    let mut checks = Vec::new();
    if args.method.includes(VerifyMethod::OrderedProduct) {
        checks.push(check_ordered_product(&curve, gate.matrix(), args.steps)?);
    }
    if args.method.includes(VerifyMethod::LiftedOde) {
        checks.push(check_lift(&curve, gate.matrix(), args.steps)?);
    }

    let constraint_ok = residual <= CONSTRAINT_FLAG;
    let analytic_ok = closure <= args.tolerance && analytic_error <= args.tolerance;
    let mut success = constraint_ok && analytic_ok;
    let mut out = String::new();
    let _ = writeln!(out, "report              {} (k = {k})", file.label());
    let _ = writeln!(
        out,
        "constraint residual {residual:.3e} {}",
        if constraint_ok {
            "ok"
        } else {
            "FLAGGED: stored X has Z != 0"
        }
    );
    if x_mismatch > 0.0 {
        let _ = writeln!(
            out,
            "stored X differs from [[Omega, W], [-W^+, 0]] by {x_mismatch:.3e}"
        );
    }
    let _ = writeln!(
        out,
        "analytic            closure {closure:.3e}, holonomy error {analytic_error:.3e}"
    );
    let _ = writeln!(
        out,
        "{:<16} {:>7} {:>11} {:>11} {:>11} {:>7}  result",
        "method", "n", "error", "rate e(n)", "rate e(2n)", "order"
    );
    for c in &checks {
        let ok = c.error <= args.tolerance;
        success &= ok;
        let order = c.order.map_or("n/a".to_string(), |p| format!("{p:.3}"));
        let _ = writeln!(
            out,
            "{:<16} {:>7} {:>11.3e} {:>11.3e} {:>11.3e} {:>7}  {}",
            c.name,
            args.steps,
            c.error,
            c.order_errors.0,
            c.order_errors.1,
            order,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        out,
        "rates: ordered_product on the gauge-twisted sampling V(t)exp(t*Omega_ref); lifted_ode by |V_lift(T) - V(0)Gamma|"
    );
    let _ = writeln!(
        out,
        "verification        {}",
        if success { "PASS" } else { "FAIL" }
    );
    Ok(CommandOutput { text: out, success })
}

pub struct SimulateArgs<'a> {
    pub report: &'a Path,
    pub t_totals: Vec<f64>,
    pub gap: f64,
    pub steps: Option<usize>,
    pub csv: Option<&'a Path>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub t_total: f64,
    pub steps: usize,
    pub holonomy_error: f64,
    pub leakage: f64,
    pub adiabatic_parameter: f64,
}

impl SweepRow {
    pub fn leakage_flag(&self) -> bool {
        self.leakage > LEAKAGE_FLAG
    }

    pub fn diabatic_flag(&self) -> bool {
        self.adiabatic_parameter > DIABATIC_FLAG
    }

    pub fn hard_failure(&self) -> bool {
        self.leakage > LEAKAGE_FAILURE
    }
}

pub fn sweep(
    file: &ReportFile,
    t_totals: &[f64],
    gap: f64,
    steps: Option<usize>,
) -> CliResult<Vec<SweepRow>> {
    let gate = file.gate()?;
    let curve = ExtremalCurve::new(file.controller()?).map_err(|e| CliError::input("report", e))?;
    t_totals
        .par_iter()
        .map(|&t| {
            let schedule = HamiltonianSchedule::with_gap(curve.clone(), gap, t)
                .map_err(|e| CliError::input("schedule", e))?;
            // 40 steps per guard-limited step keeps the integrator error well
            // below the adiabatic error being measured.
            let n = steps.unwrap_or(0).max(40 * schedule.required_steps());
            let sim =
                simulate_holonomy(&schedule, n).map_err(|e| CliError::input("simulation", e))?;
            let eta = schedule
                .adiabatic_parameter(201)
                .map_err(|e| CliError::input("simulation", e))?;
            Ok(SweepRow {
                t_total: t,
                steps: n,
                holonomy_error: sim.error_against(gate.matrix()),
                leakage: sim.leakage,
                adiabatic_parameter: eta,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: &str =
    "t_total,steps,holonomy_error,leakage,adiabatic_parameter,leakage_flag,diabatic_flag,hard_failure";

fn csv_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# leakage_flag: leakage > {LEAKAGE_FLAG:e}; diabatic_flag: max|dP/ds|/(gap*T) > {DIABATIC_FLAG}; hard_failure: leakage > {LEAKAGE_FAILURE}");
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_real(r.t_total),
            r.steps,
            csv_real(r.holonomy_error),
            csv_real(r.leakage),
            csv_real(r.adiabatic_parameter),
            r.leakage_flag() as u8,
            r.diabatic_flag() as u8,
            r.hard_failure() as u8
        );
    }
    out
}

pub fn simulate(args: &SimulateArgs) -> CliResult<CommandOutput> {
    if args.t_totals.is_empty() {
        return Err(CliError::Parse("--T-total needs at least one value".into()));
    }
    if let Some(bad) = args.t_totals.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::Parse(format!(
            "--T-total values must be positive, got {bad}"
        )));
    }
    if !(args.gap > 0.0 && args.gap.is_finite()) {
        return Err(CliError::Parse(format!(
            "--gap must be positive, got {}",
            args.gap
        )));
    }
    let file = ReportFile::read(args.report)?;
    let rows = sweep(&file, &args.t_totals, args.gap, args.steps)?;
    if let Some(path) = args.csv {
        std::fs::write(path, sweep_csv(&rows)).map_err(|e| CliError::io(path, e))?;
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "report {} (k = {}), gap {}",
        file.label(),
        file.gate.k,
        args.gap
    );
    let _ = writeln!(
        out,
        "{:>10} {:>8} {:>12} {:>12} {:>10}  flags",
        "T_total", "steps", "error", "leakage", "eta"
    );
    for r in &rows {
        let mut flags = Vec::new();
        if r.hard_failure() {
            flags.push("HARD-FAILURE");
        } else if r.leakage_flag() {
            flags.push("leakage");
        }
        if r.diabatic_flag() {
            flags.push("diabatic");
        }
        let _ = writeln!(
            out,
            "{:>10} {:>8} {:>12.4e} {:>12.4e} {:>10.4}  {}",
            r.t_total,
            r.steps,
            r.holonomy_error,
            r.leakage,
            r.adiabatic_parameter,
            if flags.is_empty() {
                "-".to_string()
            } else {
                flags.join(",")
            }
        );
    }
    Ok(CommandOutput {
        text: out,
        success: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Frames,
    Projectors,
    Bloch,
}

pub struct ExportArgs<'a> {
    pub report: &'a Path,
    pub samples: usize,
    pub what: CurveKind,
}

fn push_matrix_header(header: &mut Vec<String>, prefix: &str, rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..cols {
            header.push(format!("{prefix}_{i}_{j}_re"));
            header.push(format!("{prefix}_{i}_{j}_im"));
        }
    }
}

fn push_matrix(row: &mut Vec<String>, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            row.push(csv_real(m[(i, j)].re));
            row.push(csv_real(m[(i, j)].im));
        }
    }
}

/// CSV text of the sampled curve.
pub fn export_curve(args: &ExportArgs) -> CliResult<String> {
    if args.samples < 2 {
        return Err(CliError::Parse(format!(
            "--samples must be at least 2, got {}",
            args.samples
        )));
    }
    let file = ReportFile::read(args.report)?;
    let curve = ExtremalCurve::new(file.controller()?).map_err(|e| CliError::input("report", e))?;
    let path = curve
        .sample(args.samples)
        .map_err(|e| CliError::input("sampling", e))?;
    let k = curve.controller().gate_dim();
    let n = 2 * k;
    let mut lines = Vec::with_capacity(args.samples + 2);
    match args.what {
        CurveKind::Frames | CurveKind::Projectors => {
            let mut header = vec!["t".to_string()];
            if args.what == CurveKind::Frames {
                push_matrix_header(&mut header, "v", n, k);
            } else {
                push_matrix_header(&mut header, "p", n, n);
            }
            lines.push(header.join(","));
            for (t, v) in path.times().iter().zip(path.frames()) {
                let mut row = vec![csv_real(*t)];
                if args.what == CurveKind::Frames {
                    push_matrix(&mut row, v.matrix());
                } else {
                    push_matrix(&mut row, v.project().matrix());
                }
                lines.push(row.join(","));
            }
        }
        CurveKind::Bloch => {
            let spectrum = file.spectrum()?;
            let modes = mode_loops(&curve, &spectrum.r, &spectrum.gammas, args.samples)
                .map_err(|e| CliError::input("bloch", e))?;
            lines.push(format!("# {SOLID_ANGLE_CONVENTION}"));
            let mut header = vec!["t".to_string()];
            for m in &modes {
                let j = m.mode;
                for col in ["x", "y", "z", "solid_angle", "ratio_to_2gamma"] {
                    header.push(format!("mode{j}_{col}"));
                }
            }
            lines.push(header.join(","));
            for (i, t) in path.times().iter().enumerate() {
                let mut row = vec![csv_real(*t)];
                for m in &modes {
                    let p = m.points[i];
                    let angle = m.solid_angle[i];
                    let ratio = if m.gamma == 0.0 {
                        f64::NAN
                    } else {
                        angle.abs() / (2.0 * m.gamma)
                    };
                    row.extend([p[0], p[1], p[2], angle, ratio].map(csv_real));
                }
                lines.push(row.join(","));
            }
        }
    }
    let mut text = lines.join("\n");
    text.push('\n');
    Ok(text)
}

pub fn catalog() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:<10} description", "name", "params");
    for e in CATALOG {
        let params = if e.parameters.is_empty() {
            "-"
        } else {
            e.parameters
        };
        let _ = writeln!(out, "{:<12} {:<10} {}", e.name, params, e.description);
    }
    out
}
