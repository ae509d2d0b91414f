use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use holonomic_cli::commands::{self, CurveKind, VerifyMethod};
use holonomic_cli::{CliError, EXIT_IO, EXIT_VERIFICATION};

/// Minimum-length holonomic gate synthesis and verification.
///
/// Exit status: 0 success, 2 invalid input, 3 verification failure, 4 I/O error.
#[derive(Parser)]
#[command(name = "holonomic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a controller for the gate in a TOML spec and write a report.
    Synthesize {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Comma-separated phi_j, one per mode; overrides the spec file.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phases: Option<Vec<f64>>,
        /// Acceptance tolerance on closure and holonomy errors.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Recompute the holonomy of a report's loop numerically.
    Verify {
        report: PathBuf,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        #[arg(long, default_value_t = commands::DEFAULT_VERIFY_TOL)]
        tol: f64,
    },
    /// Schrödinger evolution along the loop for a sweep of traversal times.
    Simulate {
        report: PathBuf,
        #[arg(
            long = "T-total",
            alias = "t-total",
            value_delimiter = ',',
            default_value = "25,50,100,200"
        )]
        t_total: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
        /// Minimum step count; raised automatically to 40x the stability bound.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample the loop and write it as CSV.
    ExportCurve {
        report: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = WhatArg::Frames)]
        what: WhatArg,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the built-in gates.
    Catalog,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    #[value(name = "ordered_product", alias = "ordered-product")]
    OrderedProduct,
    #[value(name = "lifted_ode", alias = "lifted-ode")]
    LiftedOde,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    Frames,
    Projectors,
    Bloch,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (text, success) = match cli.command {
        Command::Synthesize {
            spec,
            output,
            phases,
            tol,
        } => {
            let out = commands::synthesize(&commands::SynthesizeArgs {
                spec: &spec,
                output: &output,
                phases,
                tolerance: tol,
            })?;
            (out.text, out.success)
        }
        Command::Verify {
            report,
            steps,
            method,
            tol,
        } => {
            let method = match method {
                MethodArg::OrderedProduct => VerifyMethod::OrderedProduct,
                MethodArg::LiftedOde => VerifyMethod::LiftedOde,
                MethodArg::All => VerifyMethod::All,
            };
            let out = commands::verify(&commands::VerifyArgs {
                report: &report,
                steps,
                method,
                tolerance: tol,
            })?;
            (out.text, out.success)
        }
        Command::Simulate {
            report,
            t_total,
            gap,
            steps,
            csv,
        } => {
            let out = commands::simulate(&commands::SimulateArgs {
                report: &report,
                t_totals: t_total,
                gap,
                steps,
                csv: csv.as_deref(),
            })?;
            (out.text, out.success)
        }
        Command::ExportCurve {
            report,
            samples,
            what,
            output,
        } => {
            let what = match what {
                WhatArg::Frames => CurveKind::Frames,
                WhatArg::Projectors => CurveKind::Projectors,
                WhatArg::Bloch => CurveKind::Bloch,
            };
            let csv = commands::export_curve(&commands::ExportArgs {
                report: &report,
                samples,
                what,
            })?;
            match output {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?;
                    (String::new(), true)
                }
                None => (csv, true),
            }
        }
        Command::Catalog => (commands::catalog(), true),
    };
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code == 2 || code == EXIT_VERIFICATION || code == EXIT_IO);
            ExitCode::from(code as u8)
        }
    }
}
