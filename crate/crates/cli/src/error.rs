use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or invalid input: spec files, reports, flags.
    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Verification(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Core errors raised while interpreting user input.
    pub fn input(context: &str, err: holonomic_core::Error) -> Self {
        use holonomic_core::Error as E;
        match err {
            E::Verification { .. }
            | E::NoConvergence { .. }
            | E::Diagonalization { .. }
            | E::NotALoop { .. }
            | E::NotHorizontalLoop { .. }
            | E::StepTooCoarse { .. }
            | E::Adiabaticity { .. } => CliError::Verification(format!("{context}: {err}")),
            other => CliError::Parse(format!("{context}: {other}")),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
