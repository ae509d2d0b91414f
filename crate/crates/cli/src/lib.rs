//! Library half of the `holonomic` command: file formats and subcommands.

pub mod commands;
pub mod error;
pub mod hexfloat;
pub mod report;
pub mod spec;

pub use error::{CliError, CliResult, EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_VERIFICATION};
