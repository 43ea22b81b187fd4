//! Command-line surface of reebforge.

pub mod commands;
pub mod svg;

pub use commands::{run, Cli, CliError, EXIT_CERTIFICATION, EXIT_FAILURE, EXIT_PACKING, EXIT_VALIDATION};
