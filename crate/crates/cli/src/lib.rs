//! Command-line driver: ingest → extract → encode → retrieve → evaluate, and
//! the ablation grid.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use cli::{run, Cli};
pub use config::RunConfig;
pub use error::{CliError, CliResult, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
