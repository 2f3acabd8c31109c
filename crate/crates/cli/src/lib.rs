//! Command-line driver: configuration, checks, reports and the subcommands.

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config error at '{path}': {message}")]
    Schema { path: String, message: String },
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Lab(#[from] cryamabe::Error),
}
