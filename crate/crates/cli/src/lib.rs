//! Experiment driver behind the `sqrtwiener` binary.
//!
//! Each subcommand resolves a [`config::RunConfig`], runs the library, and
//! writes CSV and JSON files next to a [`manifest::RunManifest`].

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod reference;

use std::path::PathBuf;

/// Failure of a CLI run, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] sqrtwiener::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// `1` for configuration errors, `2` for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Library(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
