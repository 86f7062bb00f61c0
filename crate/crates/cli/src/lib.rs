//! Library side of the `spdc` command-line tool: configuration, artifact
//! formats and the subcommand implementations.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod gridfile;

use std::io;
use std::path::PathBuf;

pub use config::{ConfigError, RunConfig};
pub use gridfile::GridFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(spdc_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<spdc_core::Error> for CliError {
    fn from(e: spdc_core::Error) -> Self {
        match e {
            spdc_core::Error::Domain(msg) => CliError::Input(msg),
            other => CliError::Numerical(other),
        }
    }
}
