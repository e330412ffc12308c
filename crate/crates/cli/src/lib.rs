//! Library side of the `bemdsvr` command-line tool.
//!
//! Each subcommand is a `cmd_*` function so tests can drive it without
//! spawning a process.

pub mod commands;
pub mod config;

use std::path::Path;

pub use commands::{
    cmd_decompose, cmd_evaluate, cmd_forecast, cmd_gen_synthetic, cmd_ingest, DecomposeMethod, DecomposeSummary,
    EvaluateSummary, ForecastOutput, IngestSummary,
};
pub use config::{ModelName, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    /// 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<bemdsvr::Error> for CliError {
    fn from(e: bemdsvr::Error) -> Self {
        match e {
            bemdsvr::Error::InvalidParameter(m) => CliError::Usage(m),
            e if e.is_data_error() => CliError::Data(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}
