use std::io;

use thiserror::Error;

/// Everything a subcommand can fail with after its arguments parsed.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Compute(#[from] lipcap_core::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Compute(e) => e.kind(),
            CliError::Io { .. } => "Io",
            CliError::Parse { .. } => "Parse",
            CliError::Config(_) => "Config",
            CliError::Output(_) => "Output",
        }
    }
}
