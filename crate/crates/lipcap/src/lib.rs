//! File formats, configuration and the command-line front end for
//! `lipcap-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod verify;

pub use cli::run;
pub use config::{Config, OutputFormat, DEPTH_CAP_ENV};
pub use error::CliError;
