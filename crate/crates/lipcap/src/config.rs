//! Run configuration: built-in defaults, then an optional TOML file, then
//! `LIPCAP_DEPTH_CAP`, then command-line flags.

use std::fs;
use std::path::Path;

use lipcap_core::transforms::{PoissonGridSpec, CHI_TOLERANCE};
use lipcap_core::{DEFAULT_DEPTH_CAP, MAX_DEPTH};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEPTH_CAP_ENV: &str = "LIPCAP_DEPTH_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Overrides for the Poisson-transform grid; unset fields keep the
/// measure-dependent defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub z_count: Option<usize>,
    pub t_count: Option<usize>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

impl GridConfig {
    pub fn apply(&self, mut grid: PoissonGridSpec) -> PoissonGridSpec {
        if let Some(v) = self.z_count {
            grid.z_count = v;
        }
        if let Some(v) = self.t_count {
            grid.t_count = v;
        }
        if let Some(v) = self.t_min {
            grid.t_min = v;
        }
        if let Some(v) = self.t_max {
            grid.t_max = v;
        }
        grid
    }

    /// Field-wise override by `other`.
    pub fn merged(&self, other: &GridConfig) -> GridConfig {
        GridConfig {
            z_count: other.z_count.or(self.z_count),
            t_count: other.t_count.or(self.t_count),
            t_min: other.t_min.or(self.t_min),
            t_max: other.t_max.or(self.t_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed `|chi - 1|` on the support in the pairing.
    pub chi: f64,
    /// Allowed `|sum - 1|` of a partition on the covered set.
    pub partition_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { chi: CHI_TOLERANCE, partition_sum: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub depth_cap: u32,
    pub format: OutputFormat,
    pub seed: u64,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            depth_cap: DEFAULT_DEPTH_CAP,
            format: OutputFormat::Json,
            seed: 0,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl Config {
    /// Defaults, overlaid with `file` when given and with the environment
    /// value of the depth cap when set.
    pub fn load(file: Option<&Path>, env_cap: Option<&str>) -> Result<Config, CliError> {
        let mut config = match file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => Config::default(),
        };
        if let Some(raw) = env_cap {
            config.depth_cap = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{DEPTH_CAP_ENV}={raw:?} is not a depth")))?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.depth_cap > MAX_DEPTH {
            return Err(CliError::Config(format!("depth cap {} exceeds {MAX_DEPTH}", self.depth_cap)));
        }
        let t = &self.tolerances;
        if !(t.chi > 0.0 && t.partition_sum > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}
