//! Batch front-end: setup sweeps, oracle validation and CDF extraction.
//!
//! Each subcommand is a plain function over parsed arguments so integration
//! tests can drive it without spawning the binary.

pub mod args;
pub mod cdf;
pub mod manifest;
pub mod optimize;
pub mod validate;

use std::path::Path;

use wpcf_core::ScenarioConfig;

/// Failure classes, mapped to process exit codes by the binary.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid config, unusable inputs (exit 2).
    Usage(anyhow::Error),
    /// A run that started but could not complete, or a failed validation (exit 1).
    Failure(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Failure(e) => write!(f, "{e:#}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Loads the config file, or the default scenario when no path is given.
pub fn load_config(path: Option<&Path>) -> CliResult<ScenarioConfig> {
    let cfg = match path {
        Some(p) => ScenarioConfig::from_file(p).map_err(|e| CliError::Usage(e.into()))?,
        None => ScenarioConfig::default(),
    };
    cfg.validate().map_err(|e| CliError::Usage(e.into()))?;
    Ok(cfg)
}
