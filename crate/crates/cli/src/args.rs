use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "wpcf",
    version,
    about = "Wireless-powered cell-free massive MIMO: max-min power control sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run max-min fair and fractional power control over random setups.
    Optimize(OptimizeArgs),
    /// Compare closed-form statistics against Monte Carlo estimates.
    Validate(ValidateArgs),
    /// Build empirical CDFs from an optimize manifest.
    Cdf(CdfArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    /// Scenario file (flat key/value); defaults to the built-in scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub setups: usize,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Bisection stopping tolerance (relative to the bracket top).
    #[arg(long, default_value_t = wpcf_core::maxmin::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Inflate the closed-form harvested energy by 5%.
    Energy,
    /// Inflate the closed-form `b_k` by 5%.
    Gain,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Scenario file; defaults to a small built-in instance.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Optional directory for a CSV copy of the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Corrupts one closed-form term (self-test of the suite).
    #[arg(long, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, Args)]
pub struct CdfArgs {
    /// Manifest written by `optimize`; defaults to `<out>/manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}
