//! Experiment runner for the xyvqe toolkit: TOML configuration in, CSV out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{parse_config, ExperimentConfig};
pub use error::CliError;
pub use experiments::{run_experiment, Report};

/// Parses, runs and renders a configuration document.
pub fn run_to_csv(text: &str) -> Result<(String, Report), CliError> {
    let cfg = parse_config(text)?;
    let report = run_experiment(&cfg)?;
    Ok((output::render(&cfg, &report)?, report))
}
