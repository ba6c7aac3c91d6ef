//! CSV rendering with a commented header carrying the configuration.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::Report;

pub const CONFIG_BEGIN: &str = "config-begin";
pub const CONFIG_END: &str = "config-end";

/// Renders the report: `#` header lines (tool, version, experiment, config
/// echo) followed by an RFC 4180 table.
pub fn render(cfg: &ExperimentConfig, report: &Report) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str(&format!("# xyvqe {} {}\n", xyvqe::VERSION, cfg.experiment));
    out.push_str(&format!("# {CONFIG_BEGIN}\n"));
    for line in cfg.to_toml().lines() {
        out.push_str(&format!("# {line}\n"));
    }
    out.push_str(&format!("# {CONFIG_END}\n"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&report.columns)?;
    for row in &report.rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    out.push_str(std::str::from_utf8(&bytes).expect("csv output is UTF-8"));
    Ok(out)
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}
