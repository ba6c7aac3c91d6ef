use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};
use xyvqe_cli::config::{apply_overrides, from_table, Experiment};
use xyvqe_cli::{output, run_experiment, CliError};

#[derive(Parser)]
#[command(name = "xyvqe", version, about = "VQE experiments on the long-range XY chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact ground-state energy, mean-field energy and entropy over a field grid.
    ExactSweep(Common),
    /// VQE with the mean-field ansatz over a field grid.
    MfSweep(Common),
    /// VQE with the configured ansatz over a field grid.
    VqeSweep(Common),
    /// VQE over randomly sampled entangler gate orders.
    GateOrders(Common),
    /// VQE for each entry of `layer_counts`.
    Layers(Common),
    /// Maximum half-chain entropy for each entry of `ansatzes`.
    EntropyMax(Common),
    /// Maximum entropy and VQE energy for range-r entanglers.
    EntropyRange(Common),
    /// Half-chain entropy trajectory while maximising it.
    EntropyGrowth(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (default: the config's `output`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "XYVQE_JOBS")]
    jobs: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    /// exact or sampled.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Chain length.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    connectivity: Option<String>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    max_evals: Option<usize>,
    /// Any other field, as key=value in TOML syntax (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    set: Vec<(String, String)>,
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::ExactSweep(c) => (Experiment::ExactSweep, c),
            Command::MfSweep(c) => (Experiment::MfSweep, c),
            Command::VqeSweep(c) => (Experiment::VqeSweep, c),
            Command::GateOrders(c) => (Experiment::GateOrders, c),
            Command::Layers(c) => (Experiment::Layers, c),
            Command::EntropyMax(c) => (Experiment::EntropyMax, c),
            Command::EntropyRange(c) => (Experiment::EntropyRange, c),
            Command::EntropyGrowth(c) => (Experiment::EntropyGrowth, c),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn build_table(experiment: Experiment, c: &Common) -> Result<Table, CliError> {
    let mut t: Table = match &c.config {
        Some(p) => read(p)?
            .parse()
            .map_err(|e| CliError::Config(format!("{}: malformed TOML: {e}", p.display())))?,
        None => Table::new(),
    };
    match t.get("experiment") {
        Some(Value::String(s)) if s != experiment.name() => {
            return Err(CliError::Config(format!(
                "config is for experiment {s:?} but the subcommand is {experiment}"
            )));
        }
        _ => {
            t.insert("experiment".into(), experiment.name().into());
        }
    }
    let int = |v: u64| Value::Integer(v as i64);
    let flags: [(&str, Option<Value>); 11] = [
        ("seed", c.seed.map(int)),
        ("shots", c.shots.map(int)),
        ("mode", c.mode.clone().map(Value::String)),
        ("restarts", c.restarts.map(|v| int(v as u64))),
        ("n", c.n.map(|v| int(v as u64))),
        ("j", c.j.map(Value::Float)),
        ("family", c.family.clone().map(Value::String)),
        ("connectivity", c.connectivity.clone().map(Value::String)),
        ("layers", c.layers.map(|v| int(v as u64))),
        ("optimizer", c.optimizer.clone().map(Value::String)),
        ("max_evals", c.max_evals.map(|v| int(v as u64))),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            t.insert(k.into(), v);
        }
    }
    apply_overrides(&mut t, &c.set)?;
    Ok(t)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (experiment, common) = cli.command.split();
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    }
    let table = build_table(experiment, &common)?;
    let cfg = from_table(&table)?;
    let report = run_experiment(&cfg)?;
    let text = output::render(&cfg, &report)?;
    let target = common.out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match target {
        Some(path) => std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{text}"),
    }
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    Ok(report.failures.is_empty())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
