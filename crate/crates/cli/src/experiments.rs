//! One runner per experiment type, each producing a fixed set of columns.

use rayon::prelude::*;
use xyvqe::ansatz::{enumerate_gate_orders, AnsatzSpec, Connectivity, Family};
use xyvqe::entropy::{maximize_half_chain_entropy, EntropyMaxConfig, EntropyProfile};
use xyvqe::model::{exact_ground_energy_per_site, exact_ground_state, mf_ground_energy_per_site, XYModel};
use xyvqe::rng;
use xyvqe::vqe::{self, VqeConfig, VqeResult};

use crate::config::{parse_ansatz_entry, Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::output::num;

/// Largest chain for which the exact sweep reports the half-chain entropy.
const ENTROPY_COLUMN_MAX_SITES: usize = 16;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Grid points that could not be computed, with the reason.
    pub failures: Vec<String>,
}

impl Report {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Parsed numeric column; empty cells become NaN.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let k = self.column(name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows
            .iter()
            .map(|r| r[k].parse().unwrap_or(f64::NAN))
            .collect()
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match cfg.experiment {
        Experiment::ExactSweep => exact_sweep(cfg),
        Experiment::MfSweep | Experiment::VqeSweep => vqe_sweep(cfg),
        Experiment::GateOrders => gate_orders(cfg),
        Experiment::Layers => layers(cfg),
        Experiment::EntropyMax => entropy_max(cfg),
        Experiment::EntropyRange => entropy_range(cfg),
        Experiment::EntropyGrowth => entropy_growth(cfg),
    }
}

fn base_vqe(cfg: &ExperimentConfig, spec: AnsatzSpec) -> Result<VqeConfig, CliError> {
    let model = XYModel::new(cfg.j, cfg.h_values[0], cfg.n)?;
    let mut v = VqeConfig::new(model, spec, cfg.mode);
    v.shots_per_setting = cfg.shots;
    v.grouping = cfg.grouping;
    v.optimizer = cfg.optimizer_config();
    v.restarts = cfg.restarts;
    v.seed = cfg.seed;
    Ok(v)
}

fn profile_cells(p: Option<&EntropyProfile>, n: usize) -> Vec<String> {
    match p {
        Some(p) => p.values.iter().map(|&v| num(v)).collect(),
        None => vec![String::new(); n + 1],
    }
}

fn profile_columns(n: usize) -> Vec<String> {
    (0..=n).map(|x| format!("s_{x}")).collect()
}

fn exact_sweep(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut rep = Report::new(&[
        "h",
        "exact_energy_per_site",
        "mf_energy_per_site",
        "n_star",
        "degenerate",
        "half_chain_entropy",
    ]);
    for &h in &cfg.h_values {
        let g = exact_ground_energy_per_site(cfg.n, cfg.j, h);
        let entropy = if cfg.n <= ENTROPY_COLUMN_MAX_SITES {
            num(exact_ground_state(cfg.n, cfg.j, h)?.state.cut_entropy(cfg.n / 2)?)
        } else {
            String::new()
        };
        rep.rows.push(vec![
            num(h),
            num(g.energy_per_site),
            num(mf_ground_energy_per_site(cfg.n, cfg.j, h)),
            g.n_star.to_string(),
            g.degenerate.to_string(),
            entropy,
        ]);
    }
    Ok(rep)
}

fn vqe_columns(cfg: &ExperimentConfig, leading: &[&str]) -> Vec<String> {
    let mut cols: Vec<String> = leading.iter().map(|s| s.to_string()).collect();
    cols.extend(
        [
            "h",
            "energy_per_site",
            "std_error",
            "statevector_energy_per_site",
            "exact_energy_per_site",
            "mf_energy_per_site",
            "fidelity",
            "degenerate_reference",
            "restarts_used",
            "evals",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    if cfg.timing {
        cols.push("wall_ms".into());
    }
    cols
}

fn vqe_cells(cfg: &ExperimentConfig, h: f64, r: &VqeResult) -> Vec<String> {
    let mut row = vec![
        num(h),
        num(r.energy_per_site),
        num(r.std_error),
        num(r.statevector_energy_per_site),
        num(r.exact_energy_per_site),
        num(mf_ground_energy_per_site(cfg.n, cfg.j, h)),
        num(r.fidelity_vs_exact),
        r.degenerate_reference.to_string(),
        r.restarts_summary.len().to_string(),
        r.total_evals.to_string(),
    ];
    if cfg.timing {
        row.push(r.wall_time.as_millis().to_string());
    }
    row
}

/// Runs a VQE at every field of the grid; failures are collected per point.
fn grid_runs(cfg: &ExperimentConfig, base: &VqeConfig) -> Vec<(f64, Result<VqeResult, CliError>)> {
    cfg.h_values
        .par_iter()
        .enumerate()
        .map(|(k, &h)| (h, vqe::sweep_point(base, k, h).map_err(CliError::from)))
        .collect()
}

fn push_runs(
    rep: &mut Report,
    cfg: &ExperimentConfig,
    label: &str,
    leading: Vec<String>,
    runs: Vec<(f64, Result<VqeResult, CliError>)>,
) {
    for (h, r) in runs {
        match r {
            Ok(r) => {
                let mut row = leading.clone();
                row.extend(vqe_cells(cfg, h, &r));
                rep.rows.push(row);
            }
            Err(e) => rep.failures.push(format!("{label}h={h}: {e}")),
        }
    }
}

fn vqe_sweep(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let base = base_vqe(cfg, cfg.ansatz())?;
    let mut rep = Report {
        columns: vqe_columns(cfg, &[]),
        ..Report::default()
    };
    push_runs(&mut rep, cfg, "", Vec::new(), grid_runs(cfg, &base));
    Ok(rep)
}

fn gate_orders(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    if cfg.family == Family::MeanField {
        return Err(CliError::Config(
            "field `family`: gate orders need an entangling family".into(),
        ));
    }
    let mut r = rng::seeded(cfg.seed);
    let orders = enumerate_gate_orders(cfg.n, &mut r, cfg.orders)?;
    let mut rep = Report {
        columns: vqe_columns(cfg, &["order_index", "order"]),
        ..Report::default()
    };
    let results: Vec<_> = orders
        .par_iter()
        .enumerate()
        .map(|(o, order)| {
            let mut spec = AnsatzSpec::new(cfg.family, order.clone(), cfg.layers, cfg.n);
            spec.interleave_mf = cfg.interleave_mf;
            let runs = base_vqe(cfg, spec).map(|mut base| {
                base.seed = rng::derive_seed(cfg.seed, o as u64);
                grid_runs(cfg, &base)
            });
            (o, order, runs)
        })
        .collect();
    for (o, order, runs) in results {
        let leading = vec![o.to_string(), order.to_string()];
        push_runs(&mut rep, cfg, &format!("order {o} "), leading, runs?);
    }
    Ok(rep)
}

fn layers(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut rep = Report {
        columns: vqe_columns(cfg, &["layers"]),
        ..Report::default()
    };
    let results: Vec<_> = cfg
        .layer_counts
        .par_iter()
        .map(|&l| {
            let mut spec = cfg.ansatz();
            spec.layers = l;
            let runs = base_vqe(cfg, spec).map(|mut base| {
                base.seed = rng::derive_seed(cfg.seed, l as u64);
                grid_runs(cfg, &base)
            });
            (l, runs)
        })
        .collect();
    for (l, runs) in results {
        push_runs(&mut rep, cfg, &format!("L={l} "), vec![l.to_string()], runs?);
    }
    Ok(rep)
}

fn entropy_cfg(cfg: &ExperimentConfig, stream: u64) -> EntropyMaxConfig {
    let mut optimizer = cfg.optimizer_config();
    optimizer.seed = rng::derive_seed(cfg.seed, stream);
    EntropyMaxConfig {
        optimizer,
        restarts: cfg.restarts,
        snapshots: cfg.snapshots.clone(),
    }
}

fn entropy_max(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut cols: Vec<String> = ["ansatz", "max_half_chain_entropy", "bound", "evals"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(profile_columns(cfg.n));
    let mut rep = Report {
        columns: cols,
        ..Report::default()
    };
    let results: Vec<_> = cfg
        .ansatzes
        .par_iter()
        .enumerate()
        .map(|(k, entry)| {
            let spec = parse_ansatz_entry(entry, cfg.n, cfg.layers).map_err(CliError::Config)?;
            let mut ecfg = entropy_cfg(cfg, k as u64);
            ecfg.snapshots.clear();
            Ok::<_, CliError>((entry, maximize_half_chain_entropy(&spec, &ecfg)?))
        })
        .collect();
    for r in results {
        match r {
            Ok((entry, res)) => {
                let mut row = vec![
                    entry.clone(),
                    num(res.max_value),
                    num((cfg.n / 2) as f64),
                    res.restarts_summary.iter().map(|s| s.evals_used).sum::<usize>().to_string(),
                ];
                row.extend(profile_cells(Some(&res.final_profile), cfg.n));
                rep.rows.push(row);
            }
            Err(e) => rep.failures.push(e.to_string()),
        }
    }
    Ok(rep)
}

fn entropy_range(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut rep = Report {
        columns: vqe_columns(cfg, &["r", "max_half_chain_entropy"]),
        ..Report::default()
    };
    let results: Vec<_> = cfg
        .ranges
        .par_iter()
        .map(|&r| {
            let spec = AnsatzSpec::new(Family::Tqr, Connectivity::Range(r), 1, cfg.n);
            let mut ecfg = entropy_cfg(cfg, r as u64);
            ecfg.snapshots.clear();
            let max = maximize_half_chain_entropy(&spec, &ecfg);
            let runs = base_vqe(cfg, spec).map(|mut base| {
                base.optimizer = vqe::default_optimizer(cfg.mode);
                base.optimizer.seed = cfg.seed;
                base.restarts = vqe::DEFAULT_RESTARTS;
                base.seed = rng::derive_seed(cfg.seed, 1000 + r as u64);
                grid_runs(cfg, &base)
            });
            (r, max, runs)
        })
        .collect();
    for (r, max, runs) in results {
        let max = match max {
            Ok(m) => m.max_value,
            Err(e) => {
                rep.failures.push(format!("r={r}: {e}"));
                continue;
            }
        };
        push_runs(&mut rep, cfg, &format!("r={r} "), vec![r.to_string(), num(max)], runs?);
    }
    Ok(rep)
}

fn entropy_growth(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut cols: Vec<String> = vec!["eval_index".into(), "half_chain_entropy".into()];
    cols.extend(profile_columns(cfg.n));
    let mut rep = Report {
        columns: cols,
        ..Report::default()
    };
    let res = maximize_half_chain_entropy(&cfg.ansatz(), &entropy_cfg(cfg, 0))?;
    for &(e, s) in &res.trajectory {
        let snap = res.snapshots.iter().find(|(i, _)| *i == e).map(|(_, p)| p);
        let mut row = vec![e.to_string(), num(s)];
        row.extend(profile_cells(snap, cfg.n));
        rep.rows.push(row);
    }
    Ok(rep)
}
