//! The variational loop: ansatz, energy objective, multi-start optimisation,
//! and diagnostics against the exact ground state.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::ansatz::{AnsatzSpec, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::measure::{
    exact_energy_of_state, sampled_energy_of_state, EstimateMode, Grouping, DEFAULT_SHOTS,
};
use crate::model::{exact_ground_energy_per_site, exact_ground_state, XYModel};
use crate::optimize::{multi_start, random_start, Method, OptimizerConfig, RunSummary};
use crate::rng;

pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct VqeConfig {
    pub model: XYModel,
    pub ansatz: AnsatzSpec,
    pub mode: EstimateMode,
    pub shots_per_setting: u64,
    pub grouping: Grouping,
    pub optimizer: OptimizerConfig,
    pub restarts: usize,
    pub seed: u64,
    /// Start restart 0 here instead of at a random point.
    pub warm_start: Option<Vec<f64>>,
    /// In [`sweep`], start each field from the previous field's parameters.
    pub sweep_warm_start: bool,
}

impl VqeConfig {
    /// Defaults: Nelder-Mead for exact energies, SPSA for sampled ones.
    pub fn new(model: XYModel, ansatz: AnsatzSpec, mode: EstimateMode) -> Self {
        Self {
            model,
            ansatz,
            mode,
            shots_per_setting: DEFAULT_SHOTS,
            grouping: Grouping::default(),
            optimizer: default_optimizer(mode),
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            warm_start: None,
            sweep_warm_start: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        if self.ansatz.n != self.model.n {
            return Err(Error::Validation(format!(
                "ansatz acts on {} qubits but the model has {} sites",
                self.ansatz.n, self.model.n
            )));
        }
        if self.mode == EstimateMode::Sampled && self.shots_per_setting == 0 {
            return Err(Error::Validation("sampled mode needs shots_per_setting >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Validation("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

pub const SAMPLED_MAX_EVALS: usize = 5000;
pub const SAMPLED_CALIBRATE_STEP: f64 = 0.1;

pub fn default_optimizer(mode: EstimateMode) -> OptimizerConfig {
    match mode {
        EstimateMode::Exact => OptimizerConfig::new(Method::NelderMead),
        EstimateMode::Sampled => {
            let mut cfg = OptimizerConfig::new(Method::Spsa);
            cfg.max_evals = SAMPLED_MAX_EVALS;
            cfg.spsa.calibrate_step = Some(SAMPLED_CALIBRATE_STEP);
            cfg
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    /// Exact expectation in exact mode; a fresh shot estimate in sampled mode.
    pub energy_per_site: f64,
    /// Standard error of `energy_per_site` (zero in exact mode).
    pub std_error: f64,
    /// Statevector energy of the reported parameters.
    pub statevector_energy_per_site: f64,
    pub exact_energy_per_site: f64,
    pub params: Vec<f64>,
    pub fidelity_vs_exact: f64,
    pub degenerate_reference: bool,
    pub history: Vec<(usize, f64)>,
    pub best_restart: usize,
    pub restarts_summary: Vec<RunSummary>,
    pub total_evals: usize,
    pub wall_time: Duration,
}

impl VqeResult {
    /// Equality ignoring `wall_time`.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self {
            wall_time: other.wall_time,
            ..self.clone()
        } == *other
    }
}

/// Period of each parameter slot: `4π` for controlled rotations, whose
/// `2π` shift is not a global phase, and `2π` otherwise.
pub fn slot_periods(c: &Circuit) -> Vec<f64> {
    let mut periods = vec![2.0 * PI; c.num_params()];
    for g in c.instrs() {
        if let (GateKind::Crx, Some(s)) = (g.kind, g.param_slot) {
            periods[s] = 4.0 * PI;
        }
    }
    periods
}

/// Maps `x` into `(-period/2, period/2]`.
pub fn wrap_angle(x: f64, period: f64) -> f64 {
    let half = period / 2.0;
    let y = x.rem_euclid(period);
    if y > half {
        y - period
    } else {
        y
    }
}

fn per_site_exact(c: &Circuit, m: &XYModel, x: &[f64]) -> f64 {
    c.run(x)
        .and_then(|psi| exact_energy_of_state(&psi, m))
        .map(|e| e / m.n as f64)
        .unwrap_or(f64::NAN)
}

/// Runs one VQE optimisation.
pub fn run(cfg: &VqeConfig) -> Result<VqeResult> {
    let start = Instant::now();
    cfg.validate()?;
    let m = cfg.model;
    let circuit = cfg.ansatz.build()?;
    let dim = circuit.num_params();
    let sites = m.n as f64;
    let mut opt = cfg.optimizer.clone();
    opt.seed = cfg.seed;

    let ms = match cfg.mode {
        EstimateMode::Exact => multi_start(
            |_| |x: &[f64]| per_site_exact(&circuit, &m, x),
            dim,
            cfg.restarts,
            cfg.warm_start.as_deref(),
            &opt,
        )?,
        EstimateMode::Sampled => {
            let terms = m.term_list();
            let sample = |x: &[f64], r: &mut rng::SimRng| {
                circuit
                    .run(x)
                    .and_then(|psi| {
                        sampled_energy_of_state(&psi, &terms, cfg.shots_per_setting, cfg.grouping, r)
                    })
                    .map(|e| (e.value / sites, e.std_error / sites))
            };
            if opt.noise_floor.is_none() {
                let probe = random_start(dim, &opt, 0);
                let mut r = rng::stream(rng::derive_seed(cfg.seed, 2), 0);
                opt.noise_floor = Some(sample(&probe, &mut r)?.1);
            }
            multi_start(
                |k| {
                    let mut r = rng::stream(rng::derive_seed(cfg.seed, 1), k as u64);
                    move |x: &[f64]| sample(x, &mut r).map(|e| e.0).unwrap_or(f64::NAN)
                },
                dim,
                cfg.restarts,
                cfg.warm_start.as_deref(),
                &opt,
            )?
        }
    };

    let periods = slot_periods(&circuit);
    let params: Vec<f64> = ms
        .best
        .best_params
        .iter()
        .zip(&periods)
        .map(|(&x, &p)| wrap_angle(x, p))
        .collect();
    let psi = circuit.run(&params)?;
    let statevector_energy_per_site = exact_energy_of_state(&psi, &m)? / sites;
    let (energy_per_site, std_error) = match cfg.mode {
        EstimateMode::Exact => (statevector_energy_per_site, 0.0),
        EstimateMode::Sampled => {
            let mut r = rng::stream(rng::derive_seed(cfg.seed, 3), 0);
            let e = sampled_energy_of_state(
                &psi,
                &m.term_list(),
                cfg.shots_per_setting,
                cfg.grouping,
                &mut r,
            )?;
            (e.value / sites, e.std_error / sites)
        }
    };
    let exact = exact_ground_state(m.n, m.j, m.h)?;
    let fidelity_vs_exact = exact.fidelity(&psi)?;
    Ok(VqeResult {
        energy_per_site,
        std_error,
        statevector_energy_per_site,
        exact_energy_per_site: exact_ground_energy_per_site(m.n, m.j, m.h).energy_per_site,
        params,
        fidelity_vs_exact,
        degenerate_reference: exact.degenerate(),
        history: ms.best.history,
        best_restart: ms.best_restart,
        total_evals: ms.runs.iter().map(|r| r.evals_used).sum(),
        restarts_summary: ms.runs,
        wall_time: start.elapsed(),
    })
}

/// Run for grid point `k` at field `h`, seeded from the master seed and `k`.
pub fn sweep_point(cfg: &VqeConfig, k: usize, h: f64) -> Result<VqeResult> {
    let mut c = cfg.clone();
    c.model = cfg.model.with_field(h);
    c.seed = rng::derive_seed(cfg.seed, k as u64);
    run(&c)
}

/// Independent runs over a field grid; see [`sweep_point`].
pub fn sweep(cfg: &VqeConfig, h_values: &[f64]) -> Result<Vec<VqeResult>> {
    if h_values.is_empty() {
        return Err(Error::Argument("empty field grid".into()));
    }
    cfg.validate()?;
    if cfg.sweep_warm_start {
        let mut out: Vec<VqeResult> = Vec::with_capacity(h_values.len());
        for (k, &h) in h_values.iter().enumerate() {
            let mut c = cfg.clone();
            if let Some(prev) = out.last() {
                c.warm_start = Some(prev.params.clone());
            }
            out.push(sweep_point(&c, k, h)?);
        }
        return Ok(out);
    }
    h_values
        .par_iter()
        .enumerate()
        .map(|(k, &h)| sweep_point(cfg, k, h))
        .collect()
}
