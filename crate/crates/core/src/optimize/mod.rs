//! Derivative-free minimisers and a multi-start driver.
//!
//! All three methods share [`OptimizerConfig`] and report an [`OptRun`]. The
//! history records, after every objective evaluation, the best value seen so far.

mod nelder_mead;
mod powell;
mod spsa;

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    NelderMead,
    Powell,
    Spsa,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::NelderMead => "nelder-mead",
            Method::Powell => "powell",
            Method::Spsa => "spsa",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "nelder-mead" | "nm" => Ok(Method::NelderMead),
            "powell" => Ok(Method::Powell),
            "spsa" => Ok(Method::Spsa),
            _ => Err(Error::Validation(format!(
                "unknown optimizer {s:?} (expected nelder-mead, powell or spsa)"
            ))),
        }
    }
}

/// SPSA gain schedule `a_k = a / (k + 1 + A)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsaGains {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability constant; `None` means `0.1 * max_evals`.
    pub stability: Option<f64>,
    /// When set, `a` is rescaled so the first update moves each coordinate by
    /// about this much, judged from a few gradient estimates at the start.
    pub calibrate_step: Option<f64>,
}

impl Default for SpsaGains {
    fn default() -> Self {
        Self {
            a: 0.2,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
            stability: None,
            calibrate_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_evals: usize,
    /// Absolute objective change below which NM/Powell stop.
    pub tolerance_f: f64,
    /// Simplex size below which NM stops.
    pub tolerance_x: f64,
    pub seed: u64,
    /// Per-coordinate box; points are clamped into it before evaluation.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Initial simplex edge (NM) and first bracketing step (Powell).
    pub initial_step: f64,
    pub spsa: SpsaGains,
    /// For noisy objectives: once a quarter of the budget is spent, SPSA stops
    /// when the windowed mean objective improves by less than this over
    /// `noise_window` evaluations.
    pub noise_floor: Option<f64>,
    pub noise_window: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::NelderMead,
            max_evals: 20_000,
            tolerance_f: 1e-8,
            tolerance_x: 1e-8,
            seed: 0,
            bounds: None,
            initial_step: 0.5,
            spsa: SpsaGains::default(),
            noise_floor: None,
            noise_window: 50,
        }
    }
}

impl OptimizerConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.max_evals == 0 {
            return Err(Error::Validation("max_evals must be >= 1".into()));
        }
        if !(self.tolerance_f > 0.0 && self.tolerance_x > 0.0) {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::Validation("initial_step must be positive".into()));
        }
        if let Some(b) = &self.bounds {
            if b.len() != dim {
                return Err(Error::Validation(format!(
                    "{} bounds for a {dim}-dimensional problem",
                    b.len()
                )));
            }
            if b.iter().any(|(lo, hi)| !(lo <= hi)) {
                return Err(Error::Validation("every bound needs lo <= hi".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptRun {
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub evals_used: usize,
    /// `(evaluation index, best value so far)` after every evaluation.
    pub history: Vec<(usize, f64)>,
    pub converged: bool,
}

/// Why an inner loop stopped early.
pub(crate) enum Stop {
    Budget,
    NonFinite(f64, usize),
}

/// Objective wrapper: clamps into bounds, counts evaluations, tracks the
/// incumbent, and enforces the budget.
pub(crate) struct Tracker<'a, F> {
    f: F,
    bounds: Option<&'a [(f64, f64)]>,
    max_evals: usize,
    evals: usize,
    best_value: f64,
    best_params: Vec<f64>,
    history: Vec<(usize, f64)>,
}

impl<'a, F: FnMut(&[f64]) -> f64> Tracker<'a, F> {
    fn new(f: F, x0: &[f64], cfg: &'a OptimizerConfig) -> Self {
        Self {
            f,
            bounds: cfg.bounds.as_deref(),
            max_evals: cfg.max_evals,
            evals: 0,
            best_value: f64::INFINITY,
            best_params: x0.to_vec(),
            history: Vec::new(),
        }
    }

    pub(crate) fn project(&self, x: &[f64]) -> Vec<f64> {
        match self.bounds {
            Some(b) => x
                .iter()
                .zip(b)
                .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
                .collect(),
            None => x.to_vec(),
        }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.max_evals - self.evals
    }

    pub(crate) fn eval(&mut self, x: &[f64]) -> std::result::Result<f64, Stop> {
        if self.evals >= self.max_evals {
            return Err(Stop::Budget);
        }
        let xp = self.project(x);
        let v = (self.f)(&xp);
        self.evals += 1;
        if !v.is_finite() {
            return Err(Stop::NonFinite(v, self.evals));
        }
        if v < self.best_value {
            self.best_value = v;
            self.best_params = xp;
        }
        self.history.push((self.evals, self.best_value));
        Ok(v)
    }

    fn finish(self, converged: bool) -> OptRun {
        OptRun {
            best_value: self.best_value,
            best_params: self.best_params,
            evals_used: self.evals,
            history: self.history,
            converged,
        }
    }
}

/// How a method finished when it did not run out of budget.
pub(crate) struct Done {
    pub converged: bool,
    /// Point reported instead of the incumbent (SPSA final iterate).
    pub final_point: Option<(Vec<f64>, f64)>,
}

/// Minimises `f` from `x0`.
///
/// Nelder-Mead uses reflection 1, expansion 2, contraction 0.5 and shrink 0.5.
/// Powell uses conjugate directions with golden-section line searches. SPSA
/// uses simultaneous ±1 perturbations with the gains in `cfg.spsa` and reports
/// its final iterate rather than the best noisy sample.
pub fn minimize<F>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptRun>
where
    F: FnMut(&[f64]) -> f64,
{
    if x0.is_empty() {
        return Err(Error::Argument("cannot optimise over zero parameters".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("starting point must be finite".into()));
    }
    cfg.validate(x0.len())?;
    let mut t = Tracker::new(f, x0, cfg);
    let outcome = match cfg.method {
        Method::NelderMead => nelder_mead::run(&mut t, x0, cfg),
        Method::Powell => powell::run(&mut t, x0, cfg),
        Method::Spsa => spsa::run(&mut t, x0, cfg),
    };
    match outcome {
        Ok(done) => {
            let mut run = t.finish(done.converged);
            if let Some((x, v)) = done.final_point {
                run.best_params = x;
                run.best_value = v;
            }
            Ok(run)
        }
        Err(Stop::Budget) => Ok(t.finish(false)),
        Err(Stop::NonFinite(value, eval)) => Err(Error::NonFinite { value, eval }),
    }
}

/// One restart's outcome, kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub restart: usize,
    pub start: Vec<f64>,
    pub best_value: f64,
    pub evals_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartRun {
    pub best: OptRun,
    pub best_restart: usize,
    pub runs: Vec<RunSummary>,
}

/// Uniform start in `[-pi, pi]^dim` (or the box, when bounds are set) for
/// restart `index`.
pub fn random_start(dim: usize, cfg: &OptimizerConfig, index: usize) -> Vec<f64> {
    let mut r = rng::stream(cfg.seed, index as u64);
    (0..dim)
        .map(|k| match &cfg.bounds {
            Some(b) if b[k].0.is_finite() && b[k].1.is_finite() && b[k].0 < b[k].1 => {
                r.gen_range(b[k].0..=b[k].1)
            }
            _ => r.gen_range(-PI..=PI),
        })
        .collect()
}

/// Runs `restarts` independent minimisations in parallel and keeps the best.
///
/// Restart `k` starts from [`random_start`] and gets its own objective from
/// `make_objective(k)` and its own seed; results do not depend on thread
/// count. Ties go to the lower restart index. `warm_start`, when given,
/// replaces the start of restart 0.
pub fn multi_start<M, F>(
    make_objective: M,
    dim: usize,
    restarts: usize,
    warm_start: Option<&[f64]>,
    cfg: &OptimizerConfig,
) -> Result<MultiStartRun>
where
    M: Fn(usize) -> F + Sync,
    F: FnMut(&[f64]) -> f64,
{
    if restarts == 0 {
        return Err(Error::Validation("restarts must be >= 1".into()));
    }
    if let Some(w) = warm_start {
        if w.len() != dim {
            return Err(Error::Argument(format!(
                "warm start has {} parameters, expected {dim}",
                w.len()
            )));
        }
    }
    cfg.validate(dim)?;
    let results: Vec<(Vec<f64>, Result<OptRun>)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let start = match (k, warm_start) {
                (0, Some(w)) => w.to_vec(),
                _ => random_start(dim, cfg, k),
            };
            let mut c = cfg.clone();
            c.seed = rng::derive_seed(cfg.seed, k as u64);
            let run = minimize(make_objective(k), &start, &c);
            (start, run)
        })
        .collect();

    let mut runs = Vec::with_capacity(restarts);
    let mut best: Option<(usize, OptRun)> = None;
    for (k, (start, res)) in results.into_iter().enumerate() {
        let run = res?;
        runs.push(RunSummary {
            restart: k,
            start,
            best_value: run.best_value,
            evals_used: run.evals_used,
            converged: run.converged,
        });
        if best.as_ref().map_or(true, |(_, b)| run.best_value < b.best_value) {
            best = Some((k, run));
        }
    }
    let (best_restart, best) = best.expect("at least one restart");
    Ok(MultiStartRun {
        best,
        best_restart,
        runs,
    })
}
