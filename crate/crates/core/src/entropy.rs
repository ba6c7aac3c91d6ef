//! Entanglement-based expressibility analysis.

use crate::ansatz::{AnsatzSpec, Circuit, Connectivity, Family};
use crate::error::{Error, Result};
use crate::model::{exact_ground_state, MAX_DENSE_SITES};
use crate::optimize::{minimize, multi_start, random_start, Method, OptimizerConfig, RunSummary};
use crate::qstate::StateVector;
use crate::rng;

pub const DEFAULT_ENTROPY_RESTARTS: usize = 5;

/// Snapshot evaluation indices used for four-site growth runs.
pub const CRX_SNAPSHOTS: [usize; 3] = [380, 550, 910];
pub const TQR_SNAPSHOTS: [usize; 3] = [20, 40, 80];

/// `S(x)` in bits for every cut `x = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub values: Vec<f64>,
}

impl EntropyProfile {
    pub fn num_sites(&self) -> usize {
        self.values.len() - 1
    }

    pub fn cuts(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.num_sites()
    }

    pub fn half_chain(&self) -> f64 {
        self.values[self.num_sites() / 2]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn entropy_profile(state: &StateVector) -> Result<EntropyProfile> {
    let values = (0..=state.num_qubits())
        .map(|x| state.cut_entropy(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyProfile { values })
}

/// `S_max(x) = ||x - N/2| - N/2|`.
pub fn max_entropy_profile(n: usize) -> EntropyProfile {
    let half = n as f64 / 2.0;
    EntropyProfile {
        values: (0..=n)
            .map(|x| ((x as f64 - half).abs() - half).abs())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMaxConfig {
    pub optimizer: OptimizerConfig,
    pub restarts: usize,
    /// Evaluation indices at which the incumbent's profile is recorded.
    pub snapshots: Vec<usize>,
}

impl Default for EntropyMaxConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::new(Method::Powell),
            restarts: DEFAULT_ENTROPY_RESTARTS,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMaxResult {
    pub max_value: f64,
    pub params: Vec<f64>,
    /// `(evaluation index, best S(N/2) so far)` for the winning restart.
    pub trajectory: Vec<(usize, f64)>,
    /// Incumbent profiles at the requested evaluation indices.
    pub snapshots: Vec<(usize, EntropyProfile)>,
    pub final_profile: EntropyProfile,
    pub best_restart: usize,
    pub restarts_summary: Vec<RunSummary>,
}

fn half_entropy(c: &Circuit, x: &[f64]) -> f64 {
    let n = c.num_qubits();
    c.run(x)
        .and_then(|psi| psi.cut_entropy(n / 2))
        .unwrap_or(f64::NAN)
}

/// Maximises `S(N/2)` over the circuit parameters of `spec`.
pub fn maximize_half_chain_entropy(
    spec: &AnsatzSpec,
    cfg: &EntropyMaxConfig,
) -> Result<EntropyMaxResult> {
    if spec.n % 2 != 0 {
        return Err(Error::Argument(format!(
            "half-chain entropy needs an even chain, got N = {}",
            spec.n
        )));
    }
    let circuit = spec.build()?;
    let dim = circuit.num_params();
    let ms = multi_start(
        |_| |x: &[f64]| -half_entropy(&circuit, x),
        dim,
        cfg.restarts,
        None,
        &cfg.optimizer,
    )?;
    let params = ms.best.best_params.clone();
    let final_profile = entropy_profile(&circuit.run(&params)?)?;

    let mut snapshots = Vec::new();
    if !cfg.snapshots.is_empty() {
        // Replay the winning restart and keep the incumbent parameters.
        let k = ms.best_restart;
        let mut c = cfg.optimizer.clone();
        c.seed = rng::derive_seed(cfg.optimizer.seed, k as u64);
        let mut incumbents: Vec<(usize, f64, Vec<f64>)> = Vec::new();
        let mut evals = 0usize;
        minimize(
            |x: &[f64]| {
                evals += 1;
                let v = -half_entropy(&circuit, x);
                if incumbents.last().map_or(true, |l| v < l.1) {
                    incumbents.push((evals, v, x.to_vec()));
                }
                v
            },
            &random_start(dim, &cfg.optimizer, k),
            &c,
        )?;
        let mut wanted = cfg.snapshots.clone();
        wanted.sort_unstable();
        wanted.dedup();
        for e in wanted {
            if let Some(inc) = incumbents.iter().rev().find(|i| i.0 <= e) {
                snapshots.push((e, entropy_profile(&circuit.run(&inc.2)?)?));
            }
        }
    }

    Ok(EntropyMaxResult {
        max_value: -ms.best.best_value,
        params,
        trajectory: ms.best.history.iter().map(|&(e, v)| (e, -v)).collect(),
        snapshots,
        final_profile,
        best_restart: ms.best_restart,
        restarts_summary: ms.runs,
    })
}

/// Best half-chain entropy of the range-`r` two-qubit-rotation ansatz.
pub fn range_r_max_entropy(n: usize, r: usize, cfg: &EntropyMaxConfig) -> Result<f64> {
    if n % 2 != 0 || n < 2 {
        return Err(Error::Argument(format!("range study needs even N >= 2, got {n}")));
    }
    if r == 0 || r >= n {
        return Err(Error::Argument(format!("range r = {r} outside 1..={}", n - 1)));
    }
    let spec = AnsatzSpec::new(Family::Tqr, Connectivity::Range(r), 1, n);
    Ok(maximize_half_chain_entropy(&spec, cfg)?.max_value)
}

/// Field at the midpoint of the interval where the `N-1` sector is the ground
/// state.
pub fn paramagnetic_probe_field(n: usize, j: f64) -> f64 {
    j * (n as f64 - 2.0)
}

/// Half-chain entropies of the exact ground state at `h = 0` and at
/// [`paramagnetic_probe_field`].
pub fn exact_phase_entropies(n: usize, j: f64) -> Result<(f64, f64)> {
    if n % 2 != 0 || n < 2 || n > MAX_DENSE_SITES {
        return Err(Error::Argument(format!(
            "phase entropies need even N in 2..={MAX_DENSE_SITES}, got {n}"
        )));
    }
    if !(j > 0.0) {
        return Err(Error::Argument("phase entropies need J > 0".into()));
    }
    let ferro = exact_ground_state(n, j, 0.0)?.state.cut_entropy(n / 2)?;
    let para = exact_ground_state(n, j, paramagnetic_probe_field(n, j))?
        .state
        .cut_entropy(n / 2)?;
    Ok((ferro, para))
}
