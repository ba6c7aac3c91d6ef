//! Exact and shot-based energy estimation.
//!
//! Shot-based estimates rotate every measured qubit into the computational basis
//! (`RY(-π/2)` for X, `RX(π/2)` for Y), sample a histogram, and read each Pauli
//! term off as a signed bit parity. In the default grouped mode one X, one Y and
//! one Z histogram serve all `N²` terms of the XY chain.

use num_complex::Complex64;

use crate::ansatz::Circuit;
use crate::error::{Error, Result};
use crate::model::{Pauli, PauliString, XYModel};
use crate::qstate::{gates, Histogram, Mat2, StateVector};
use crate::rng::SimRng;

/// Shots per setting used when nothing else is configured.
pub const DEFAULT_SHOTS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    fn of(p: Pauli) -> Option<Basis> {
        match p {
            Pauli::I => None,
            Pauli::X => Some(Basis::X),
            Pauli::Y => Some(Basis::Y),
            Pauli::Z => Some(Basis::Z),
        }
    }
}

/// A measurement basis and the pre-measurement rotation that maps it onto Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementSetting {
    pub basis: Basis,
}

impl MeasurementSetting {
    pub fn new(basis: Basis) -> Self {
        Self { basis }
    }

    /// `U` with `U† Z U` equal to the basis Pauli; `None` for Z.
    pub fn rotation(&self) -> Option<Mat2> {
        match self.basis {
            Basis::X => Some(gates::ry(-std::f64::consts::FRAC_PI_2)),
            Basis::Y => Some(gates::rx(std::f64::consts::FRAC_PI_2)),
            Basis::Z => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimateMode {
    Exact,
    Sampled,
}

/// How shot-based estimates assign terms to measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Grouping {
    /// Three settings (all-X, all-Y, all-Z) shared by every term.
    #[default]
    Grouped,
    /// One setting per Pauli term.
    PerTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std_error: f64,
    pub shots_per_setting: u64,
    pub mode: EstimateMode,
    /// Estimated `⟨P_k⟩` for every term of the model, in term-list order.
    pub term_expectations: Vec<f64>,
}

fn check_histogram(counts: &Histogram, shots: u64) -> Result<()> {
    if counts.is_empty() || shots == 0 {
        return Err(Error::Argument("empty histogram".into()));
    }
    let total: u64 = counts.values().sum();
    if total != shots {
        return Err(Error::Argument(format!(
            "histogram holds {total} shots, expected {shots}"
        )));
    }
    Ok(())
}

/// Mean of `(-1)^{Σ_q b_q}` over the histogram for the given qubits.
pub fn estimate_parity(counts: &Histogram, qubits: &[usize], shots: u64) -> Result<f64> {
    check_histogram(counts, shots)?;
    let mask = qubits.iter().fold(0usize, |m, &q| m | (1 << q));
    let signed: i64 = counts
        .iter()
        .map(|(&b, &c)| {
            if (b & mask).count_ones() % 2 == 0 {
                c as i64
            } else {
                -(c as i64)
            }
        })
        .sum();
    Ok(signed as f64 / shots as f64)
}

/// `(N_{0_j} - N_{1_j}) / N_s`.
pub fn estimate_z(counts: &Histogram, j: usize, shots: u64) -> Result<f64> {
    estimate_parity(counts, &[j], shots)
}

/// `(N_{00} - N_{01} - N_{10} + N_{11}) / N_s` on bits `i`, `j`.
pub fn estimate_zz(counts: &Histogram, i: usize, j: usize, shots: u64) -> Result<f64> {
    if i == j {
        return Err(Error::Argument(format!("ZZ estimate on repeated qubit {i}")));
    }
    estimate_parity(counts, &[i, j], shots)
}

/// Rotates `psi` so that measuring `basis[q]` on every qubit becomes a Z
/// measurement; qubits with `None` are left alone.
fn rotate_into(psi: &StateVector, bases: &[Option<Basis>]) -> Result<StateVector> {
    let mut out = psi.clone();
    for (q, b) in bases.iter().enumerate() {
        if let Some(u) = b.and_then(|b| MeasurementSetting::new(b).rotation()) {
            out.apply_1q(&u, q)?;
        }
    }
    Ok(out)
}

/// Samples a single setting: the given basis on every qubit.
pub fn sample_setting(
    psi: &StateVector,
    setting: MeasurementSetting,
    shots: u64,
    rng: &mut SimRng,
) -> Result<Histogram> {
    let bases = vec![Some(setting.basis); psi.num_qubits()];
    rotate_into(psi, &bases)?.sample_counts(shots, rng)
}

/// Variance of the mean of `shots` ±1 outcomes with estimated mean `m`.
fn parity_variance(m: f64, shots: u64) -> f64 {
    (1.0 - m * m).max(0.0) / shots as f64
}

/// Uniform basis of a term, if it has one.
fn term_basis(t: &PauliString) -> Option<Basis> {
    let mut basis = None;
    for p in &t.letters {
        match (Basis::of(*p), basis) {
            (None, _) => {}
            (Some(b), None) => basis = Some(b),
            (Some(b), Some(c)) if b == c => {}
            _ => return None,
        }
    }
    basis
}

/// Shot-based estimate of `Σ_k p_k ⟨P_k⟩` on a prepared state.
pub fn sampled_energy_of_state(
    psi: &StateVector,
    terms: &[PauliString],
    shots: u64,
    grouping: Grouping,
    rng: &mut SimRng,
) -> Result<EnergyEstimate> {
    if shots == 0 {
        return Err(Error::Argument("shots must be positive".into()));
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    let mut term_expectations = Vec::with_capacity(terms.len());
    match grouping {
        Grouping::Grouped => {
            let mut hist: [Option<Histogram>; 3] = [None, None, None];
            let bases = [Basis::X, Basis::Y, Basis::Z];
            for t in terms {
                let support = t.support();
                let m = if support.is_empty() {
                    1.0
                } else {
                    let basis = term_basis(t).ok_or_else(|| {
                        Error::Argument(format!("term {t} mixes bases; use per-term grouping"))
                    })?;
                    let k = bases.iter().position(|b| *b == basis).expect("basis");
                    if hist[k].is_none() {
                        hist[k] = Some(sample_setting(
                            psi,
                            MeasurementSetting::new(basis),
                            shots,
                            rng,
                        )?);
                    }
                    estimate_parity(hist[k].as_ref().expect("sampled"), &support, shots)?
                };
                if !support.is_empty() {
                    variance += t.coefficient * t.coefficient * parity_variance(m, shots);
                }
                value += t.coefficient * m;
                term_expectations.push(m);
            }
        }
        Grouping::PerTerm => {
            for t in terms {
                let support = t.support();
                let m = if support.is_empty() {
                    1.0
                } else {
                    let bases: Vec<Option<Basis>> =
                        t.letters.iter().map(|p| Basis::of(*p)).collect();
                    let counts = rotate_into(psi, &bases)?.sample_counts(shots, rng)?;
                    let m = estimate_parity(&counts, &support, shots)?;
                    variance += t.coefficient * t.coefficient * parity_variance(m, shots);
                    m
                };
                value += t.coefficient * m;
                term_expectations.push(m);
            }
        }
    }
    Ok(EnergyEstimate {
        value,
        std_error: variance.sqrt(),
        shots_per_setting: shots,
        mode: EstimateMode::Sampled,
        term_expectations,
    })
}

/// Runs the circuit and estimates the model energy from sampled histograms.
pub fn energy_sampled(
    c: &Circuit,
    params: &[f64],
    m: &XYModel,
    shots_per_setting: u64,
    grouping: Grouping,
    rng: &mut SimRng,
) -> Result<EnergyEstimate> {
    check_sizes(c, m)?;
    let psi = c.run(params)?;
    sampled_energy_of_state(&psi, &m.term_list(), shots_per_setting, grouping, rng)
}

/// Statevector expectation `⟨ψ(θ)|H|ψ(θ)⟩`.
pub fn energy_exact(c: &Circuit, params: &[f64], m: &XYModel) -> Result<f64> {
    check_sizes(c, m)?;
    let psi = c.run(params)?;
    exact_energy_of_state(&psi, m)
}

/// `⟨ψ|H|ψ⟩` evaluated in one pass per pair from the XX + YY and Z actions.
///
/// For a pair `(i, j)`, `(XX + YY)|b⟩ = 2|b ^ flip⟩` when bits `i` and `j`
/// differ and zero otherwise.
pub fn exact_energy_of_state(psi: &StateVector, m: &XYModel) -> Result<f64> {
    if psi.num_qubits() != m.n {
        return Err(Error::Argument(format!(
            "{}-site model on {}-qubit state",
            m.n,
            psi.num_qubits()
        )));
    }
    let amps = psi.amplitudes();
    let n = m.n;
    let mut hop = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let flip = (1usize << i) | (1usize << j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, a) in amps.iter().enumerate() {
                if ((b >> i) ^ (b >> j)) & 1 == 1 {
                    acc += amps[b ^ flip].conj() * a;
                }
            }
            hop += 2.0 * acc.re;
        }
    }
    let mut z = 0.0;
    for (b, a) in amps.iter().enumerate() {
        let ones = (b as u64).count_ones() as f64;
        z += a.norm_sqr() * (n as f64 - 2.0 * ones);
    }
    Ok(-m.j * hop - m.h * z)
}

fn check_sizes(c: &Circuit, m: &XYModel) -> Result<()> {
    if c.num_qubits() != m.n {
        return Err(Error::Argument(format!(
            "{}-qubit circuit for {}-site model",
            c.num_qubits(),
            m.n
        )));
    }
    Ok(())
}
