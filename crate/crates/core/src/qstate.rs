//! Statevector register, gate kernels, sampling and entanglement entropy.
//!
//! Basis index `b` encodes qubit `q` in bit `q` of `b`, so qubit 0 is the least
//! significant bit. A ket written `|q0 q1 … q(N-1)⟩` therefore has index
//! `q0 + 2 q1 + 4 q2 + …`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::rng::SimRng;

/// Default register cap.
pub const MAX_QUBITS: usize = 24;

/// Eigenvalues below this contribute nothing to the von Neumann entropy.
pub const ENTROPY_EPS: f64 = 1e-12;

const UNITARY_TOL: f64 = 1e-10;

/// 2×2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

/// Outcome histogram: basis index to number of shots.
pub type Histogram = BTreeMap<usize, u64>;

/// Closed-form single-qubit gate matrices.
pub mod gates {
    use super::Mat2;
    use num_complex::Complex64;

    const fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `e^{-iθY/2}`
    pub fn ry(theta: f64) -> Mat2 {
        let (s, co) = (theta / 2.0).sin_cos();
        [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
    }

    /// `e^{-iθX/2}`
    pub fn rx(theta: f64) -> Mat2 {
        let (s, co) = (theta / 2.0).sin_cos();
        [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
    }

    /// `e^{-iθZ/2}`
    pub fn rz(theta: f64) -> Mat2 {
        let (s, co) = (theta / 2.0).sin_cos();
        [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]
    }

    pub fn pauli_x() -> Mat2 {
        [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
    }

    pub fn pauli_y() -> Mat2 {
        [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
    }

    pub fn pauli_z() -> Mat2 {
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
    }

    pub fn hadamard() -> Mat2 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]]
    }

    pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    pub fn adjoint(a: &Mat2) -> Mat2 {
        [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
    }

    /// Largest entrywise deviation of `u†u` from the identity.
    pub fn unitarity_error(u: &Mat2) -> f64 {
        let p = matmul(&adjoint(u), u);
        [
            (p[0][0] - c(1.0, 0.0)).norm(),
            p[0][1].norm(),
            p[1][0].norm(),
            (p[1][1] - c(1.0, 0.0)).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Axis of a two-qubit rotation `e^{-iθ A⊗A / 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoQubitAxis {
    XX,
    YY,
}

/// Pure state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits, `1 <= n <= MAX_QUBITS`.
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Argument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits: n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the vector
    /// normalised to within `1e-8`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Size(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_qubit_count(n)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Validation(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self { num_qubits: n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::Argument(format!(
                "qubit {q} out of range for {}-qubit register",
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// Applies `u` to `target`.
    ///
    /// Unitarity of `u` is checked in debug builds only.
    pub fn apply_1q(&mut self, u: &Mat2, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        if cfg!(debug_assertions) {
            check_unitary(u)?;
        }
        let stride = 1usize << target;
        for base in (0..self.amps.len()).step_by(stride << 1) {
            for i0 in base..base + stride {
                let i1 = i0 | stride;
                let (a0, a1) = (self.amps[i0], self.amps[i1]);
                self.amps[i0] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i1] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Applies `u` to `target` on the subspace where `control` is 1.
    pub fn apply_ctrl_1q(&mut self, u: &Mat2, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Argument(format!(
                "control and target are both qubit {control}"
            )));
        }
        if cfg!(debug_assertions) {
            check_unitary(u)?;
        }
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i0 in 0..self.amps.len() {
            if i0 & cbit == 0 || i0 & tbit != 0 {
                continue;
            }
            let i1 = i0 | tbit;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[i1] = u[1][0] * a0 + u[1][1] * a1;
        }
        Ok(())
    }

    /// Applies `cos(θ/2) I - i sin(θ/2) A_i A_j` with `A` the Pauli of `axis`.
    pub fn apply_2q_rotation(
        &mut self,
        axis: TwoQubitAxis,
        angle: f64,
        i: usize,
        j: usize,
    ) -> Result<()> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Err(Error::Argument(format!(
                "two-qubit rotation on repeated qubit {i}"
            )));
        }
        let (s, c) = (angle / 2.0).sin_cos();
        let cos = Complex64::new(c, 0.0);
        let mis = Complex64::new(0.0, -s);
        let flip = (1usize << i) | (1usize << j);
        for b in 0..self.amps.len() {
            let partner = b ^ flip;
            if partner < b {
                continue;
            }
            // X⊗X|b⟩ = |b^flip⟩; Y⊗Y|b⟩ = -(−1)^{bi+bj}|b^flip⟩
            let sign = match axis {
                TwoQubitAxis::XX => 1.0,
                TwoQubitAxis::YY => {
                    if ((b >> i) ^ (b >> j)) & 1 == 1 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let (a, p) = (self.amps[b], self.amps[partner]);
            self.amps[b] = cos * a + mis * sign * p;
            self.amps[partner] = cos * p + mis * sign * a;
        }
        Ok(())
    }

    /// `Σ_b conj(self[b]) other[b]`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Argument(format!(
                "inner product of {}- and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`, clamped to `[0, 1]`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Draws `shots` i.i.d. computational-basis outcomes.
    pub fn sample_counts(&self, shots: u64, rng: &mut SimRng) -> Result<Histogram> {
        if shots == 0 {
            return Err(Error::Argument("shots must be positive".into()));
        }
        let probs = self.probabilities();
        let total: f64 = probs.iter().sum();
        let mut counts = Histogram::new();
        if (probs.len() as u64) <= shots {
            // multinomial draw as a chain of conditional binomials
            let mut left = shots;
            let mut mass = total;
            for (idx, &p) in probs.iter().enumerate() {
                if left == 0 {
                    break;
                }
                if p <= 0.0 {
                    mass -= p;
                    continue;
                }
                let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
                let k = if q >= 1.0 {
                    left
                } else {
                    Binomial::new(left, q).expect("valid binomial").sample(rng)
                };
                if k > 0 {
                    counts.insert(idx, k);
                }
                left -= k;
                mass -= p;
            }
            if left > 0 {
                let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
                *counts.entry(last).or_insert(0) += left;
            }
            return Ok(counts);
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            // skip zero-probability bins left of a rounding edge
            let idx = (0..=idx).rev().find(|&k| probs[k] > 0.0).unwrap_or(idx);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Reduced state of qubits `0..cut` after tracing out qubits `cut..N`.
    pub fn reduced_density_matrix(&self, cut: usize) -> Result<DensityMatrix> {
        if cut > self.num_qubits {
            return Err(Error::Argument(format!(
                "cut {cut} outside 0..={}",
                self.num_qubits
            )));
        }
        let keep = 1usize << cut;
        let rest = self.amps.len() >> cut;
        let rho = CMatrix::from_fn(keep, |a, a2| {
            (0..rest)
                .map(|r| self.amps[a + r * keep] * self.amps[a2 + r * keep].conj())
                .sum()
        });
        Ok(DensityMatrix { rho })
    }

    /// Reduced state of qubits `cut..N` after tracing out qubits `0..cut`.
    pub fn reduced_density_matrix_right(&self, cut: usize) -> Result<DensityMatrix> {
        if cut > self.num_qubits {
            return Err(Error::Argument(format!(
                "cut {cut} outside 0..={}",
                self.num_qubits
            )));
        }
        let traced = 1usize << cut;
        let keep = self.amps.len() >> cut;
        let rho = CMatrix::from_fn(keep, |a, a2| {
            (0..traced)
                .map(|l| self.amps[l + a * traced] * self.amps[l + a2 * traced].conj())
                .sum()
        });
        Ok(DensityMatrix { rho })
    }

    /// Entropy (bits) across the bond left of qubit `cut`, computed from the
    /// smaller of the two blocks.
    pub fn cut_entropy(&self, cut: usize) -> Result<f64> {
        if cut > self.num_qubits {
            return Err(Error::Argument(format!(
                "cut {cut} outside 0..={}",
                self.num_qubits
            )));
        }
        if cut == 0 || cut == self.num_qubits {
            return Ok(0.0);
        }
        let rho = if 2 * cut <= self.num_qubits {
            self.reduced_density_matrix(cut)?
        } else {
            self.reduced_density_matrix_right(cut)?
        };
        rho.von_neumann_entropy()
    }
}

fn check_qubit_count(n: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::Size(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn check_unitary(u: &Mat2) -> Result<()> {
    let err = gates::unitarity_error(u);
    if err > UNITARY_TOL {
        return Err(Error::Validation(format!(
            "gate matrix is not unitary (deviation {err:.3e})"
        )));
    }
    Ok(())
}

/// Density matrix of a (sub)register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: CMatrix,
}

impl DensityMatrix {
    /// Validates dimension (power of two), hermiticity and unit trace.
    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        if !rho.dim().is_power_of_two() {
            return Err(Error::Size(format!(
                "density matrix dimension {} is not a power of two",
                rho.dim()
            )));
        }
        let herm = rho.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::Validation(format!("density matrix trace is {tr}")));
        }
        Ok(Self { rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigen(&self.rho)?.values)
    }

    /// `-Tr ρ log2 ρ`.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        if self.dim() == 1 {
            return Ok(0.0);
        }
        Ok(entropy_of_spectrum(&self.eigenvalues()?))
    }
}

/// `-Σ λ log2 λ` over `λ > ENTROPY_EPS`.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_EPS)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}
