//! The isotropic long-range XY chain
//!
//! ```text
//! H = -J Σ_{i<j} (X_i X_j + Y_i Y_j) - h Σ_i Z_i
//! ```
//!
//! together with its Pauli decomposition, the closed-form symmetric-sector
//! solution, the mean-field energy, and a dense-matrix oracle.
//!
//! Excitation count `n` follows the physics convention: `n` is the number of
//! up spins, i.e. qubits in `|0⟩` (`Z = +1`). The sector energy per site is
//! `(1 - 2n/N) h - 2 J n (1 - n/N)`, and its ground state is the Dicke state of
//! Hamming weight `N - n` in the computational basis.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qstate::StateVector;

/// Largest chain for which [`dense_hamiltonian`] is built.
pub const MAX_DENSE_SITES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let rows = match self {
            Pauli::I => vec![vec![o, z], vec![z, o]],
            Pauli::X => vec![vec![z, o], vec![o, z]],
            Pauli::Y => vec![vec![z, -i], vec![i, z]],
            Pauli::Z => vec![vec![o, z], vec![z, -o]],
        };
        CMatrix::from_rows(&rows).expect("2x2")
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `coefficient · P_0 ⊗ P_1 ⊗ … ⊗ P_{N-1}`; `letters[q]` acts on qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coefficient: f64,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Self {
        Self { coefficient, letters }
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// `(x_mask, z_mask, number of Y letters)`; `P|b⟩ = i^{ny} (-1)^{|b & z|} |b ^ x⟩`.
    pub fn masks(&self) -> (usize, usize, u32) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (q, p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    ny += 1;
                }
                Pauli::Z => z |= 1 << q,
            }
        }
        (x, z, ny)
    }

    /// `⟨ψ|P|ψ⟩` without the coefficient, evaluated by direct Pauli action.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.num_qubits() != self.num_qubits() {
            return Err(Error::Argument(format!(
                "{}-qubit Pauli string on {}-qubit state",
                self.num_qubits(),
                psi.num_qubits()
            )));
        }
        let (x, z, ny) = self.masks();
        let amps = psi.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            let term = amps[b ^ x].conj() * a;
            if (b & z).count_ones() % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        let phase = match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Ok((acc * phase).re)
    }

    /// Dense `2^N × 2^N` matrix including the coefficient.
    pub fn dense(&self) -> CMatrix {
        // qubit 0 is the least significant bit, so it is the rightmost factor
        let mut m = CMatrix::identity(1);
        for p in self.letters.iter().rev() {
            m = m.kron(&p.matrix());
        }
        m.scale(Complex64::new(self.coefficient, 0.0))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.letters.iter().map(|p| p.symbol()).collect();
        write!(f, "{:+}·{}", self.coefficient, s)
    }
}

/// Coupling `j`, Zeeman field `h`, and chain length `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XYModel {
    pub j: f64,
    pub h: f64,
    pub n: usize,
}

impl XYModel {
    pub fn new(j: f64, h: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("chain length {n} < 2")));
        }
        if !j.is_finite() || !h.is_finite() {
            return Err(Error::Argument("J and h must be finite".into()));
        }
        Ok(Self { j, h, n })
    }

    pub fn with_field(self, h: f64) -> Self {
        Self { h, ..self }
    }

    /// All `N²` Pauli terms: XX pairs `(i<j)` lexicographically, then YY pairs,
    /// then single-site Z.
    pub fn term_list(&self) -> Vec<PauliString> {
        let n = self.n;
        let mut terms = Vec::with_capacity(n * n);
        for axis in [Pauli::X, Pauli::Y] {
            for i in 0..n {
                for j in i + 1..n {
                    let mut letters = vec![Pauli::I; n];
                    letters[i] = axis;
                    letters[j] = axis;
                    terms.push(PauliString::new(-self.j, letters));
                }
            }
        }
        for i in 0..n {
            let mut letters = vec![Pauli::I; n];
            letters[i] = Pauli::Z;
            terms.push(PauliString::new(-self.h, letters));
        }
        terms
    }

    /// `⟨ψ|H|ψ⟩` summed term by term.
    pub fn energy(&self, psi: &StateVector) -> Result<f64> {
        self.term_list()
            .iter()
            .map(|t| Ok(t.coefficient * t.expectation(psi)?))
            .sum()
    }
}

/// Dense Hamiltonian from the Pauli terms, `N <= 8`.
pub fn dense_hamiltonian(m: &XYModel) -> Result<CMatrix> {
    check_dense(m.n)?;
    let dim = 1usize << m.n;
    Ok(m
        .term_list()
        .iter()
        .fold(CMatrix::zeros(dim), |acc, t| &acc + &t.dense()))
}

/// `-2J S⁺S⁻ + (J - h) S_z + J N` with `S^± = (S_x ± i S_y)/2` and
/// `S_a = Σ_i σ^a_i`, built from collective operators.
pub fn collective_hamiltonian(m: &XYModel) -> Result<CMatrix> {
    check_dense(m.n)?;
    let n = m.n;
    let dim = 1usize << n;
    let collective = |p: Pauli| {
        (0..n).fold(CMatrix::zeros(dim), |acc, site| {
            let mut letters = vec![Pauli::I; n];
            letters[site] = p;
            &acc + &PauliString::new(1.0, letters).dense()
        })
    };
    let sx = collective(Pauli::X);
    let sy = collective(Pauli::Y);
    let sz = collective(Pauli::Z);
    let i_sy = sy.scale(Complex64::new(0.0, 1.0));
    let half = Complex64::new(0.5, 0.0);
    let s_plus = (&sx + &i_sy).scale(half);
    let s_minus = (&sx - &i_sy).scale(half);
    let hop = (&s_plus * &s_minus).scale(Complex64::new(-2.0 * m.j, 0.0));
    let field = sz.scale(Complex64::new(m.j - m.h, 0.0));
    let shift = CMatrix::identity(dim).scale(Complex64::new(m.j * n as f64, 0.0));
    Ok(&(&hop + &field) + &shift)
}

fn check_dense(n: usize) -> Result<()> {
    if n > MAX_DENSE_SITES {
        return Err(Error::Size(format!(
            "dense Hamiltonian limited to N <= {MAX_DENSE_SITES}, got {n}"
        )));
    }
    Ok(())
}

/// Energy per site of the symmetric state with `n` up spins.
pub fn sym_energy_per_site(n: usize, sites: usize, j: f64, h: f64) -> Result<f64> {
    if n > sites {
        return Err(Error::Argument(format!(
            "excitation count {n} exceeds chain length {sites}"
        )));
    }
    let x = n as f64 / sites as f64;
    Ok((1.0 - 2.0 * x) * h - 2.0 * j * n as f64 * (1.0 - x))
}

/// Exact ground energy per site and its sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactGround {
    pub energy_per_site: f64,
    /// Minimising excitation count; the smaller one at a level crossing.
    pub n_star: usize,
    /// Set when the next sector up (`n_star + 1`) has the same energy.
    pub degenerate: bool,
}

/// Relative tolerance used to call two sector energies equal.
const DEGENERACY_TOL: f64 = 1e-12;

pub fn exact_ground_energy_per_site(sites: usize, j: f64, h: f64) -> ExactGround {
    let energies: Vec<f64> = (0..=sites)
        .map(|n| sym_energy_per_site(n, sites, j, h).expect("n <= sites"))
        .collect();
    let (n_star, &e) = energies
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let scale = 1.0 + j.abs() + h.abs();
    let degenerate = energies
        .iter()
        .enumerate()
        .any(|(n, &en)| n != n_star && (en - e).abs() <= DEGENERACY_TOL * scale * sites as f64);
    ExactGround {
        energy_per_site: e,
        n_star,
        degenerate,
    }
}

/// Fields `J (2n + 1 - N)` for `n = 0..N-1` at which sectors `n` and `n+1` cross.
pub fn critical_fields(sites: usize, j: f64) -> Vec<f64> {
    let mut fields: Vec<f64> = (0..sites)
        .map(|n| j * (2.0 * n as f64 + 1.0 - sites as f64))
        .collect();
    fields.sort_by(f64::total_cmp);
    fields
}

/// Uniform superposition of all basis states of Hamming weight `weight`.
pub fn dicke_state(sites: usize, weight: usize) -> Result<StateVector> {
    if weight > sites {
        return Err(Error::Argument(format!(
            "Dicke weight {weight} exceeds {sites} qubits"
        )));
    }
    let dim = 1usize << sites;
    let amp = 1.0 / (binomial(sites, weight) as f64).sqrt();
    let amps = (0..dim)
        .map(|b| {
            if (b as u64).count_ones() as usize == weight {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// Ground state of the sector with `n` up spins: weight `N - n` Dicke state.
pub fn sector_ground_state(sites: usize, n: usize) -> Result<StateVector> {
    if n > sites {
        return Err(Error::Argument(format!(
            "excitation count {n} exceeds chain length {sites}"
        )));
    }
    dicke_state(sites, sites - n)
}

/// Exact ground state(s) of the chain.
#[derive(Debug, Clone)]
pub struct ExactGroundState {
    pub state: StateVector,
    pub energy_per_site: f64,
    pub n_star: usize,
    /// Ground state of the tied sector `n_star + 1` at a level crossing.
    pub degenerate_partner: Option<StateVector>,
}

impl ExactGroundState {
    pub fn degenerate(&self) -> bool {
        self.degenerate_partner.is_some()
    }

    /// Largest fidelity of `psi` with any of the degenerate ground states.
    pub fn fidelity(&self, psi: &StateVector) -> Result<f64> {
        let f = self.state.fidelity(psi)?;
        match &self.degenerate_partner {
            Some(other) => Ok(f.max(other.fidelity(psi)?)),
            None => Ok(f),
        }
    }
}

pub fn exact_ground_state(sites: usize, j: f64, h: f64) -> Result<ExactGroundState> {
    let g = exact_ground_energy_per_site(sites, j, h);
    let state = sector_ground_state(sites, g.n_star)?;
    let degenerate_partner = if g.degenerate && g.n_star < sites {
        Some(sector_ground_state(sites, g.n_star + 1)?)
    } else {
        None
    };
    Ok(ExactGroundState {
        state,
        energy_per_site: g.energy_per_site,
        n_star: g.n_star,
        degenerate_partner,
    })
}

/// Mean-field product-state energy for polar angles `thetas` and azimuths `phis`.
pub fn mf_energy(thetas: &[f64], phis: &[f64], j: f64, h: f64) -> Result<f64> {
    if thetas.len() != phis.len() {
        return Err(Error::Argument(format!(
            "{} polar angles but {} azimuths",
            thetas.len(),
            phis.len()
        )));
    }
    let mut hop = 0.0;
    for p in 0..thetas.len() {
        for q in p + 1..thetas.len() {
            hop += thetas[p].sin() * thetas[q].sin() * (phis[p] - phis[q]).cos();
        }
    }
    let field: f64 = thetas.iter().map(|t| t.cos()).sum();
    Ok(-j * hop - h * field)
}

/// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn bloch_vector(theta: f64, phi: f64) -> (f64, f64, f64) {
    (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Minimum of [`mf_energy`] per site for `J >= 0`.
///
/// All spins share one polar angle at the optimum, so the per-site energy is
/// `-J (N-1)/2 sin²θ - h cos θ`, minimised at `cos θ = h / (J (N-1))` inside the
/// canted region and at the poles outside it.
pub fn mf_ground_energy_per_site(sites: usize, j: f64, h: f64) -> f64 {
    let k = j * (sites as f64 - 1.0);
    if k > 0.0 && h.abs() <= k {
        -k / 2.0 - h * h / (2.0 * k)
    } else {
        -h.abs()
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}
