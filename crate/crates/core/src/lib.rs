//! Statevector simulation toolkit for variational ground-state searches on the
//! isotropic long-range XY chain
//!
//! ```text
//! H = -J Σ_{i<j} (X_i X_j + Y_i Y_j) - h Σ_i Z_i
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: amplitudes, gate kernels, sampling, reduced density matrices, entropy
//! - [`linalg`]: dense complex matrices and a Jacobi Hermitian eigensolver
//! - [`model`]: the Hamiltonian, its Pauli terms, and the closed-form ground states
//! - [`ansatz`]: circuit IR and the mean-field / CNOT / CRX / TQR builders
//! - [`measure`]: exact and shot-based energy estimation
//! - [`optimize`]: Nelder-Mead, Powell and SPSA with a multi-start driver
//! - [`vqe`]: the variational loop and field sweeps
//! - [`entropy`]: entanglement-entropy expressibility studies
//!
//! Basis index `b` stores qubit `q` in bit `q` (qubit 0 is the least significant bit).

pub mod ansatz;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod model;
pub mod optimize;
pub mod qstate;
pub mod rng;
pub mod vqe;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Toolkit version recorded in experiment output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
