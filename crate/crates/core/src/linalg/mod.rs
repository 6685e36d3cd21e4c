//! Dense Hermitian linear-algebra kernel.
//!
//! All operators act on `n` qubits with the computational basis indexed
//! big-endian: qubit 0 is the most significant bit of the basis index. Bit
//! value 0 is spin up (σᶻ = +1), bit value 1 is spin down (σᶻ = −1).
//!
//! Operators keep a structured representation for as long as possible
//! (pure diagonal, or diagonal plus single-site σˣ terms) and are promoted to
//! a dense matrix only when an eigendecomposition is requested or when they
//! are combined with a general dense operator.

mod eigen;
mod krylov;
mod operator;
mod state;

pub use eigen::{eigenvalues, eigh, evolve_step, spectral_norm, EigenSystem, Levels};
pub use krylov::{evolve_krylov, KrylovOptions};
pub use num_complex::Complex64;
pub use operator::{HermitianOperator, NormKind};
pub use state::StateVector;

use crate::error::{Error, Result};

/// Largest qubit count accepted for dense operators unless a caller supplies
/// its own cap.
pub const DEFAULT_QUBIT_CAP: usize = 12;

/// Elementwise tolerance used by every Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on the Euclidean norm of a [`StateVector`].
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Z,
}

/// Bit mask of `qubit` inside a basis index of an `n_qubits` register.
#[inline]
pub fn qubit_mask(qubit: usize, n_qubits: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// σᶻ eigenvalue (+1 or −1) of `qubit` in basis state `index`.
#[inline]
pub fn spin_of(index: usize, qubit: usize, n_qubits: usize) -> i8 {
    if index & qubit_mask(qubit, n_qubits) == 0 {
        1
    } else {
        -1
    }
}

/// Full spin pattern (σᶻ eigenvalues, qubit order) of a basis state.
pub fn spins_of(index: usize, n_qubits: usize) -> Vec<i8> {
    (0..n_qubits).map(|q| spin_of(index, q, n_qubits)).collect()
}

/// Basis index of a spin pattern; the inverse of [`spins_of`].
pub fn index_of_spins(spins: &[i8]) -> usize {
    let n = spins.len();
    spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < 0)
        .fold(0, |acc, (q, _)| acc | qubit_mask(q, n))
}

pub(crate) fn check_qubits(n_qubits: usize, cap: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > cap {
        return Err(Error::DimensionCap { n_qubits, cap });
    }
    Ok(1 << n_qubits)
}

pub(crate) fn log2_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Single-site Pauli operator `I ⊗ … ⊗ σ(axis) ⊗ … ⊗ I` with the Pauli at
/// position `site`, using [`DEFAULT_QUBIT_CAP`].
pub fn embed_single_site(axis: Axis, site: usize, n_qubits: usize) -> Result<HermitianOperator> {
    embed_single_site_with_cap(axis, site, n_qubits, DEFAULT_QUBIT_CAP)
}

pub fn embed_single_site_with_cap(
    axis: Axis,
    site: usize,
    n_qubits: usize,
    cap: usize,
) -> Result<HermitianOperator> {
    let dim = check_qubits(n_qubits, cap)?;
    if site >= n_qubits {
        return Err(Error::SiteOutOfRange { site, n_qubits });
    }
    match axis {
        Axis::Z => {
            let diag = (0..dim)
                .map(|b| f64::from(spin_of(b, site, n_qubits)))
                .collect();
            HermitianOperator::from_diagonal(diag)
        }
        Axis::X => {
            let mut x = vec![0.0; n_qubits];
            x[site] = 1.0;
            HermitianOperator::transverse(x, vec![0.0; dim])
        }
    }
}
