//! Problem instances whose final Hamiltonians are diagonal in the
//! computational basis: random long-range Ising models and 1-in-3
//! satisfiability instances with a unique solution.
//!
//! Spin convention: bit 0 is σᶻ = +1 (spin up, SAT value false) and bit 1 is
//! σᶻ = −1 (spin down, SAT value true).

mod file;
mod ising;
mod sat;

pub use file::{deserialize_instance, serialize_instance, Instance, FORMAT_VERSION};
pub use ising::{gen_ising, ising_hamiltonian, IsingInstance, IsingMeta};
pub use sat::{
    count_satisfying, gen_unique_3sat, sat_hamiltonian, SatInstance, SatMeta, MAX_SAT_VARS,
};

use crate::error::Result;
use crate::linalg::{log2_dim, HermitianOperator};

/// Energy ties closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Final Hamiltonian stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    n: usize,
    energies: Vec<f64>,
}

/// Lowest entry of a [`DiagonalHamiltonian`] and its degenerate partners.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub index: usize,
    pub energy: f64,
    /// All basis states within [`DEGENERACY_TOL`] of the minimum, ascending.
    pub manifold: Vec<usize>,
}

impl GroundState {
    pub fn degeneracy(&self) -> usize {
        self.manifold.len()
    }
}

impl DiagonalHamiltonian {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        let n = log2_dim(energies.len())?;
        Ok(DiagonalHamiltonian { n, energies })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn to_operator(&self) -> HermitianOperator {
        HermitianOperator::from_diagonal(self.energies.clone())
            .expect("energies length is a power of two")
    }

    pub fn ground_state(&self) -> GroundState {
        ground_state_of_diagonal(self)
    }
}

/// Argmin, minimum and ground manifold of a diagonal Hamiltonian. The
/// reported index is the lowest index attaining the minimum.
pub fn ground_state_of_diagonal(h: &DiagonalHamiltonian) -> GroundState {
    let energies = h.energies();
    let (index, energy) =
        energies
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, be), (i, e)| if e < be { (i, e) } else { (bi, be) },
            );
    let manifold = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| (e - energy).abs() <= DEGENERACY_TOL)
        .map(|(i, _)| i)
        .collect();
    GroundState {
        index,
        energy,
        manifold,
    }
}
