//! Steered quantum annealing on small spin systems.
//!
//! The annealing path runs from a per-qubit rotated transverse field, whose
//! ground state is biased toward a guessed spin pattern, to a diagonal
//! problem Hamiltonian (random Ising or unique-solution 3SAT). The crate
//! provides exact spectra and gaps along the path, adiabatic-time profiles and
//! optimal schedules, finite-time Schrödinger evolution, a perturbative
//! large-`n` estimate of the target overlap, and a seeded experiment harness.
//!
//! Basis states are big-endian: qubit 0 is the most significant bit, and bit
//! value 0 means `σᶻ = +1`.

pub mod anneal;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod models;
pub mod perturbation;
pub mod rng;
pub mod steering;

pub use anneal::{AnnealPath, MinGap, ScheduleProfile, SpectrumTrace};
pub use dynamics::{EvolutionResult, EvolveOptions, Schedule};
pub use error::{Error, Result};
pub use experiments::{EnsembleResult, ExperimentConfig, ExperimentKind};
pub use linalg::{HermitianOperator, NormKind, StateVector};
pub use models::{DiagonalHamiltonian, Instance, IsingInstance, SatInstance};
pub use steering::{GuessVector, SteeringAngle, ThetaVector};
