use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::DiagonalHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::qubit_mask;
use crate::rng;

/// Largest variable count accepted by brute-force enumeration.
pub const MAX_SAT_VARS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatMeta {
    pub seed: u64,
}

/// Exactly-one-true (1-in-3) satisfiability instance over positive
/// variables. A clause `(i, j, k)` is satisfied when exactly one of the
/// three variables is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInstance {
    n: usize,
    clauses: Vec<[usize; 3]>,
    meta: Option<SatMeta>,
}

impl SatInstance {
    pub fn new(n: usize, clauses: Vec<[usize; 3]>, meta: Option<SatMeta>) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!(
                "3SAT instance needs n >= 3, got {n}"
            )));
        }
        for c in &clauses {
            if c.iter().any(|&v| v >= n) {
                return Err(Error::invalid(format!(
                    "clause {c:?} has a variable index >= n = {n}"
                )));
            }
            if c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                return Err(Error::invalid(format!("clause {c:?} repeats a variable")));
            }
        }
        Ok(SatInstance { n, clauses, meta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[[usize; 3]] {
        &self.clauses
    }

    pub fn meta(&self) -> Option<&SatMeta> {
        self.meta.as_ref()
    }

    /// Number of true variables of `clause` in basis state `index`.
    fn true_count(&self, clause: &[usize; 3], index: usize) -> u32 {
        clause
            .iter()
            .filter(|&&v| index & qubit_mask(v, self.n) != 0)
            .count() as u32
    }

    pub fn is_satisfied_by(&self, index: usize) -> bool {
        self.clauses.iter().all(|c| self.true_count(c, index) == 1)
    }

    /// QUBO energy `Σ_c (b_c − 1)²` of a basis state.
    pub fn energy(&self, index: usize) -> f64 {
        self.clauses
            .iter()
            .map(|c| {
                let b = f64::from(self.true_count(c, index));
                (b - 1.0) * (b - 1.0)
            })
            .sum()
    }

    /// Satisfying assignments in ascending basis order.
    pub fn satisfying_assignments(&self) -> Result<Vec<usize>> {
        check_enumerable(self.n)?;
        Ok((0..1usize << self.n)
            .filter(|&b| self.is_satisfied_by(b))
            .collect())
    }
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > MAX_SAT_VARS {
        return Err(Error::DimensionCap {
            n_qubits: n,
            cap: MAX_SAT_VARS,
        });
    }
    Ok(())
}

/// Brute-force count of satisfying assignments.
pub fn count_satisfying(inst: &SatInstance) -> Result<usize> {
    check_enumerable(inst.n)?;
    Ok((0..1usize << inst.n)
        .filter(|&b| inst.is_satisfied_by(b))
        .count())
}

pub fn sat_hamiltonian(inst: &SatInstance) -> DiagonalHamiltonian {
    let energies = (0..1usize << inst.n).map(|b| inst.energy(b)).collect();
    DiagonalHamiltonian::new(energies).expect("2^n entries")
}

/// Unique-solution instance built by rejection: random clauses are appended
/// one at a time, a clause that would leave no satisfying assignment is
/// discarded, and generation stops once exactly one assignment survives.
/// Each drawn clause counts as one attempt; exact repeats of an accepted
/// clause are discarded.
pub fn gen_unique_3sat(n: usize, seed: u64, max_attempts: usize) -> Result<SatInstance> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "3SAT instance needs n >= 3, got {n}"
        )));
    }
    check_enumerable(n)?;
    let mut r = rng::seeded(seed);
    let mut inst = SatInstance {
        n,
        clauses: Vec::new(),
        meta: Some(SatMeta { seed }),
    };
    let mut alive: Vec<usize> = (0..1usize << n).collect();
    for _ in 0..max_attempts {
        let picked = sample(&mut r, n, 3);
        let mut clause = [picked.index(0), picked.index(1), picked.index(2)];
        clause.sort_unstable();
        if inst.clauses.contains(&clause) {
            continue;
        }
        let survivors: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&b| inst.true_count(&clause, b) == 1)
            .collect();
        if survivors.is_empty() {
            continue;
        }
        inst.clauses.push(clause);
        alive = survivors;
        if alive.len() == 1 {
            return Ok(inst);
        }
    }
    Err(Error::GenerationExhausted {
        attempts: max_attempts,
    })
}
