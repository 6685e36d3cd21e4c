use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::DiagonalHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::spin_of;
use crate::rng;

/// Parameters an Ising instance was drawn with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingMeta {
    pub h_mean: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "J_s")]
    pub j_s: f64,
    pub seed: u64,
}

/// `H_f = Σ_i h_i σᶻ_i + Σ_{i<j} J_ij σᶻ_i σᶻ_j`.
///
/// Couplings are stored only for `i < j`, packed row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    h: Vec<f64>,
    couplings: Vec<f64>,
    meta: Option<IsingMeta>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    // offset of row i in the packed strict upper triangle, then column.
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl IsingInstance {
    /// Builds an instance from fields and a list of `(i, j, J_ij)` couplings
    /// with `i < j`. Unlisted pairs have zero coupling.
    pub fn new(
        h: Vec<f64>,
        couplings: &[(usize, usize, f64)],
        meta: Option<IsingMeta>,
    ) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::invalid("Ising instance needs at least one spin"));
        }
        let mut packed = vec![0.0; n * (n - 1) / 2];
        let mut seen = vec![false; packed.len()];
        for &(i, j, v) in couplings {
            if i >= j || j >= n {
                return Err(Error::invalid(format!(
                    "coupling ({i}, {j}) must satisfy i < j < n = {n}"
                )));
            }
            let k = pair_index(n, i, j);
            if seen[k] {
                return Err(Error::invalid(format!("coupling ({i}, {j}) listed twice")));
            }
            seen[k] = true;
            packed[k] = v;
        }
        let inst = IsingInstance {
            n,
            h,
            couplings: packed,
            meta,
        };
        inst.check_meta_bounds()?;
        Ok(inst)
    }

    fn check_meta_bounds(&self) -> Result<()> {
        let Some(m) = self.meta else { return Ok(()) };
        let slack = 1e-12;
        if let Some(v) = self.couplings.iter().find(|v| v.abs() > m.j_s + slack) {
            return Err(Error::invalid(format!(
                "|J| = {} exceeds J_s = {}",
                v.abs(),
                m.j_s
            )));
        }
        if let Some(v) = self.h.iter().find(|v| (*v - m.h_mean).abs() > m.w + slack) {
            return Err(Error::invalid(format!(
                "h = {v} outside [h_mean - W, h_mean + W] = [{}, {}]",
                m.h_mean - m.w,
                m.h_mean + m.w
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// `J_ij` for `i < j`; zero on and below the diagonal.
    pub fn j(&self, i: usize, j: usize) -> f64 {
        if i < j && j < self.n {
            self.couplings[pair_index(self.n, i, j)]
        } else {
            0.0
        }
    }

    /// All `(i, j, J_ij)` with `i < j`, row by row.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(self.couplings.iter().copied())
            .map(|((i, j), v)| (i, j, v))
    }

    pub fn meta(&self) -> Option<&IsingMeta> {
        self.meta.as_ref()
    }

    pub fn sum_h(&self) -> f64 {
        self.h.iter().sum()
    }

    pub fn sum_j(&self) -> f64 {
        self.couplings.iter().sum()
    }

    /// Classical energy of a basis state.
    pub fn energy(&self, index: usize) -> f64 {
        let s: Vec<f64> = (0..self.n)
            .map(|q| f64::from(spin_of(index, q, self.n)))
            .collect();
        let field: f64 = self.h.iter().zip(&s).map(|(h, s)| h * s).sum();
        let coupling: f64 = self.couplings().map(|(i, j, v)| v * s[i] * s[j]).sum();
        field + coupling
    }
}

/// Random long-range Ising instance: `J_ij ~ U[−J_s, J_s]` for every pair
/// and `h_i = h_mean + W_i` with `W_i ~ U[−W, W]`. Fields are drawn first,
/// then couplings row by row.
pub fn gen_ising(n: usize, h_mean: f64, w: f64, j_s: f64, seed: u64) -> Result<IsingInstance> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "Ising instance needs n >= 2, got {n}"
        )));
    }
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::invalid(format!(
            "W must be finite and >= 0, got {w}"
        )));
    }
    if !(j_s > 0.0 && j_s.is_finite()) {
        return Err(Error::invalid(format!(
            "J_s must be finite and > 0, got {j_s}"
        )));
    }
    if !h_mean.is_finite() {
        return Err(Error::invalid("h_mean must be finite"));
    }
    let mut r = rng::seeded(seed);
    let h = (0..n)
        .map(|_| {
            if w == 0.0 {
                h_mean
            } else {
                h_mean + r.random_range(-w..=w)
            }
        })
        .collect();
    let couplings = (0..n * (n - 1) / 2)
        .map(|_| r.random_range(-j_s..=j_s))
        .collect();
    Ok(IsingInstance {
        n,
        h,
        couplings,
        meta: Some(IsingMeta {
            h_mean,
            w,
            j_s,
            seed,
        }),
    })
}

/// Diagonal of `H_f` over all `2ⁿ` basis states.
pub fn ising_hamiltonian(inst: &IsingInstance) -> DiagonalHamiltonian {
    let n = inst.n;
    let energies = (0..1usize << n).map(|b| inst.energy(b)).collect();
    DiagonalHamiltonian::new(energies).expect("2^n entries")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{embed_single_site, Axis, HermitianOperator};
    use crate::models::ground_state_of_diagonal;

    #[test]
    fn spin_glass_regime_bounds() {
        for seed in 0..20 {
            let inst = gen_ising(8, 0.01, 0.05, 1.0, seed).unwrap();
            assert!(inst.couplings().all(|(_, _, v)| v.abs() <= 1.0));
            assert!(inst.h().iter().all(|&h| (-0.04..=0.06).contains(&h)));
            assert_eq!(inst.couplings().count(), 28);
        }
    }

    #[test]
    fn zero_width_fields_are_exact() {
        let inst = gen_ising(5, 0.3, 0.0, 1.0, 9).unwrap();
        assert!(inst.h().iter().all(|&h| h == 0.3));
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            gen_ising(6, 0.01, 0.05, 1.0, 3).unwrap(),
            gen_ising(6, 0.01, 0.05, 1.0, 3).unwrap()
        );
        assert_ne!(
            gen_ising(6, 0.01, 0.05, 1.0, 3).unwrap(),
            gen_ising(6, 0.01, 0.05, 1.0, 4).unwrap()
        );
    }

    #[test]
    fn invalid_parameters() {
        assert!(gen_ising(1, 0.0, 0.1, 1.0, 0).is_err());
        assert!(gen_ising(4, 0.0, -0.1, 1.0, 0).is_err());
        assert!(gen_ising(4, 0.0, 0.1, 0.0, 0).is_err());
        assert!(IsingInstance::new(vec![0.0; 3], &[(1, 1, 0.5)], None).is_err());
        assert!(IsingInstance::new(vec![0.0; 3], &[(0, 1, 0.5), (0, 1, 0.2)], None).is_err());
    }

    #[test]
    fn small_hamiltonians() {
        let one = IsingInstance::new(vec![0.5], &[], None).unwrap();
        assert_eq!(ising_hamiltonian(&one).energies(), &[0.5, -0.5]);

        let pair = IsingInstance::new(vec![0.0, 0.0], &[(0, 1, 1.0)], None).unwrap();
        assert_eq!(ising_hamiltonian(&pair).energies(), &[1.0, -1.0, -1.0, 1.0]);

        // Enumerating (↑↑, ↑↓, ↓↑, ↓↓): 2−1, 0+1, 0+1, −2−1.
        let biased = IsingInstance::new(vec![1.0, 1.0], &[(0, 1, -1.0)], None).unwrap();
        let hf = ising_hamiltonian(&biased);
        assert_eq!(hf.energies(), &[1.0, 1.0, 1.0, -3.0]);
        let gs = ground_state_of_diagonal(&hf);
        assert_eq!((gs.index, gs.energy, gs.degeneracy()), (3, -3.0, 1));
    }

    #[test]
    fn zero_field_spectrum_is_flip_symmetric() {
        for seed in 0..10 {
            let inst = gen_ising(6, 0.0, 0.0, 1.0, seed).unwrap();
            let e = ising_hamiltonian(&inst);
            let full = (1 << 6) - 1;
            for b in 0..64 {
                assert_eq!(e.energies()[b], e.energies()[b ^ full]);
            }
            assert!(ground_state_of_diagonal(&e).degeneracy() >= 2);
        }
    }

    #[test]
    fn agrees_with_pauli_assembly() {
        for n in 2..=6 {
            for seed in 0..20 {
                let inst = gen_ising(n, 0.01, 0.05, 1.0, 100 * n as u64 + seed).unwrap();
                let mut op = HermitianOperator::zeros(n);
                let z: Vec<HermitianOperator> = (0..n)
                    .map(|q| embed_single_site(Axis::Z, q, n).unwrap())
                    .collect();
                for (q, &h) in inst.h().iter().enumerate() {
                    op = op.combine(1.0, &z[q], h).unwrap();
                }
                for (i, j, v) in inst.couplings() {
                    let zz: Vec<f64> = z[i]
                        .diagonal()
                        .unwrap()
                        .iter()
                        .zip(z[j].diagonal().unwrap())
                        .map(|(a, b)| a * b)
                        .collect();
                    let zz = HermitianOperator::from_diagonal(zz).unwrap();
                    op = op.combine(1.0, &zz, v).unwrap();
                }
                let expected = ising_hamiltonian(&inst);
                for (a, b) in op.diagonal().unwrap().iter().zip(expected.energies()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
