use faer::{c64, Mat, Side};
use num_complex::Complex64;

use super::operator::{HermitianOperator, Repr};
use super::state::StateVector;
use crate::error::{Error, Result};

/// How many eigenpairs [`eigh`] should keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Levels {
    All,
    Lowest(usize),
}

/// Spectral decomposition with eigenvalues ascending.
///
/// Eigenvector phases are fixed so that the largest-magnitude component of
/// each vector is real and positive (the lowest such index on ties).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    dim: usize,
    eigenvalues: Vec<f64>,
    vectors: Vectors,
}

#[derive(Debug, Clone)]
enum Vectors {
    /// Unit vectors: eigenvector `k` is basis state `perm[k]`.
    Basis(Vec<usize>),
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

/// Relative slack when picking the phase pivot among near-equal magnitudes.
const PIVOT_SLACK: f64 = 1e-10;

fn pivot_index(mags: impl Iterator<Item = f64> + Clone) -> usize {
    let max = mags.clone().fold(0.0_f64, f64::max);
    mags.into_iter()
        .position(|m| m >= max * (1.0 - PIVOT_SLACK))
        .unwrap_or(0)
}

fn fix_real_phase(m: &mut Mat<f64>) {
    let d = m.nrows();
    for k in 0..m.ncols() {
        let p = pivot_index((0..d).map(|i| m[(i, k)].abs()));
        if m[(p, k)] < 0.0 {
            for i in 0..d {
                m[(i, k)] = -m[(i, k)];
            }
        }
    }
}

fn fix_complex_phase(m: &mut Mat<c64>) {
    let d = m.nrows();
    for k in 0..m.ncols() {
        let p = pivot_index((0..d).map(|i| m[(i, k)].norm()));
        let z = m[(p, k)];
        let r = z.norm();
        if r == 0.0 {
            continue;
        }
        let phase = z.conj() / r;
        for i in 0..d {
            m[(i, k)] *= phase;
        }
    }
}

fn sorted_diagonal(diag: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..diag.len()).collect();
    perm.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    perm
}

fn level_count(levels: Levels, dim: usize) -> Result<usize> {
    match levels {
        Levels::All => Ok(dim),
        Levels::Lowest(0) => Err(Error::invalid("at least one level must be requested")),
        Levels::Lowest(k) if k > dim => Err(Error::TooManyLevels { k, dim }),
        Levels::Lowest(k) => Ok(k),
    }
}

/// Eigendecomposition of a Hermitian operator, full or lowest-`k`.
pub fn eigh(op: &HermitianOperator, levels: Levels) -> Result<EigenSystem> {
    op.check_hermitian()?;
    let dim = op.dim();
    let k = level_count(levels, dim)?;
    match op.repr() {
        Repr::Diagonal(diag) => {
            let mut perm = sorted_diagonal(diag);
            perm.truncate(k);
            Ok(EigenSystem {
                dim,
                eigenvalues: perm.iter().map(|&i| diag[i]).collect(),
                vectors: Vectors::Basis(perm),
            })
        }
        Repr::Complex(m) => {
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::EigenFailure)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let mut vecs = Mat::from_fn(dim, k, |i, j| u[(i, j)]);
            fix_complex_phase(&mut vecs);
            Ok(EigenSystem {
                dim,
                eigenvalues: (0..k).map(|j| s[j].re).collect(),
                vectors: Vectors::Complex(vecs),
            })
        }
        _ => {
            let m = op.dense_real();
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::EigenFailure)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let mut vecs = Mat::from_fn(dim, k, |i, j| u[(i, j)]);
            fix_real_phase(&mut vecs);
            Ok(EigenSystem {
                dim,
                eigenvalues: (0..k).map(|j| s[j]).collect(),
                vectors: Vectors::Real(vecs),
            })
        }
    }
}

/// All eigenvalues, ascending, without computing eigenvectors.
pub fn eigenvalues(op: &HermitianOperator) -> Result<Vec<f64>> {
    op.check_hermitian()?;
    match op.repr() {
        Repr::Diagonal(diag) => {
            let mut v = diag.clone();
            v.sort_by(f64::total_cmp);
            Ok(v)
        }
        Repr::Complex(m) => m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::EigenFailure),
        _ => op
            .dense_real()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::EigenFailure),
    }
}

/// Largest singular value, i.e. `max |λ|` for Hermitian input.
pub fn spectral_norm(op: &HermitianOperator) -> Result<f64> {
    if let Some(d) = op.diagonal() {
        return Ok(d.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let ev = eigenvalues(op)?;
    Ok(max_abs(&ev))
}

pub(crate) fn max_abs(sorted: &[f64]) -> f64 {
    match (sorted.first(), sorted.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => 0.0,
    }
}

/// Applies `exp(−i·op·dt)` through a full eigendecomposition.
pub fn evolve_step(op: &HermitianOperator, state: &StateVector, dt: f64) -> Result<StateVector> {
    if state.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.dim(),
        });
    }
    eigh(op, Levels::All)?.propagate(state, dt)
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of eigenpairs kept.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Component `i` of eigenvector `k`.
    pub fn component(&self, i: usize, k: usize) -> Complex64 {
        match &self.vectors {
            Vectors::Basis(perm) => {
                if perm[k] == i {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Vectors::Real(m) => m[(i, k)].into(),
            Vectors::Complex(m) => m[(i, k)],
        }
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_raw((0..self.dim).map(|i| self.component(i, k)).collect())
    }

    pub fn ground_state(&self) -> StateVector {
        self.eigenvector(0)
    }

    /// `Σ_k λ_k |v_k⟩⟨v_k|` over the kept pairs.
    pub fn reconstruct(&self) -> Result<HermitianOperator> {
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let v: Vec<Complex64> = (0..d).map(|i| self.component(i, k)).collect();
            for i in 0..d {
                let vi = v[i] * lam;
                for j in 0..d {
                    entries[i * d + j] += vi * v[j].conj();
                }
            }
        }
        // Rounding leaves tiny anti-Hermitian residue; symmetrize.
        for i in 0..d {
            for j in 0..i {
                let avg = (entries[i * d + j] + entries[j * d + i].conj()) * 0.5;
                entries[i * d + j] = avg;
                entries[j * d + i] = avg.conj();
            }
            entries[i * d + i].im = 0.0;
        }
        HermitianOperator::from_dense(d, &entries)
    }

    /// `exp(−i·H·dt)|state⟩` with `H` the decomposed operator.
    pub fn propagate(&self, state: &StateVector, dt: f64) -> Result<StateVector> {
        if !self.is_complete() {
            return Err(Error::invalid("propagation needs the full spectrum"));
        }
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: state.dim(),
            });
        }
        let phase = |lam: f64| Complex64::from_polar(1.0, -lam * dt);
        let psi = state.amplitudes();
        let d = self.dim;
        let out = match &self.vectors {
            Vectors::Basis(perm) => {
                let mut out = psi.to_vec();
                for (k, &b) in perm.iter().enumerate() {
                    out[b] *= phase(self.eigenvalues[k]);
                }
                out
            }
            Vectors::Real(v) => {
                let p = Mat::from_fn(d, 2, |i, j| if j == 0 { psi[i].re } else { psi[i].im });
                let c = v.transpose() * &p;
                let rotated = Mat::from_fn(d, 2, |k, j| {
                    let z = Complex64::new(c[(k, 0)], c[(k, 1)]) * phase(self.eigenvalues[k]);
                    if j == 0 {
                        z.re
                    } else {
                        z.im
                    }
                });
                let o = v * &rotated;
                (0..d)
                    .map(|i| Complex64::new(o[(i, 0)], o[(i, 1)]))
                    .collect()
            }
            Vectors::Complex(v) => {
                let p = Mat::from_fn(d, 1, |i, _| psi[i]);
                let c = v.adjoint() * &p;
                let rotated = Mat::from_fn(d, 1, |k, _| c[(k, 0)] * phase(self.eigenvalues[k]));
                let o = v * &rotated;
                (0..d).map(|i| o[(i, 0)]).collect()
            }
        };
        Ok(StateVector::from_raw(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{embed_single_site, Axis};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let op = HermitianOperator::from_diagonal(vec![3.0, -1.0, 2.0, 0.5]).unwrap();
        let es = eigh(&op, Levels::All).unwrap();
        assert_eq!(es.eigenvalues(), &[-1.0, 0.5, 2.0, 3.0]);
        assert_eq!(es.ground_state().probability(1), 1.0);
        let low = eigh(&op, Levels::Lowest(2)).unwrap();
        assert_eq!(low.eigenvalues(), &[-1.0, 0.5]);
    }

    #[test]
    fn pauli_x_ground_vector_has_fixed_phase() {
        let x = embed_single_site(Axis::X, 0, 1).unwrap();
        let es = eigh(&x, Levels::All).unwrap();
        assert!((es.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((es.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let g = es.ground_state();
        assert!((g.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-14);
        assert!((g.amplitudes()[1] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn too_many_levels() {
        let op = HermitianOperator::identity(1);
        assert!(matches!(
            eigh(&op, Levels::Lowest(3)),
            Err(Error::TooManyLevels { k: 3, dim: 2 })
        ));
    }

    #[test]
    fn complex_hermitian_decomposition() {
        // σʸ has eigenvalues ±1.
        let y = HermitianOperator::from_dense(
            2,
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let es = eigh(&y, Levels::All).unwrap();
        assert!((es.eigenvalues()[0] + 1.0).abs() < 1e-14);
        let g = es.ground_state();
        let yg = y.apply(g.amplitudes());
        for (a, b) in yg.iter().zip(g.amplitudes()) {
            assert!((a + b).norm() < 1e-13);
        }
        // pivot component real positive
        assert!(g.amplitudes()[0].im.abs() < 1e-15 && g.amplitudes()[0].re > 0.0);
        let back = es.reconstruct().unwrap();
        for (a, b) in back.to_dense().iter().zip(y.to_dense()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn spectral_norm_examples() {
        let id = HermitianOperator::identity(3);
        assert_eq!(spectral_norm(&id).unwrap(), 1.0);
        let z = embed_single_site(Axis::Z, 0, 1).unwrap();
        let x = embed_single_site(Axis::X, 0, 1).unwrap();
        let zx = z.plus(&x).unwrap();
        assert!((spectral_norm(&zx).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let scaled = zx.scaled(-3.0);
        assert!((spectral_norm(&scaled).unwrap() - 3.0 * 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn evolve_with_zero_operator_is_identity() {
        let s = StateVector::normalized(vec![c(1.0, 2.0), c(-0.5, 0.1)]).unwrap();
        let out = evolve_step(&HermitianOperator::zeros(1), &s, 3.7).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn evolve_sigma_z_only_changes_phases() {
        let s = StateVector::normalized(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let z = embed_single_site(Axis::Z, 0, 1).unwrap();
        let out = evolve_step(&z, &s, PI).unwrap();
        // exp(−iπσᶻ) = −I
        assert!((out.amplitudes()[0] - c(-0.6, 0.0)).norm() < 1e-14);
        assert!((out.probability(1) - 0.64).abs() < 1e-14);
    }

    #[test]
    fn rabi_flip_under_sigma_x() {
        let up = StateVector::basis(2, 0).unwrap();
        let x =
            HermitianOperator::from_dense(2, &embed_single_site(Axis::X, 0, 1).unwrap().to_dense())
                .unwrap();
        let out = evolve_step(&x, &up, PI / 2.0).unwrap();
        assert!((out.probability(1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn evolve_rejects_dimension_mismatch() {
        let s = StateVector::basis(4, 0).unwrap();
        assert!(matches!(
            evolve_step(&HermitianOperator::identity(1), &s, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
