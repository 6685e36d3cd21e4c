use faer::{c64, Mat};
use num_complex::Complex64;

use super::{log2_dim, qubit_mask, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Which matrix norm to use where an "operator norm" is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// Largest singular value; `max |λ|` for Hermitian input.
    #[default]
    Spectral,
    Frobenius,
}

/// Hermitian operator on `n` qubits.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    n_qubits: usize,
    repr: Repr,
}

#[derive(Debug, Clone)]
pub(crate) enum Repr {
    Diagonal(Vec<f64>),
    /// `Σ_q x[q] σˣ_q + diag(diag)`.
    Transverse {
        x: Vec<f64>,
        diag: Vec<f64>,
    },
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        if self.n_qubits != other.n_qubits {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => a == b,
            (Repr::Transverse { x: xa, diag: da }, Repr::Transverse { x: xb, diag: db }) => {
                xa == xb && da == db
            }
            _ => {
                let d = self.dim();
                (0..d).all(|i| (0..d).all(|j| self.entry(i, j) == other.entry(i, j)))
            }
        }
    }
}

impl HermitianOperator {
    pub fn zeros(n_qubits: usize) -> Self {
        HermitianOperator {
            n_qubits,
            repr: Repr::Diagonal(vec![0.0; 1 << n_qubits]),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        HermitianOperator {
            n_qubits,
            repr: Repr::Diagonal(vec![1.0; 1 << n_qubits]),
        }
    }

    pub fn from_diagonal(diag: Vec<f64>) -> Result<Self> {
        let n_qubits = log2_dim(diag.len())?;
        Ok(HermitianOperator {
            n_qubits,
            repr: Repr::Diagonal(diag),
        })
    }

    /// `Σ_q x[q] σˣ_q + diag(diag)`; `x` has one coefficient per qubit.
    pub fn transverse(x: Vec<f64>, diag: Vec<f64>) -> Result<Self> {
        let n_qubits = log2_dim(diag.len())?;
        if x.len() != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: x.len(),
            });
        }
        Ok(HermitianOperator {
            n_qubits,
            repr: Repr::Transverse { x, diag },
        })
    }

    /// Builds an operator from row-major dense entries, rejecting input that
    /// is not Hermitian within [`HERMITIAN_TOL`].
    pub fn from_dense(dim: usize, entries: &[Complex64]) -> Result<Self> {
        let n_qubits = log2_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let mut deviation: f64 = 0.0;
        for i in 0..dim {
            for j in 0..=i {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let repr = if entries.iter().all(|z| z.im == 0.0) {
            Repr::Real(Mat::from_fn(dim, dim, |i, j| entries[i * dim + j].re))
        } else {
            Repr::Complex(Mat::from_fn(dim, dim, |i, j| entries[i * dim + j]))
        };
        Ok(HermitianOperator { n_qubits, repr })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Repr::Diagonal(_))
    }

    /// Diagonal entries when the operator is stored diagonally.
    pub fn diagonal(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            _ => None,
        }
    }

    /// True when every matrix entry is real.
    pub fn is_real(&self) -> bool {
        !matches!(self.repr, Repr::Complex(_))
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.repr {
            Repr::Diagonal(d) => {
                if i == j {
                    d[i].into()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Repr::Transverse { x, diag } => {
                if i == j {
                    return diag[i].into();
                }
                let flip = i ^ j;
                if flip.is_power_of_two() {
                    let q = self.n_qubits - 1 - flip.trailing_zeros() as usize;
                    x[q].into()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Repr::Real(m) => m[(i, j)].into(),
            Repr::Complex(m) => m[(i, j)],
        }
    }

    /// Row-major dense entries.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.entry(i, j));
            }
        }
        out
    }

    /// Largest `|A[i][j] − conj(A[j][i])|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(_) | Repr::Transverse { .. } => 0.0,
            Repr::Real(m) => {
                let d = m.nrows();
                let mut dev: f64 = 0.0;
                for i in 0..d {
                    for j in 0..i {
                        dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
                    }
                }
                dev
            }
            Repr::Complex(m) => {
                let d = m.nrows();
                let mut dev: f64 = 0.0;
                for i in 0..d {
                    for j in 0..=i {
                        dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                dev
            }
        }
    }

    pub(crate) fn check_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            Err(Error::NotHermitian { deviation })
        } else {
            Ok(())
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let repr = match &self.repr {
            Repr::Diagonal(d) => Repr::Diagonal(d.iter().map(|v| c * v).collect()),
            Repr::Transverse { x, diag } => Repr::Transverse {
                x: x.iter().map(|v| c * v).collect(),
                diag: diag.iter().map(|v| c * v).collect(),
            },
            Repr::Real(m) => Repr::Real(Mat::from_fn(m.nrows(), m.ncols(), |i, j| c * m[(i, j)])),
            Repr::Complex(m) => {
                Repr::Complex(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c))
            }
        };
        HermitianOperator {
            n_qubits: self.n_qubits,
            repr,
        }
    }

    /// `a·self + b·other`, keeping the cheapest representation that can hold
    /// the result.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let lin = |u: &[f64], v: &[f64]| -> Vec<f64> {
            u.iter().zip(v).map(|(p, q)| a * p + b * q).collect()
        };
        let zeros_x = vec![0.0; self.n_qubits];
        let repr = match (&self.repr, &other.repr) {
            (Repr::Diagonal(d1), Repr::Diagonal(d2)) => Repr::Diagonal(lin(d1, d2)),
            (Repr::Diagonal(d1), Repr::Transverse { x, diag }) => Repr::Transverse {
                x: lin(&zeros_x, x),
                diag: lin(d1, diag),
            },
            (Repr::Transverse { x, diag }, Repr::Diagonal(d2)) => Repr::Transverse {
                x: lin(x, &zeros_x),
                diag: lin(diag, d2),
            },
            (Repr::Transverse { x: x1, diag: d1 }, Repr::Transverse { x: x2, diag: d2 }) => {
                Repr::Transverse {
                    x: lin(x1, x2),
                    diag: lin(d1, d2),
                }
            }
            _ if self.is_real() && other.is_real() => {
                let (m1, m2) = (self.dense_real(), other.dense_real());
                let d = self.dim();
                Repr::Real(Mat::from_fn(d, d, |i, j| a * m1[(i, j)] + b * m2[(i, j)]))
            }
            _ => {
                let (m1, m2) = (self.dense_complex(), other.dense_complex());
                let d = self.dim();
                Repr::Complex(Mat::from_fn(d, d, |i, j| m1[(i, j)] * a + m2[(i, j)] * b))
            }
        };
        Ok(HermitianOperator {
            n_qubits: self.n_qubits,
            repr,
        })
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Dense real matrix; panics on complex storage (callers check
    /// [`is_real`](Self::is_real) first).
    pub(crate) fn dense_real(&self) -> Mat<f64> {
        let d = self.dim();
        match &self.repr {
            Repr::Diagonal(diag) => Mat::from_fn(d, d, |i, j| if i == j { diag[i] } else { 0.0 }),
            Repr::Transverse { x, diag } => {
                let mut m = Mat::<f64>::zeros(d, d);
                for (b, &v) in diag.iter().enumerate() {
                    m[(b, b)] = v;
                }
                for (q, &c) in x.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let mask = qubit_mask(q, self.n_qubits);
                    for b in 0..d {
                        m[(b, b ^ mask)] += c;
                    }
                }
                m
            }
            Repr::Real(m) => m.clone(),
            Repr::Complex(_) => panic!("dense_real called on complex operator"),
        }
    }

    pub(crate) fn dense_complex(&self) -> Mat<c64> {
        match &self.repr {
            Repr::Complex(m) => m.clone(),
            _ => {
                let r = self.dense_real();
                Mat::from_fn(r.nrows(), r.ncols(), |i, j| c64::new(r[(i, j)], 0.0))
            }
        }
    }

    /// `out = A·v`.
    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim();
        assert_eq!(v.len(), d, "apply: input length");
        assert_eq!(out.len(), d, "apply: output length");
        match &self.repr {
            Repr::Diagonal(diag) => {
                for ((o, &a), &e) in out.iter_mut().zip(v).zip(diag) {
                    *o = a * e;
                }
            }
            Repr::Transverse { x, diag } => {
                for ((o, &a), &e) in out.iter_mut().zip(v).zip(diag) {
                    *o = a * e;
                }
                for (q, &c) in x.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let mask = qubit_mask(q, self.n_qubits);
                    for (b, o) in out.iter_mut().enumerate() {
                        *o += v[b ^ mask] * c;
                    }
                }
            }
            Repr::Real(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &a) in v.iter().enumerate() {
                        acc += a * m[(i, j)];
                    }
                    *o = acc;
                }
            }
            Repr::Complex(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &a) in v.iter().enumerate() {
                        acc += m[(i, j)] * a;
                    }
                    *o = acc;
                }
            }
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(v, &mut out);
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Repr::Transverse { x, diag } => {
                let off: f64 = x.iter().map(|c| c * c).sum::<f64>() * self.dim() as f64;
                (diag.iter().map(|v| v * v).sum::<f64>() + off).sqrt()
            }
            Repr::Real(m) => m.norm_l2(),
            Repr::Complex(m) => m.norm_l2(),
        }
    }

    /// Cheap upper bound on the spectral norm (maximum absolute row sum).
    pub fn norm_upper_bound(&self) -> f64 {
        let max_abs = |d: &[f64]| d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        match &self.repr {
            Repr::Diagonal(d) => max_abs(d),
            Repr::Transverse { x, diag } => x.iter().map(|c| c.abs()).sum::<f64>() + max_abs(diag),
            Repr::Real(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max),
            Repr::Complex(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::Spectral => super::spectral_norm(self),
            NormKind::Frobenius => Ok(self.frobenius_norm()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{embed_single_site, Axis};

    #[test]
    fn from_dense_rejects_non_hermitian() {
        let c = |re, im| Complex64::new(re, im);
        let ok = [c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        let op = HermitianOperator::from_dense(2, &ok).unwrap();
        assert!(!op.is_real());
        let bad = [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(2.0, 0.0)];
        assert!(matches!(
            HermitianOperator::from_dense(2, &bad),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            HermitianOperator::from_dense(3, &[c(0.0, 0.0); 9]),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn combine_keeps_structure_and_matches_dense() {
        let x = embed_single_site(Axis::X, 1, 3).unwrap();
        let z = embed_single_site(Axis::Z, 0, 3).unwrap();
        let sum = x.combine(0.5, &z, -2.0).unwrap();
        assert!(matches!(sum.repr(), Repr::Transverse { .. }));
        let dense_x = HermitianOperator::from_dense(8, &x.to_dense()).unwrap();
        let dense_sum = dense_x.combine(0.5, &z, -2.0).unwrap();
        assert!(matches!(dense_sum.repr(), Repr::Real(_)));
        assert_eq!(sum, dense_sum);
    }

    #[test]
    fn apply_matches_dense_product() {
        let x = embed_single_site(Axis::X, 0, 2).unwrap();
        let z = embed_single_site(Axis::Z, 1, 2).unwrap();
        let op = x.combine(0.3, &z, 0.7).unwrap();
        let dense = HermitianOperator::from_dense(4, &op.to_dense()).unwrap();
        let v: Vec<Complex64> = (0..4)
            .map(|k| Complex64::new(k as f64, 1.0 - k as f64))
            .collect();
        let a = op.apply(&v);
        let b = dense.apply(&v);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    #[test]
    fn frobenius_norm_of_structured_forms() {
        let x = embed_single_site(Axis::X, 0, 2).unwrap();
        assert!((x.frobenius_norm() - 2.0).abs() < 1e-15);
        let dense = HermitianOperator::from_dense(4, &x.to_dense()).unwrap();
        assert!((dense.frobenius_norm() - 2.0).abs() < 1e-15);
    }
}
