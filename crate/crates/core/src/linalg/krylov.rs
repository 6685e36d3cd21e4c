//! Lanczos approximation of `exp(−i·H·dt)|ψ⟩`.
//!
//! Only matrix-vector products with `H` are needed, which for the
//! transverse-plus-diagonal operators of an annealing path cost `O(n·2ⁿ)`.
//! The Krylov basis is fully reorthogonalized and grown until the standard
//! a-posteriori estimate `β_m·|[exp(−i·T_m·dt)·e₁]_m|` drops below `tol`.

use faer::{Mat, Side};
use num_complex::Complex64;

use super::operator::HermitianOperator;
use super::state::{l2, StateVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KrylovOptions {
    pub tol: f64,
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tol: 1e-12,
            max_dim: 40,
        }
    }
}

const BREAKDOWN: f64 = 1e-13;

/// Largest `dt·‖H‖` attempted in one Lanczos solve before splitting.
const PHASE_PER_PIECE: f64 = 10.0;

/// `exp(−i·op·dt)|state⟩` by Lanczos iteration.
pub fn evolve_krylov(
    op: &HermitianOperator,
    state: &StateVector,
    dt: f64,
    opts: KrylovOptions,
) -> Result<StateVector> {
    if state.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.dim(),
        });
    }
    if opts.max_dim < 2 {
        return Err(Error::invalid("krylov max_dim must be at least 2"));
    }
    let phase = dt.abs() * op.norm_upper_bound();
    let pieces = (phase / PHASE_PER_PIECE).ceil().max(1.0) as usize;
    let sub = dt / pieces as f64;
    let mut out = state.amplitudes().to_vec();
    for _ in 0..pieces {
        out = step(op, out, sub, opts, 0)?;
    }
    Ok(StateVector::from_raw(out))
}

fn step(
    op: &HermitianOperator,
    v0: Vec<Complex64>,
    dt: f64,
    opts: KrylovOptions,
    depth: usize,
) -> Result<Vec<Complex64>> {
    match lanczos_expm(op, &v0, dt, opts) {
        Some(out) => Ok(out),
        None if depth < 16 => {
            let half = step(op, v0, dt / 2.0, opts, depth + 1)?;
            step(op, half, dt / 2.0, opts, depth + 1)
        }
        None => Err(Error::invalid("krylov propagation did not converge")),
    }
}

/// Returns `None` when `max_dim` vectors are not enough for `tol`.
fn lanczos_expm(
    op: &HermitianOperator,
    v0: &[Complex64],
    dt: f64,
    opts: KrylovOptions,
) -> Option<Vec<Complex64>> {
    let dim = v0.len();
    let norm0 = l2(v0);
    if norm0 == 0.0 {
        return Some(v0.to_vec());
    }
    let max_dim = opts.max_dim.min(dim);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_dim);
    basis.push(v0.iter().map(|a| a / norm0).collect());
    let mut alpha: Vec<f64> = Vec::with_capacity(max_dim);
    let mut beta: Vec<f64> = Vec::with_capacity(max_dim);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];

    for j in 0..max_dim {
        op.apply_into(&basis[j], &mut w);
        let a: f64 = basis[j]
            .iter()
            .zip(&w)
            .map(|(v, x)| (v.conj() * x).re)
            .sum();
        alpha.push(a);
        for (x, v) in w.iter_mut().zip(&basis[j]) {
            *x -= v * a;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (x, v) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= v * b;
            }
        }
        for v in &basis {
            let proj: Complex64 = v.iter().zip(&w).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in w.iter_mut().zip(v) {
                *x -= p * proj;
            }
        }
        let b = l2(&w);
        let m = j + 1;
        let scale = alpha.iter().fold(1.0_f64, |s, x| s.max(x.abs()));
        let breakdown = b < BREAKDOWN * scale || m == dim;
        if m >= 2 || breakdown {
            let y = tridiagonal_expm_e1(&alpha, &beta, dt)?;
            let err = b * y[m - 1].norm();
            if breakdown || err < opts.tol {
                let mut out = vec![Complex64::new(0.0, 0.0); dim];
                for (coef, v) in y.iter().zip(&basis) {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += x * coef;
                    }
                }
                for o in &mut out {
                    *o *= norm0;
                }
                return Some(out);
            }
        }
        if m == max_dim {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    None
}

/// `exp(−i·T·dt)·e₁` for the symmetric tridiagonal `T` with diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiagonal_expm_e1(alpha: &[f64], beta: &[f64], dt: f64) -> Option<Vec<Complex64>> {
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let evd = t.self_adjoint_eigen(Side::Lower).ok()?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let y = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| Complex64::from_polar(u[(0, k)] * u[(i, k)], -s[k] * dt))
                .sum()
        })
        .collect();
    Some(y)
}
