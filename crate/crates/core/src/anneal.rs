//! Annealing paths `H(s) = (1−s)·H̃₀ + s·H_f`, their low-lying spectrum,
//! instantaneous adiabatic times and the schedule obtained by inverting the
//! cumulative adiabatic time.
//!
//! When the final ground state is `d`-fold degenerate the gap is taken as
//! `λ_d − λ₀`, i.e. between the ground manifold and the first level outside
//! it.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, eigh, HermitianOperator, Levels, NormKind, StateVector};
use crate::models::{DiagonalHamiltonian, GroundState};
use crate::steering::{
    direct_initial_hamiltonian, rotated_initial_ground_state, rotated_initial_hamiltonian,
    ThetaVector,
};

/// Gaps below this are treated as closed.
pub const GAP_DIVERGENCE_TOL: f64 = 1e-12;

/// Bracket width at which gap-minimum refinement stops.
const REFINE_TOL: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct AnnealPath {
    initial: HermitianOperator,
    final_ham: DiagonalHamiltonian,
    final_op: HermitianOperator,
    derivative: HermitianOperator,
    ground: GroundState,
    initial_state: StateVector,
}

impl AnnealPath {
    /// Path from an arbitrary initial Hamiltonian; the starting state is its
    /// lowest eigenvector.
    pub fn new(initial: HermitianOperator, final_ham: DiagonalHamiltonian) -> Result<Self> {
        let state = eigh(&initial, Levels::Lowest(1))?.ground_state();
        Self::with_initial_state(initial, final_ham, state)
    }

    fn with_initial_state(
        initial: HermitianOperator,
        final_ham: DiagonalHamiltonian,
        initial_state: StateVector,
    ) -> Result<Self> {
        if initial.dim() != final_ham.dim() {
            return Err(Error::DimensionMismatch {
                expected: initial.dim(),
                found: final_ham.dim(),
            });
        }
        initial.check_hermitian()?;
        let final_op = final_ham.to_operator();
        let derivative = final_op.minus(&initial)?;
        let ground = final_ham.ground_state();
        Ok(AnnealPath {
            initial,
            final_ham,
            final_op,
            derivative,
            ground,
            initial_state,
        })
    }

    /// Path starting from the rotated initial Hamiltonian for `theta`.
    pub fn steered(final_ham: &DiagonalHamiltonian, theta: &ThetaVector) -> Result<Self> {
        if theta.n() != final_ham.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: final_ham.n_qubits(),
                found: theta.n(),
            });
        }
        Self::with_initial_state(
            rotated_initial_hamiltonian(theta)?,
            final_ham.clone(),
            rotated_initial_ground_state(theta)?,
        )
    }

    /// Path starting from `−Σ σˣ_i`.
    pub fn direct(final_ham: &DiagonalHamiltonian) -> Result<Self> {
        let n = final_ham.n_qubits();
        Self::with_initial_state(
            direct_initial_hamiltonian(n)?,
            final_ham.clone(),
            rotated_initial_ground_state(&ThetaVector::zeros(n))?,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.final_ham.n_qubits()
    }

    pub fn dim(&self) -> usize {
        self.final_ham.dim()
    }

    pub fn initial(&self) -> &HermitianOperator {
        &self.initial
    }

    pub fn final_hamiltonian(&self) -> &DiagonalHamiltonian {
        &self.final_ham
    }

    /// `∂_s H = H_f − H̃₀`.
    pub fn derivative(&self) -> &HermitianOperator {
        &self.derivative
    }

    /// Ground state of the initial Hamiltonian.
    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn final_ground_state(&self) -> &GroundState {
        &self.ground
    }

    /// Index of the level the gap is measured to.
    pub fn gap_level(&self) -> usize {
        self.ground.degeneracy()
    }
}

pub fn hamiltonian_at(path: &AnnealPath, s: f64) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!(
            "anneal fraction s = {s} outside [0, 1]"
        )));
    }
    if s == 0.0 {
        return Ok(path.initial.clone());
    }
    if s == 1.0 {
        return Ok(path.final_op.clone());
    }
    path.initial.combine(1.0 - s, &path.final_op, s)
}

/// Number of steps `m` with `m·ds = 1`.
pub fn grid_steps(ds: f64) -> Result<usize> {
    if !(ds > 0.0 && ds <= 1.0) {
        return Err(Error::invalid(format!("ds must lie in (0, 1], got {ds}")));
    }
    let m = (1.0 / ds).round();
    if (m * ds - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "ds = {ds} does not divide [0, 1] into whole steps"
        )));
    }
    Ok(m as usize)
}

/// Grid `s_i = i/m`, `i = 0…m`, with exact endpoints.
pub fn s_grid(ds: f64) -> Result<Vec<f64>> {
    let m = grid_steps(ds)?;
    Ok((0..=m).map(|i| i as f64 / m as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Levels kept per grid point.
    pub levels: usize,
    pub ds: f64,
    /// Golden-section refinement of every grid-local gap minimum.
    pub refine: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            levels: 4,
            ds: 0.01,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinGap {
    pub s: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub s_grid: Vec<f64>,
    /// Lowest levels per grid point, ascending.
    pub levels: Vec<Vec<f64>>,
    pub gap: Vec<f64>,
    /// Largest eigenvalue per grid point.
    pub top: Vec<f64>,
    pub gap_level: usize,
    /// Sub-grid minimum when refinement was requested.
    pub refined: Option<MinGap>,
}

impl SpectrumTrace {
    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }
}

fn gap_at(path: &AnnealPath, s: f64) -> Result<f64> {
    let ev = eigenvalues(&hamiltonian_at(path, s)?)?;
    Ok(ev[path.gap_level()] - ev[0])
}

pub fn spectrum_trace(path: &AnnealPath, k: usize, ds: f64) -> Result<SpectrumTrace> {
    spectrum_trace_with(
        path,
        TraceOptions {
            levels: k,
            ds,
            refine: false,
        },
    )
}

pub fn spectrum_trace_with(path: &AnnealPath, opts: TraceOptions) -> Result<SpectrumTrace> {
    let dim = path.dim();
    if opts.levels < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 levels, got {}",
            opts.levels
        )));
    }
    if opts.levels > dim {
        return Err(Error::TooManyLevels {
            k: opts.levels,
            dim,
        });
    }
    let d = path.gap_level();
    if d >= dim {
        return Err(Error::invalid(
            "final Hamiltonian is fully degenerate; no gap is defined",
        ));
    }
    let grid = s_grid(opts.ds)?;
    let spectra: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&s| eigenvalues(&hamiltonian_at(path, s)?))
        .collect::<Result<_>>()?;
    let gap = spectra.iter().map(|ev| ev[d] - ev[0]).collect();
    let top = spectra.iter().map(|ev| ev[dim - 1]).collect();
    let levels = spectra.into_iter().map(|mut ev| {
        ev.truncate(opts.levels);
        ev
    });
    let mut trace = SpectrumTrace {
        s_grid: grid,
        levels: levels.collect(),
        gap,
        top,
        gap_level: d,
        refined: None,
    };
    if opts.refine {
        trace.refined = Some(refine_min_gap(path, &trace)?);
    }
    Ok(trace)
}

/// Grid argmin of the gap; ties go to the smallest `s`.
pub fn min_gap(trace: &SpectrumTrace) -> MinGap {
    let (i, gap) =
        trace
            .gap
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bg), (i, g)| if g < bg { (i, g) } else { (bi, bg) },
            );
    MinGap {
        s: trace.s_grid[i],
        gap,
    }
}

/// Golden-section search inside the neighbouring cells of every grid-local
/// minimum. Returns the smallest gap found, never above the grid minimum.
fn refine_min_gap(path: &AnnealPath, trace: &SpectrumTrace) -> Result<MinGap> {
    let g = &trace.gap;
    let s = &trace.s_grid;
    let last = g.len() - 1;
    let mut best = min_gap(trace);
    for i in 0..=last {
        let left_ok = i == 0 || g[i] <= g[i - 1];
        let right_ok = i == last || g[i] <= g[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let lo = s[i.saturating_sub(1)];
        let hi = s[(i + 1).min(last)];
        let found = golden_min(|x| gap_at(path, x), lo, hi)?;
        if found.gap < best.gap {
            best = found;
        }
    }
    Ok(best)
}

fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<MinGap> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = MinGap { s: a, gap: f(a)? };
    let mut consider = |s: f64, gap: f64| {
        if gap < best.gap {
            best = MinGap { s, gap };
        }
    };
    let fb = f(b)?;
    consider(b, fb);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    consider(c, fc);
    consider(d, fd);
    while b - a > REFINE_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
            consider(d, fd);
        }
        if c >= d {
            break;
        }
    }
    Ok(best)
}

/// `R_Δ = min Δ_steered / min Δ_direct − 1` on grid minima.
pub fn gap_improvement_ratio(steered: &SpectrumTrace, direct: &SpectrumTrace) -> Result<f64> {
    if steered.s_grid != direct.s_grid {
        return Err(Error::invalid("traces were computed on different grids"));
    }
    let base = min_gap(direct);
    if base.gap < GAP_DIVERGENCE_TOL {
        return Err(Error::Divergent {
            s: base.s,
            gap: base.gap,
        });
    }
    Ok(min_gap(steered).gap / base.gap - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleProfile {
    pub s_grid: Vec<f64>,
    /// `T_ad(s) = ‖∂_sH‖·‖H(s)‖ / Δ(s)²`; infinite where the gap closed.
    pub t_ad: Vec<f64>,
    /// Cumulative trapezoid of `T_ad` from 0 to each grid point.
    pub t_of_s: Vec<f64>,
    pub norm: NormKind,
    /// Set when the gap drops below [`GAP_DIVERGENCE_TOL`] on the grid or at
    /// the refined minimum.
    pub divergent: Option<MinGap>,
}

pub fn adiabatic_time_profile(
    path: &AnnealPath,
    trace: &SpectrumTrace,
    norm: NormKind,
) -> Result<ScheduleProfile> {
    if trace.gap_level != path.gap_level() || trace.top.len() != trace.len() {
        return Err(Error::invalid("trace does not belong to this path"));
    }
    let dh = path.derivative.norm(norm)?;
    let h_norms: Vec<f64> = match norm {
        NormKind::Spectral => trace
            .levels
            .iter()
            .zip(&trace.top)
            .map(|(lv, top)| lv[0].abs().max(top.abs()))
            .collect(),
        NormKind::Frobenius => trace
            .s_grid
            .iter()
            .map(|&s| Ok(hamiltonian_at(path, s)?.frobenius_norm()))
            .collect::<Result<_>>()?,
    };
    let t_ad: Vec<f64> = trace
        .gap
        .iter()
        .zip(&h_norms)
        .map(|(&g, &h)| {
            if g < GAP_DIVERGENCE_TOL {
                f64::INFINITY
            } else {
                dh * h / (g * g)
            }
        })
        .collect();
    let grid_min = min_gap(trace);
    let lowest = match trace.refined {
        Some(r) if r.gap < grid_min.gap => r,
        _ => grid_min,
    };
    let divergent = (lowest.gap < GAP_DIVERGENCE_TOL).then_some(lowest);
    let t_of_s = cumulative_trapezoid(&trace.s_grid, &t_ad);
    Ok(ScheduleProfile {
        s_grid: trace.s_grid.clone(),
        t_ad,
        t_of_s,
        norm,
        divergent,
    })
}

fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// `T̃_ad = ∫₀¹ T_ad(s) ds` by the trapezoid rule.
pub fn total_adiabatic_time(profile: &ScheduleProfile) -> Result<f64> {
    if let Some(m) = profile.divergent {
        return Err(Error::Divergent { s: m.s, gap: m.gap });
    }
    Ok(*profile.t_of_s.last().expect("non-empty grid"))
}

/// Schedule `s(t)` obtained by inverting the cumulative adiabatic time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSchedule {
    pub s_grid: Vec<f64>,
    pub t_of_s: Vec<f64>,
    pub total: f64,
}

pub fn optimal_schedule(profile: &ScheduleProfile) -> Result<OptimalSchedule> {
    let total = total_adiabatic_time(profile)?;
    if total.is_nan() || total <= 0.0 {
        return Err(Error::invalid("adiabatic time vanishes on the whole grid"));
    }
    Ok(OptimalSchedule {
        s_grid: profile.s_grid.clone(),
        t_of_s: profile.t_of_s.clone(),
        total,
    })
}

impl OptimalSchedule {
    /// Cumulative time at `s`, linearly interpolated.
    pub fn t_of_s(&self, s: f64) -> f64 {
        interpolate(&self.s_grid, &self.t_of_s, s)
    }

    /// Inverse of [`Self::t_of_s`], clamped to `[0, 1]`.
    pub fn s_of_t(&self, t: f64) -> f64 {
        interpolate(&self.t_of_s, &self.s_grid, t)
    }

    /// `s` at normalized time `u = t / T̃_ad ∈ [0, 1]`.
    pub fn s_at_fraction(&self, u: f64) -> f64 {
        self.s_of_t(u * self.total)
    }

    /// `(u, s(u))` samples on a uniform grid of `points ≥ 2` normalized times.
    pub fn normalized(&self, points: usize) -> Vec<(f64, f64)> {
        let m = points.max(2) - 1;
        (0..=m)
            .map(|i| {
                let u = i as f64 / m as f64;
                (u, self.s_at_fraction(u))
            })
            .collect()
    }
}

/// Piecewise-linear interpolation on nondecreasing `xs`, clamped at the ends.
/// On flat stretches of `xs` the first matching node wins.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v < x);
    if xs[i] == x {
        return ys[i];
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    ys[i - 1] + (ys[i] - ys[i - 1]) * (x - x0) / (x1 - x0)
}

/// CSV with columns `s, lambda_0 … lambda_{k−1}, gap[, T_ad, t_of_s]`.
pub fn write_trace_csv<W: Write>(
    out: W,
    trace: &SpectrumTrace,
    profile: Option<&ScheduleProfile>,
) -> Result<()> {
    let k = trace.levels.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string()];
    header.extend((0..k).map(|i| format!("lambda_{i}")));
    header.push("gap".into());
    if profile.is_some() {
        header.extend(["T_ad".into(), "t_of_s".into()]);
    }
    w.write_record(&header)?;
    for i in 0..trace.len() {
        let mut row = vec![trace.s_grid[i].to_string()];
        row.extend(trace.levels[i].iter().map(f64::to_string));
        row.push(trace.gap[i].to_string());
        if let Some(p) = profile {
            row.push(p.t_ad[i].to_string());
            row.push(p.t_of_s[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
