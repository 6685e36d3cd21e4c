//! Finite-time evolution along an annealing path.
//!
//! The anneal of total time `T` is cut into `m = 1/ds` steps of duration
//! `δt = T·ds`. Step `j` holds the Hamiltonian fixed at `H(s(u_j))` with the
//! midpoint `u_j = (j + ½)·ds` of the normalized time, where `s(u) = u` for
//! the linear schedule or the inverted cumulative adiabatic time for the
//! optimal one. Probabilities are recorded at `u = 0, ds, …, 1`.

use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{grid_steps, hamiltonian_at, AnnealPath, OptimalSchedule};
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, evolve_krylov, EigenSystem, HermitianOperator, KrylovOptions, Levels, StateVector,
};
use crate::models::DEGENERACY_TOL;

/// Allowed drift of the state norm over a full evolution.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

/// Krylov steps with a larger `δt·‖H‖` bound use a (cached)
/// eigendecomposition instead, whose cost does not grow with `δt`.
const KRYLOV_PHASE_LIMIT: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Linear,
    Optimal(OptimalSchedule),
}

impl Schedule {
    fn s_at(&self, u: f64) -> f64 {
        match self {
            Schedule::Linear => u,
            Schedule::Optimal(o) => o.s_at_fraction(u),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        match self {
            Schedule::Linear => ScheduleKind::Linear,
            Schedule::Optimal(_) => ScheduleKind::Optimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Linear,
    Optimal,
}

/// How `exp(−i·H·δt)` is applied per step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    /// Full eigendecomposition of each step Hamiltonian.
    #[default]
    Eigen,
    /// Lanczos iteration with structured matrix-vector products; steps with
    /// a very large `δt·‖H‖` fall back to the eigendecomposition.
    Krylov(KrylovOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub ds: f64,
    pub propagator: Propagator,
    /// Also record `|⟨GS(s)|φ(s)⟩|²`, at the cost of one more
    /// diagonalization per recorded point.
    pub track_instantaneous: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            ds: 0.01,
            propagator: Propagator::Eigen,
            track_instantaneous: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    /// Anneal fraction at each recorded point.
    pub s_grid: Vec<f64>,
    pub instantaneous_gs_overlap: Option<Vec<f64>>,
    /// Probability on the final ground manifold at each recorded point.
    pub final_gs_probability: Vec<f64>,
    pub p_f: f64,
    pub t_total: f64,
    pub schedule_kind: ScheduleKind,
}

enum Steps {
    Eigen(Vec<EigenSystem>),
    Krylov {
        ops: Vec<HermitianOperator>,
        opts: KrylovOptions,
        fallback: Vec<OnceLock<EigenSystem>>,
    },
}

/// Step Hamiltonians of a path under a schedule, independent of `T` so one
/// preparation serves every anneal time.
pub struct PreparedEvolution<'a> {
    path: &'a AnnealPath,
    kind: ScheduleKind,
    ds: f64,
    steps: Steps,
    s_grid: Vec<f64>,
    instantaneous: Option<Vec<EigenSystem>>,
}

pub fn prepare<'a>(
    path: &'a AnnealPath,
    schedule: &Schedule,
    opts: &EvolveOptions,
) -> Result<PreparedEvolution<'a>> {
    let m = grid_steps(opts.ds)?;
    let mid: Vec<f64> = (0..m)
        .map(|j| schedule.s_at((j as f64 + 0.5) / m as f64))
        .collect();
    let s_grid: Vec<f64> = (0..=m)
        .map(|j| schedule.s_at(j as f64 / m as f64))
        .collect();
    let ops: Vec<HermitianOperator> = mid
        .iter()
        .map(|&s| hamiltonian_at(path, s))
        .collect::<Result<_>>()?;
    let steps = match opts.propagator {
        Propagator::Eigen => Steps::Eigen(
            ops.par_iter()
                .map(|op| eigh(op, Levels::All))
                .collect::<Result<_>>()?,
        ),
        Propagator::Krylov(k) => Steps::Krylov {
            fallback: ops.iter().map(|_| OnceLock::new()).collect(),
            ops,
            opts: k,
        },
    };
    let instantaneous = if opts.track_instantaneous {
        let k = (path.gap_level() + 1).min(path.dim());
        Some(
            s_grid
                .par_iter()
                .map(|&s| eigh(&hamiltonian_at(path, s)?, Levels::Lowest(k)))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    Ok(PreparedEvolution {
        path,
        kind: schedule.kind(),
        ds: opts.ds,
        steps,
        s_grid,
        instantaneous,
    })
}

/// Probability of `state` in the lowest eigenspace of `sys`.
fn ground_overlap(sys: &EigenSystem, state: &StateVector) -> f64 {
    let e0 = sys.eigenvalues()[0];
    (0..sys.len())
        .take_while(|&k| sys.eigenvalues()[k] - e0 <= DEGENERACY_TOL)
        .map(|k| sys.eigenvector(k).overlap(state).powi(2))
        .sum()
}

impl PreparedEvolution<'_> {
    pub fn evolve(&self, t_total: f64) -> Result<EvolutionResult> {
        if !(t_total > 0.0 && t_total.is_finite()) {
            return Err(Error::invalid(format!(
                "anneal time must be positive, got {t_total}"
            )));
        }
        let dt = t_total * self.ds;
        let manifold = &self.path.final_ground_state().manifold;
        let mut psi = self.path.initial_state().clone();
        let mut probs = Vec::with_capacity(self.s_grid.len());
        let mut inst = self
            .instantaneous
            .as_ref()
            .map(|_| Vec::with_capacity(self.s_grid.len()));
        let mut record = |j: usize, psi: &StateVector| {
            probs.push(psi.probability_on(manifold));
            if let (Some(out), Some(sys)) = (inst.as_mut(), self.instantaneous.as_ref()) {
                out.push(ground_overlap(&sys[j], psi));
            }
        };
        record(0, &psi);
        let m = self.s_grid.len() - 1;
        for j in 0..m {
            psi = match &self.steps {
                Steps::Eigen(sys) => sys[j].propagate(&psi, dt)?,
                Steps::Krylov {
                    ops,
                    opts,
                    fallback,
                } => {
                    if dt * ops[j].norm_upper_bound() <= KRYLOV_PHASE_LIMIT {
                        evolve_krylov(&ops[j], &psi, dt, *opts)?
                    } else {
                        let sys = match fallback[j].get() {
                            Some(sys) => sys,
                            None => {
                                let sys = eigh(&ops[j], Levels::All)?;
                                fallback[j].get_or_init(|| sys)
                            }
                        };
                        sys.propagate(&psi, dt)?
                    }
                }
            };
            record(j + 1, &psi);
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_DRIFT_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(EvolutionResult {
            s_grid: self.s_grid.clone(),
            instantaneous_gs_overlap: inst,
            p_f: *probs.last().expect("non-empty trace"),
            final_gs_probability: probs,
            t_total,
            schedule_kind: self.kind,
        })
    }
}

pub fn evolve(
    path: &AnnealPath,
    t_total: f64,
    schedule: &Schedule,
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    prepare(path, schedule, opts)?.evolve(t_total)
}

pub fn final_gs_probability(result: &EvolutionResult) -> f64 {
    result.p_f
}

/// `R = p_steered / p_direct − 1`.
pub fn probability_improvement_ratio(p_steered: f64, p_direct: f64) -> Result<f64> {
    if p_direct.is_nan() || p_direct <= 0.0 {
        return Err(Error::invalid(format!(
            "direct success probability must be positive, got {p_direct}"
        )));
    }
    Ok(p_steered / p_direct - 1.0)
}

/// CSV with columns `s, instantaneous_overlap, final_gs_probability`; the
/// overlap column is empty when it was not tracked.
pub fn write_evolution_csv<W: Write>(out: W, result: &EvolutionResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "instantaneous_overlap", "final_gs_probability"])?;
    for (j, s) in result.s_grid.iter().enumerate() {
        let inst = result
            .instantaneous_gs_overlap
            .as_ref()
            .map_or(String::new(), |v| v[j].to_string());
        w.write_record([
            s.to_string(),
            inst,
            result.final_gs_probability[j].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
