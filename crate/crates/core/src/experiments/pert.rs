use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ising::check_kind;
use super::{stats, ExperimentConfig, ExperimentKind, Stats};
use crate::error::{Error, Result};
use crate::models::gen_ising;
use crate::perturbation::{
    draw, perturbative_coefficients, target_overlap, validate_against_exact_with, Draw,
    PerturbationParams, PerturbativeState,
};
use crate::rng::derive_seed;
use crate::steering::{highest_field_guess, omega, theta_vector, SteeringAngle};

/// Mean target overlap against guess length at a fixed error count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessLengthPoint {
    pub theta_omega: f64,
    pub n_errors: usize,
    pub lg: usize,
    pub overlap: Stats,
}

/// Mean target overlap against the number of correct entries of a guess of
/// fixed length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectCountPoint {
    pub theta_omega: f64,
    pub lg: usize,
    pub n_correct: usize,
    pub overlap: Stats,
}

/// Analytic-versus-exact ground-state overlap at one `s*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub theta_omega: f64,
    pub s_star: f64,
    pub overlap: Stats,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PertSweepResult {
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub guess_length: Vec<GuessLengthPoint>,
    pub correct_count: Vec<CorrectCountPoint>,
    pub validation: Vec<ValidationPoint>,
}

impl PertSweepResult {
    /// Mean overlaps of a guess-length curve, ordered by `lg`.
    pub fn guess_length_curve(&self, theta_omega: f64, n_errors: usize) -> Vec<(usize, f64)> {
        self.guess_length
            .iter()
            .filter(|p| p.theta_omega == theta_omega && p.n_errors == n_errors)
            .map(|p| (p.lg, p.overlap.mean))
            .collect()
    }

    pub fn correct_count_curve(&self, theta_omega: f64) -> Vec<(usize, f64)> {
        self.correct_count
            .iter()
            .filter(|p| p.theta_omega == theta_omega)
            .map(|p| (p.n_correct, p.overlap.mean))
            .collect()
    }

    pub fn validation_curve(&self, theta_omega: f64) -> Vec<(f64, f64)> {
        self.validation
            .iter()
            .filter(|p| p.theta_omega == theta_omega)
            .map(|p| (p.s_star, p.overlap.mean))
            .collect()
    }
}

fn params(
    cfg: &ExperimentConfig,
    n: usize,
    s_star: f64,
    sum_h: f64,
    sum_j: f64,
) -> PerturbationParams {
    PerturbationParams {
        level_spacing: cfg.level_spacing,
        gamma3: cfg.gamma3,
        gamma4: cfg.gamma4,
        order: cfg.order,
        ..PerturbationParams::new(n, s_star, sum_h, sum_j)
    }
}

fn mean_overlap(
    draws: &[(Draw, PerturbativeState)],
    lg: usize,
    n_errors: usize,
    theta: f64,
) -> Result<Stats> {
    let values = draws
        .iter()
        .map(|(d, st)| target_overlap(&d.theta_vector(lg, n_errors, theta)?, st, &d.solution))
        .collect::<Result<Vec<f64>>>()?;
    Ok(stats(&values).expect("at least one draw"))
}

/// Perturbative target overlaps at `n` (Gaussian sums, `ensemble_size`
/// draws per point, shared across points) against guess length for each
/// configured error count and against the number of correct entries at
/// `L_g = lg`, plus the exact-diagonalization check at `validate_n` over
/// `s_star_grid`.
pub fn run_pert_sweep(cfg: &ExperimentConfig) -> Result<PertSweepResult> {
    check_kind(cfg, ExperimentKind::PertSweep)?;
    if let Some(&e) = cfg.errors.iter().find(|&&e| e > cfg.n) {
        return Err(Error::invalid(format!("{e} errors exceed n = {}", cfg.n)));
    }
    let n = cfg.n;
    let draws = (0..cfg.ensemble_size)
        .map(|d| {
            let dr = draw(n, &cfg.sum_stats, derive_seed(cfg.seed, d as u64))?;
            let st = perturbative_coefficients(&params(cfg, n, cfg.s_star, dr.sum_h, dr.sum_j))?;
            Ok((dr, st))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut guess_length = Vec::new();
    let mut correct_count = Vec::new();
    for &th in &cfg.theta {
        let theta = th * omega(n);
        for &e in &cfg.errors {
            for lg in e.max(1)..=n {
                guess_length.push(GuessLengthPoint {
                    theta_omega: th,
                    n_errors: e,
                    lg,
                    overlap: mean_overlap(&draws, lg, e, theta)?,
                });
            }
        }
        for n_correct in 0..=cfg.lg {
            correct_count.push(CorrectCountPoint {
                theta_omega: th,
                lg: cfg.lg,
                n_correct,
                overlap: mean_overlap(&draws, cfg.lg, cfg.lg - n_correct, theta)?,
            });
        }
    }
    let instances = (0..cfg.ensemble_size)
        .map(|i| {
            gen_ising(
                cfg.validate_n,
                cfg.h_mean,
                cfg.w,
                cfg.j_s,
                derive_seed(cfg.seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(f64, f64)> = cfg
        .theta
        .iter()
        .flat_map(|&th| cfg.s_star_grid.iter().map(move |&s| (th, s)))
        .collect();
    let validation = cells
        .par_iter()
        .map(|&(th, s)| {
            let values = instances
                .iter()
                .map(|inst| {
                    let psi = highest_field_guess(inst)?;
                    let theta = theta_vector(&psi, SteeringAngle::in_omega_units(th, inst.n())?);
                    validate_against_exact_with(inst, &theta, &params(cfg, inst.n(), s, 0.0, 0.0))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(ValidationPoint {
                theta_omega: th,
                s_star: s,
                overlap: stats(&values).expect("at least one instance"),
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PertSweepResult {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        config: cfg.clone(),
        guess_length,
        correct_count,
        validation,
    })
}
