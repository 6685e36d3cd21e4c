use rayon::prelude::*;

use super::{
    build_aggregates, groups_for, EnsembleResult, ExperimentConfig, ExperimentKind, InstanceRecord,
    ThetaRecord,
};
use crate::anneal::{
    adiabatic_time_profile, gap_improvement_ratio, min_gap, spectrum_trace_with,
    total_adiabatic_time, AnnealPath, SpectrumTrace, TraceOptions,
};
use crate::dynamics::{prepare, probability_improvement_ratio, Schedule};
use crate::error::{Error, Result};
use crate::models::{gen_ising, ising_hamiltonian, DiagonalHamiltonian};
use crate::rng::derive_seed;
use crate::steering::{
    guess_accuracy, highest_field_guess, theta_vector, GuessVector, SteeringAngle,
};

pub(super) fn check_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::invalid(format!(
            "expected a '{}' config, got '{}'",
            kind.name(),
            cfg.kind.name()
        )));
    }
    cfg.validate()
}

/// Spectrum, adiabatic time and `P_f` for every configured Θ, with `R` and
/// `R_Δ` taken against the Θ = 0 entry.
pub(super) fn evaluate_thetas(
    hf: &DiagonalHamiltonian,
    psi: &GuessVector,
    cfg: &ExperimentConfig,
) -> Result<Vec<ThetaRecord>> {
    let n = psi.n();
    let opts = cfg.evolve_options();
    let trace_opts = TraceOptions {
        levels: cfg.levels,
        ds: cfg.ds,
        refine: cfg.refine,
    };
    let mut traces: Vec<Option<SpectrumTrace>> = Vec::with_capacity(cfg.theta.len());
    let mut records = Vec::with_capacity(cfg.theta.len());
    for &th in &cfg.theta {
        let angle = SteeringAngle::in_omega_units(th, n)?;
        let path = AnnealPath::steered(hf, &theta_vector(psi, angle))?;
        let (trace, mg, t_ad, divergent) = if cfg.spectrum {
            let trace = spectrum_trace_with(&path, trace_opts)?;
            let profile = adiabatic_time_profile(&path, &trace, cfg.norm)?;
            let mg = min_gap(&trace);
            let t_ad = total_adiabatic_time(&profile).ok();
            (Some(trace), Some(mg), t_ad, profile.divergent.is_some())
        } else {
            (None, None, None, false)
        };
        let prepared = prepare(&path, &Schedule::Linear, &opts)?;
        let p_f = cfg
            .t_total
            .iter()
            .map(|&t| Ok(prepared.evolve(t)?.p_f))
            .collect::<Result<Vec<f64>>>()?;
        traces.push(trace);
        records.push(ThetaRecord {
            theta_omega: th,
            min_gap: mg,
            t_ad_total: t_ad,
            divergent,
            p_f,
            r: Vec::new(),
            r_delta: None,
        });
    }
    let base = cfg
        .theta
        .iter()
        .position(|&t| t == 0.0)
        .ok_or_else(|| Error::invalid("theta must include 0"))?;
    let p0 = records[base].p_f.clone();
    for (k, rec) in records.iter_mut().enumerate() {
        rec.r = rec
            .p_f
            .iter()
            .zip(&p0)
            .map(|(&p, &d)| probability_improvement_ratio(p, d).ok())
            .collect();
        if let (Some(s), Some(d)) = (&traces[k], &traces[base]) {
            rec.r_delta = gap_improvement_ratio(s, d).ok();
        }
    }
    Ok(records)
}

/// Random Ising ensemble steered by the highest-field heuristic. Guess
/// correctness is judged against the brute-force ground state (every
/// member of a degenerate ground manifold counts).
pub fn run_ising_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleResult> {
    check_kind(cfg, ExperimentKind::IsingEnsemble)?;
    let records = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, i as u64);
            let inst = gen_ising(cfg.n, cfg.h_mean, cfg.w, cfg.j_s, seed)?;
            let hf = ising_hamiltonian(&inst);
            let gs = hf.ground_state();
            let psi = highest_field_guess(&inst)?;
            let n_errors = gs
                .manifold
                .iter()
                .map(|&b| guess_accuracy(&psi, b).1)
                .min()
                .expect("non-empty manifold");
            Ok(InstanceRecord {
                index: i,
                seed,
                guess: psi.entries().to_vec(),
                n_errors,
                guess_correct: n_errors == 0,
                degeneracy: gs.degeneracy(),
                thetas: evaluate_thetas(&hf, &psi, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let groups = groups_for(cfg.kind, &records, &cfg.errors);
    let aggregates = build_aggregates(&records, &groups, &cfg.theta, &cfg.t_total);
    Ok(EnsembleResult {
        kind: cfg.kind,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        config: cfg.clone(),
        records,
        aggregates,
    })
}
