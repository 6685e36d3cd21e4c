use rayon::prelude::*;

use super::ising::{check_kind, evaluate_thetas};
use super::{
    build_aggregates, groups_for, EnsembleResult, ExperimentConfig, ExperimentKind, InstanceRecord,
};
use crate::error::Result;
use crate::models::{gen_unique_3sat, sat_hamiltonian};
use crate::rng::derive_seed;
use crate::steering::guess_from_solution;

/// Unique-solution 3SAT ensemble with guesses of length `lg` drawn from the
/// known solution. One record per (instance, error count); all error counts
/// of an instance share the guess seed, so their supports coincide.
pub fn run_sat_sweep(cfg: &ExperimentConfig) -> Result<EnsembleResult> {
    check_kind(cfg, ExperimentKind::SatSweep)?;
    let per_instance = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, i as u64);
            let inst = gen_unique_3sat(cfg.n, seed, cfg.max_attempts)?;
            let hf = sat_hamiltonian(&inst);
            let gs = hf.ground_state();
            cfg.errors
                .iter()
                .map(|&e| {
                    let psi =
                        guess_from_solution(gs.index, cfg.n, cfg.lg, e, derive_seed(seed, 1))?;
                    Ok(InstanceRecord {
                        index: i,
                        seed,
                        guess: psi.entries().to_vec(),
                        n_errors: e,
                        guess_correct: e == 0,
                        degeneracy: gs.degeneracy(),
                        thetas: evaluate_thetas(&hf, &psi, cfg)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<InstanceRecord> = per_instance.into_iter().flatten().collect();
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
