use rayon::prelude::*;
use serde::Serialize;

use super::ising::check_kind;
use super::{ExperimentConfig, ExperimentKind};
use crate::anneal::{
    adiabatic_time_profile, min_gap, optimal_schedule, spectrum_trace_with, total_adiabatic_time,
    AnnealPath, MinGap, ScheduleProfile, SpectrumTrace, TraceOptions,
};
use crate::dynamics::{prepare, EvolutionResult, Schedule};
use crate::error::{Error, Result};
use crate::models::{deserialize_instance, gen_ising, ising_hamiltonian, Instance, IsingInstance};
use crate::steering::{guess_accuracy, highest_field_guess, theta_vector, SteeringAngle};

/// Points of each normalized optimal schedule kept in the report.
const SCHEDULE_POINTS: usize = 101;

#[derive(Debug, Clone, Serialize)]
pub struct ThetaReport {
    pub theta_omega: f64,
    pub min_gap: MinGap,
    /// Sub-grid minimum, when refinement was requested.
    pub refined_min_gap: Option<MinGap>,
    pub t_ad_total: Option<f64>,
    /// Location of the closed gap that makes the adiabatic time infinite.
    pub divergent: Option<MinGap>,
    /// `(t/T, s)` of the optimal schedule; absent when divergent.
    pub schedule: Option<Vec<(f64, f64)>>,
    /// Linear-schedule `P_f` per anneal time.
    pub p_f: Vec<f64>,
    /// Optimal-schedule `P_f` per anneal time; absent when divergent.
    pub p_f_optimal: Option<Vec<f64>>,
    #[serde(skip)]
    pub trace: SpectrumTrace,
    #[serde(skip)]
    pub profile: ScheduleProfile,
    /// Linear-schedule evolutions per anneal time.
    #[serde(skip)]
    pub evolutions: Vec<EvolutionResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub guess: Vec<i8>,
    pub guess_correct: bool,
    pub degeneracy: usize,
    pub ground_state: usize,
    pub thetas: Vec<ThetaReport>,
    #[serde(skip)]
    pub instance: IsingInstance,
}

impl InstanceReport {
    pub fn theta(&self, theta_omega: f64) -> Option<&ThetaReport> {
        self.thetas.iter().find(|t| t.theta_omega == theta_omega)
    }
}

fn load_instance(cfg: &ExperimentConfig) -> Result<IsingInstance> {
    match &cfg.instance {
        Some(path) => match deserialize_instance(&std::fs::read_to_string(path)?)? {
            Instance::Ising(inst) => Ok(inst),
            Instance::Sat(_) => Err(Error::invalid("instance-report needs an Ising instance")),
        },
        None => gen_ising(cfg.n, cfg.h_mean, cfg.w, cfg.j_s, cfg.seed),
    }
}

/// Full analysis of one Ising instance steered by the highest-field guess:
/// spectra, adiabatic times, optimal schedules and evolutions per Θ.
pub fn run_instance_report(cfg: &ExperimentConfig) -> Result<InstanceReport> {
    check_kind(cfg, ExperimentKind::InstanceReport)?;
    let instance = load_instance(cfg)?;
    let n = instance.n();
    let hf = ising_hamiltonian(&instance);
    let gs = hf.ground_state();
    let psi = highest_field_guess(&instance)?;
    let guess_correct = gs.manifold.iter().any(|&b| guess_accuracy(&psi, b).1 == 0);
    let trace_opts = TraceOptions {
        levels: cfg.levels,
        ds: cfg.ds,
        refine: cfg.refine,
    };
    let mut opts = cfg.evolve_options();
    opts.track_instantaneous = true;
    let thetas = cfg
        .theta
        .par_iter()
        .map(|&th| {
            let path = AnnealPath::steered(
                &hf,
                &theta_vector(&psi, SteeringAngle::in_omega_units(th, n)?),
            )?;
            let trace = spectrum_trace_with(&path, trace_opts)?;
            let profile = adiabatic_time_profile(&path, &trace, cfg.norm)?;
            let linear = prepare(&path, &Schedule::Linear, &opts)?;
            let evolutions = cfg
                .t_total
                .iter()
                .map(|&t| linear.evolve(t))
                .collect::<Result<Vec<_>>>()?;
            let (schedule, p_f_optimal) = match optimal_schedule(&profile) {
                Ok(opt) => {
                    let points = opt.normalized(SCHEDULE_POINTS);
                    let mut plain = opts;
                    plain.track_instantaneous = false;
                    let prepared = prepare(&path, &Schedule::Optimal(opt), &plain)?;
                    let p = cfg
                        .t_total
                        .iter()
                        .map(|&t| Ok(prepared.evolve(t)?.p_f))
                        .collect::<Result<Vec<_>>>()?;
                    (Some(points), Some(p))
                }
                Err(Error::Divergent { .. }) => (None, None),
                Err(e) => return Err(e),
            };
            Ok(ThetaReport {
                theta_omega: th,
                min_gap: min_gap(&trace),
                refined_min_gap: trace.refined,
                t_ad_total: total_adiabatic_time(&profile).ok(),
                divergent: profile.divergent,
                schedule,
                p_f: evolutions.iter().map(|e| e.p_f).collect(),
                p_f_optimal,
                trace,
                profile,
                evolutions,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InstanceReport {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        config: cfg.clone(),
        guess: psi.entries().to_vec(),
        guess_correct,
        degeneracy: gs.degeneracy(),
        ground_state: gs.index,
        thetas,
        instance,
    })
}
