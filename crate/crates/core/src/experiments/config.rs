use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{EvolveOptions, Propagator};
use crate::error::{Error, Result};
use crate::linalg::{KrylovOptions, NormKind, DEFAULT_QUBIT_CAP};
use crate::perturbation::{GaussianSumStats, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    IsingEnsemble,
    InstanceReport,
    SatSweep,
    PertSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::IsingEnsemble => "ising-ensemble",
            ExperimentKind::InstanceReport => "instance-report",
            ExperimentKind::SatSweep => "sat-sweep",
            ExperimentKind::PertSweep => "pert-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorKind {
    Eigen,
    Krylov,
}

/// Complete description of one run. Θ values are in units of Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub n: usize,
    pub h_mean: f64,
    pub w: f64,
    pub j_s: f64,
    pub theta: Vec<f64>,
    pub t_total: Vec<f64>,
    pub ds: f64,
    pub ensemble_size: usize,
    /// Guess length for SAT sweeps and for the correct-count perturbative
    /// curves.
    pub lg: usize,
    /// Wrong guess entries to sweep.
    pub errors: Vec<usize>,
    pub max_attempts: usize,
    /// Compute spectrum traces (min gap, `R_Δ`, adiabatic time).
    pub spectrum: bool,
    pub levels: usize,
    /// Sub-grid refinement of gap minima.
    pub refine: bool,
    pub norm: NormKind,
    pub propagator: PropagatorKind,
    pub s_star: f64,
    /// Evaluation points of the exact-diagonalization check.
    pub s_star_grid: Vec<f64>,
    pub level_spacing: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma4: Option<f64>,
    pub order: Order,
    pub sum_stats: GaussianSumStats,
    /// Qubit count of the exact-diagonalization check.
    pub validate_n: usize,
    /// Instance file replacing the generated report instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub plot: bool,
}

fn omega_grid(step: f64, max: f64) -> Vec<f64> {
    let m = (max / step).round() as usize;
    (0..=m)
        .map(|k| (k as f64 * step * 1e6).round() / 1e6)
        .collect()
}

impl ExperimentConfig {
    /// Default setting of each experiment kind.
    pub fn new(kind: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            kind,
            seed: 1,
            n: 8,
            h_mean: 0.01,
            w: 0.05,
            j_s: 1.0,
            theta: vec![0.0, 1.0],
            t_total: vec![5.0, 10.0, 15.0],
            ds: 0.01,
            ensemble_size: 100,
            lg: 3,
            errors: vec![0, 1, 2, 3],
            max_attempts: 10_000,
            spectrum: true,
            levels: 4,
            refine: false,
            norm: NormKind::Spectral,
            propagator: PropagatorKind::Krylov,
            s_star: 0.3,
            s_star_grid: omega_grid(0.05, 0.45),
            level_spacing: 1.0,
            gamma3: None,
            gamma4: None,
            order: Order::Second,
            sum_stats: GaussianSumStats::spin_glass_defaults(),
            validate_n: 8,
            instance: None,
            out_dir: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
            plot: true,
        };
        match kind {
            ExperimentKind::IsingEnsemble => base,
            ExperimentKind::InstanceReport => ExperimentConfig {
                seed: super::GOLDEN_SEED,
                theta: vec![0.0, -0.6, 0.6, 1.0],
                t_total: vec![15.0],
                ensemble_size: 1,
                refine: true,
                ..base
            },
            ExperimentKind::SatSweep => ExperimentConfig {
                theta: omega_grid(0.05, 0.7),
                t_total: vec![10.0],
                spectrum: false,
                ..base
            },
            ExperimentKind::PertSweep => ExperimentConfig {
                n: 35,
                theta: vec![0.0, 0.3, 0.8, 1.0],
                ensemble_size: 20,
                lg: 7,
                errors: vec![0, 1],
                ..base
            },
        }
    }

    /// Applies the keys of a TOML document on top of `self`. Unknown keys and
    /// a conflicting `kind` are rejected.
    pub fn with_overrides(&self, text: &str) -> Result<Self> {
        let overrides: toml::Table = toml::from_str(text)?;
        let mut table = toml::Table::try_from(self)
            .map_err(|e| Error::Format(format!("cannot encode config: {e}")))?;
        for (k, v) in overrides {
            table.insert(k, v);
        }
        let merged: ExperimentConfig = table.try_into()?;
        if merged.kind != self.kind {
            return Err(Error::invalid(format!(
                "config file is for '{}' but '{}' was requested",
                merged.kind.name(),
                self.kind.name()
            )));
        }
        Ok(merged)
    }

    pub fn with_override_file(&self, path: &Path) -> Result<Self> {
        self.with_overrides(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("cannot encode config: {e}")))
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config is always serializable");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            ds: self.ds,
            propagator: match self.propagator {
                PropagatorKind::Eigen => Propagator::Eigen,
                PropagatorKind::Krylov => Propagator::Krylov(KrylovOptions::default()),
            },
            track_instantaneous: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        let exact = self.kind != ExperimentKind::PertSweep;
        if exact && !(2..=DEFAULT_QUBIT_CAP).contains(&self.n) {
            return fail(format!(
                "n must lie in 2..={DEFAULT_QUBIT_CAP}, got {}",
                self.n
            ));
        }
        if self.kind == ExperimentKind::SatSweep && self.n < 3 {
            return fail(format!("3SAT needs n >= 3, got {}", self.n));
        }
        if !exact && !(2..=64).contains(&self.n) {
            return fail(format!("n must lie in 2..=64, got {}", self.n));
        }
        if self.theta.is_empty() || self.theta.iter().any(|t| !t.is_finite()) {
            return fail("theta must be a non-empty list of finite values".into());
        }
        if matches!(
            self.kind,
            ExperimentKind::IsingEnsemble | ExperimentKind::SatSweep
        ) && !self.theta.contains(&0.0)
        {
            return fail("theta must include 0, the reference for R and R_Δ".into());
        }
        if self.t_total.is_empty() || self.t_total.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return fail("t_total must be a non-empty list of positive values".into());
        }
        if !(self.ds > 0.0 && self.ds <= 0.5) {
            return fail(format!("ds must lie in (0, 0.5], got {}", self.ds));
        }
        crate::anneal::grid_steps(self.ds)?;
        if self.ensemble_size == 0 {
            return fail("ensemble_size must be at least 1".into());
        }
        if self.kind == ExperimentKind::SatSweep || self.kind == ExperimentKind::PertSweep {
            if self.lg == 0 || self.lg > self.n {
                return fail(format!("lg must lie in 1..={}, got {}", self.n, self.lg));
            }
            if self.errors.is_empty() {
                return fail("errors must not be empty".into());
            }
        }
        if self.kind == ExperimentKind::SatSweep {
            if let Some(e) = self.errors.iter().find(|&&e| e > self.lg) {
                return fail(format!("{e} errors exceed the guess length {}", self.lg));
            }
        }
        if !(self.w >= 0.0 && self.j_s > 0.0 && self.h_mean.is_finite()) {
            return fail("need W >= 0, J_s > 0 and finite h_mean".into());
        }
        if self.levels < 2 {
            return fail("levels must be at least 2".into());
        }
        if !(0.0..1.0).contains(&self.s_star)
            || self.s_star_grid.iter().any(|s| !(0.0..1.0).contains(s))
        {
            return fail("s* values must lie in [0, 1)".into());
        }
        if self.level_spacing.is_nan() || self.level_spacing <= 0.0 {
            return fail("level_spacing must be positive".into());
        }
        if self.kind == ExperimentKind::PertSweep && !(2..=8).contains(&self.validate_n) {
            return fail(format!(
                "validate_n must lie in 2..=8, got {}",
                self.validate_n
            ));
        }
        if self.formats.is_empty() {
            return fail("at least one output format is required".into());
        }
        Ok(())
    }
}
