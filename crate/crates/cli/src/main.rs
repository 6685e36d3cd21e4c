use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sqa_core::experiments::{
    emit_outputs, run_instance_report, run_ising_ensemble, run_pert_sweep, run_sat_sweep, Emitted,
    EnsembleResult, ExperimentConfig, ExperimentKind, Metric, OutputFormat, PropagatorKind,
};
use sqa_core::models::{gen_ising, gen_unique_3sat, serialize_instance, Instance};

/// Steered quantum annealing experiments.
#[derive(Debug, Parser)]
#[command(name = "sqa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random Ising or unique-solution 3SAT instance file.
    GenInstance(GenArgs),
    /// Random Ising ensemble steered by the highest-field guess.
    IsingEnsemble(RunArgs),
    /// Spectra, schedules and evolutions of one Ising instance.
    InstanceReport(RunArgs),
    /// 3SAT sweep over steering angle and number of wrong guess entries.
    SatSweep(RunArgs),
    /// Perturbative target-overlap curves for large systems.
    PertSweep(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Ising,
    Sat,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "ising")]
    model: Model,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    h_mean: f64,
    #[arg(long, default_value_t = 0.05)]
    w: f64,
    #[arg(long, default_value_t = 1.0)]
    j_s: f64,
    #[arg(long, default_value_t = 10_000)]
    max_attempts: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Steering angles in units of Ω, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    /// Anneal times, comma separated.
    #[arg(long, value_delimiter = ',')]
    t_total: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.01)]
    ds: f64,
    #[arg(long)]
    ensemble_size: Option<usize>,
    /// Wrong guess entries to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    errors: Option<Vec<usize>>,
    /// Guess length.
    #[arg(long)]
    lg: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    h_mean: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    j_s: Option<f64>,
    #[arg(long)]
    s_star: Option<f64>,
    #[arg(long)]
    max_attempts: Option<usize>,
    /// Instance file for instance-report.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    propagator: Option<Propagator>,
    /// Refine gap minima below the grid resolution.
    #[arg(long)]
    refine: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    #[arg(long, overrides_with = "no_plot")]
    plot: bool,
    #[arg(long = "no-plot", overrides_with = "plot")]
    no_plot: bool,
    /// TOML file whose keys override every other setting.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Propagator {
    Eigen,
    Krylov,
}

impl RunArgs {
    fn config(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::new(kind);
        c.ds = self.ds;
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(
            n,
            seed,
            theta,
            t_total,
            ensemble_size,
            errors,
            lg,
            h_mean,
            w,
            j_s,
            s_star,
            max_attempts,
            out_dir
        );
        if self.instance.is_some() {
            c.instance = self.instance.clone();
        }
        if let Some(p) = self.propagator {
            c.propagator = match p {
                Propagator::Eigen => PropagatorKind::Eigen,
                Propagator::Krylov => PropagatorKind::Krylov,
            };
        }
        if self.refine {
            c.refine = true;
        }
        if let Some(f) = &self.format {
            c.formats = f
                .iter()
                .map(|f| match f {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                })
                .collect();
        }
        if self.no_plot {
            c.plot = false;
        } else if self.plot {
            c.plot = true;
        }
        if let Some(path) = &self.config {
            c = c
                .with_override_file(path)
                .with_context(|| format!("reading config {}", path.display()))?;
        }
        c.validate()?;
        Ok(c)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.4}"))
}

fn summarize_ensemble(r: &EnsembleResult) {
    let cfg = &r.config;
    if r.kind == ExperimentKind::IsingEnsemble {
        println!(
            "correct heuristic guesses: {}/{}",
            r.n_correct(),
            r.records.len()
        );
        for &th in &cfg.theta {
            if th == 0.0 {
                continue;
            }
            if let Some(p) = r.point("correct", Metric::RDelta, th, None) {
                let t = p.trimmed.as_ref();
                println!(
                    "Θ = {th}Ω: R_Δ trimmed mean {} ± {} ({} outliers)",
                    fmt_opt(t.map(|s| s.mean)),
                    fmt_opt(t.map(|s| s.std)),
                    p.outliers.len()
                );
            }
            for &t in &cfg.t_total {
                println!(
                    "Θ = {th}Ω, T = {t}: mean P_f ratio to Θ = 0 {}",
                    fmt_opt(r.mean_pf_ratio("correct", th, t))
                );
            }
        }
    } else {
        for &e in &cfg.errors {
            for &t in &cfg.t_total {
                let best = cfg
                    .theta
                    .iter()
                    .filter_map(|&th| {
                        let m = r
                            .point(&format!("errors={e}"), Metric::R, th, Some(t))?
                            .full?
                            .mean;
                        Some((th, m))
                    })
                    .max_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((th, m)) = best {
                    println!("{e} wrong, T = {t}: max mean R = {m:.4} at Θ = {th}Ω");
                }
            }
        }
    }
}

fn report_files(out: &Emitted) {
    for f in &out.files {
        println!("wrote {}", f.display());
    }
}

fn gen_instance(a: &GenArgs) -> Result<()> {
    let inst = match a.model {
        Model::Ising => Instance::Ising(gen_ising(a.n, a.h_mean, a.w, a.j_s, a.seed)?),
        Model::Sat => Instance::Sat(gen_unique_3sat(a.n, a.seed, a.max_attempts)?),
    };
    let text = serialize_instance(&inst);
    match &a.out {
        Some(p) => {
            std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenInstance(a) => gen_instance(&a)?,
        Command::IsingEnsemble(a) => {
            let r = run_ising_ensemble(&a.config(ExperimentKind::IsingEnsemble)?)?;
            summarize_ensemble(&r);
            report_files(&emit_outputs(&r)?);
        }
        Command::SatSweep(a) => {
            let r = run_sat_sweep(&a.config(ExperimentKind::SatSweep)?)?;
            summarize_ensemble(&r);
            report_files(&emit_outputs(&r)?);
        }
        Command::InstanceReport(a) => {
            let r = run_instance_report(&a.config(ExperimentKind::InstanceReport)?)?;
            println!("guess {:?} correct: {}", r.guess, r.guess_correct);
            for th in &r.thetas {
                let t_ad = match (th.t_ad_total, th.divergent) {
                    (Some(t), _) => format!("{t:.1}"),
                    (None, Some(d)) => format!("infinite (gap {:.1e} at s = {:.4})", d.gap, d.s),
                    _ => "-".into(),
                };
                let p: Vec<String> = th.p_f.iter().map(|p| format!("{p:.4}")).collect();
                println!(
                    "Θ = {}Ω: min gap {:.4e} at s = {:.2}, T_ad {t_ad}, P_f {}",
                    th.theta_omega,
                    th.min_gap.gap,
                    th.min_gap.s,
                    p.join(" ")
                );
            }
            report_files(&emit_outputs(&r)?);
        }
        Command::PertSweep(a) => {
            let r = run_pert_sweep(&a.config(ExperimentKind::PertSweep)?)?;
            for &th in &r.config.theta {
                let c = r.correct_count_curve(th);
                let cells: Vec<String> = c.iter().map(|(k, v)| format!("{k}:{v:.2e}")).collect();
                println!("Θ = {th}Ω, L_g = {}: {}", r.config.lg, cells.join(" "));
            }
            report_files(&emit_outputs(&r)?);
        }
    }
    Ok(())
}

/// 0 success, 1 configuration or I/O error, 2 instance generation gave up,
/// 3 fatal numerical failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    use sqa_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::GenerationExhausted { .. }) => 2,
        Some(
            E::Divergent { .. }
            | E::NotNormalized { .. }
            | E::EigenFailure
            | E::NotHermitian { .. },
        ) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
