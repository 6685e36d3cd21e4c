use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::plot::{Plot, Series};
use super::{
    EnsembleResult, ExperimentConfig, ExperimentKind, InstanceReport, Metric, OutputFormat,
    PertSweepResult,
};
use crate::anneal::write_trace_csv;
use crate::dynamics::write_evolution_csv;
use crate::error::Result;
use crate::models::{serialize_instance, Instance};

/// Files written by [`emit_outputs`], in creation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Emitted {
    pub files: Vec<PathBuf>,
}

/// Anything the harness can write out.
pub enum RunOutput<'a> {
    Ensemble(&'a EnsembleResult),
    Report(&'a InstanceReport),
    Pert(&'a PertSweepResult),
}

impl<'a> From<&'a EnsembleResult> for RunOutput<'a> {
    fn from(r: &'a EnsembleResult) -> Self {
        RunOutput::Ensemble(r)
    }
}

impl<'a> From<&'a InstanceReport> for RunOutput<'a> {
    fn from(r: &'a InstanceReport) -> Self {
        RunOutput::Report(r)
    }
}

impl<'a> From<&'a PertSweepResult> for RunOutput<'a> {
    fn from(r: &'a PertSweepResult) -> Self {
        RunOutput::Pert(r)
    }
}

struct Sink<'a> {
    dir: &'a Path,
    hash: &'a str,
    seed: u64,
    cfg: &'a ExperimentConfig,
    emitted: Emitted,
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

impl Sink<'_> {
    fn header(&self) -> String {
        format!("config_hash={} seed={}", self.hash, self.seed)
    }

    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = BufWriter::new(File::create(&path)?);
        self.emitted.files.push(path);
        Ok(f)
    }

    fn csv_with(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
    ) -> Result<()> {
        if !self.cfg.formats.contains(&OutputFormat::Csv) {
            return Ok(());
        }
        let header = self.header();
        let mut f = self.file(name)?;
        writeln!(f, "# {header}")?;
        body(&mut f)?;
        f.flush()?;
        Ok(())
    }

    fn csv_rows(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        self.csv_with(name, |f| {
            let mut w = csv::Writer::from_writer(f);
            w.write_record(columns)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if !self.cfg.formats.contains(&OutputFormat::Json) {
            return Ok(());
        }
        let mut f = self.file(name)?;
        serde_json::to_writer_pretty(&mut f, value)?;
        writeln!(f)?;
        f.flush()?;
        Ok(())
    }

    fn svg(&mut self, name: &str, plot: Plot) -> Result<()> {
        if !self.cfg.plot {
            return Ok(());
        }
        let text = plot.to_svg(&self.header());
        let mut f = self.file(name)?;
        f.write_all(text.as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

/// Writes CSV and/or JSON per the config's formats, plus SVG plots unless
/// plotting is disabled, into the config's output directory. Every file
/// carries the config hash and seed.
pub fn emit_outputs<'a>(result: impl Into<RunOutput<'a>>) -> Result<Emitted> {
    let result = result.into();
    let (cfg, hash, seed) = match &result {
        RunOutput::Ensemble(r) => (&r.config, &r.config_hash, r.seed),
        RunOutput::Report(r) => (&r.config, &r.config_hash, r.seed),
        RunOutput::Pert(r) => (&r.config, &r.config_hash, r.seed),
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut sink = Sink {
        dir: &cfg.out_dir,
        hash,
        seed,
        cfg,
        emitted: Emitted::default(),
    };
    match result {
        RunOutput::Ensemble(r) => emit_ensemble(&mut sink, r)?,
        RunOutput::Report(r) => emit_report(&mut sink, r)?,
        RunOutput::Pert(r) => emit_pert(&mut sink, r)?,
    }
    Ok(sink.emitted)
}

pub fn read_ensemble_json(path: &Path) -> Result<EnsembleResult> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn emit_ensemble(sink: &mut Sink, r: &EnsembleResult) -> Result<()> {
    let prefix = r.kind.name();
    let mut rows = Vec::new();
    for rec in &r.records {
        let guess: Vec<String> = rec.guess.iter().map(i8::to_string).collect();
        for th in &rec.thetas {
            for (ti, t) in r.config.t_total.iter().enumerate() {
                rows.push(vec![
                    rec.index.to_string(),
                    rec.seed.to_string(),
                    guess.join(" "),
                    rec.n_errors.to_string(),
                    rec.guess_correct.to_string(),
                    rec.degeneracy.to_string(),
                    th.theta_omega.to_string(),
                    t.to_string(),
                    th.p_f[ti].to_string(),
                    opt(th.r[ti]),
                    opt(th.min_gap.map(|m| m.s)),
                    opt(th.min_gap.map(|m| m.gap)),
                    opt(th.t_ad_total),
                    th.divergent.to_string(),
                    opt(th.r_delta),
                ]);
            }
        }
    }
    sink.csv_rows(
        &format!("{prefix}_records.csv"),
        &[
            "index",
            "seed",
            "guess",
            "n_errors",
            "guess_correct",
            "degeneracy",
            "theta_omega",
            "t_total",
            "p_f",
            "r",
            "min_gap_s",
            "min_gap",
            "t_ad_total",
            "divergent",
            "r_delta",
        ],
        rows,
    )?;
    let rows = r
        .aggregates
        .iter()
        .map(|p| {
            let stat = |s: Option<&super::Stats>| -> Vec<String> {
                match s {
                    Some(s) => vec![
                        s.count.to_string(),
                        s.mean.to_string(),
                        s.std.to_string(),
                        s.stderr.to_string(),
                        s.median.to_string(),
                    ],
                    None => vec![String::new(); 5],
                }
            };
            let mut row = vec![
                p.group.clone(),
                serde_json::to_value(p.metric)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                p.theta_omega.to_string(),
                opt(p.t_total),
            ];
            row.extend(stat(p.full.as_ref()));
            row.extend(stat(p.trimmed.as_ref()));
            row.push(
                p.outliers
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(";"),
            );
            row
        })
        .collect();
    sink.csv_rows(
        &format!("{prefix}_aggregates.csv"),
        &[
            "group",
            "metric",
            "theta_omega",
            "t_total",
            "count",
            "mean",
            "std",
            "stderr",
            "median",
            "trimmed_count",
            "trimmed_mean",
            "trimmed_std",
            "trimmed_stderr",
            "trimmed_median",
            "outliers",
        ],
        rows,
    )?;
    sink.json(&format!("{prefix}.json"), r)?;
    let mean = |group: &str, metric, th, t| {
        r.point(group, metric, th, Some(t))
            .and_then(|p| p.full.as_ref())
            .map_or(f64::NAN, |s| s.mean)
    };
    match r.kind {
        ExperimentKind::SatSweep => {
            for &t in &r.config.t_total {
                let mut plot = Plot::new(format!("Mean R at T = {t}"), "Θ / Ω", "R");
                for &e in &r.config.errors {
                    let g = format!("errors={e}");
                    let pts = r
                        .config
                        .theta
                        .iter()
                        .map(|&th| (th, mean(&g, Metric::R, th, t)))
                        .collect();
                    plot = plot.with(Series::new(format!("{e} wrong"), pts));
                }
                sink.svg(&format!("{prefix}_r_T{t}.svg"), plot)?;
            }
        }
        _ => {
            let mut plot = Plot::new("Mean P_f, correctly guessed instances", "T", "P_f");
            for &th in &r.config.theta {
                let pts = r
                    .config
                    .t_total
                    .iter()
                    .map(|&t| (t, mean("correct", Metric::PF, th, t)))
                    .collect();
                plot = plot.with(Series::new(format!("Θ = {th}Ω"), pts));
            }
            sink.svg(&format!("{prefix}_pf.svg"), plot)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportJson<'a> {
    #[serde(flatten)]
    report: &'a InstanceReport,
    instance: serde_json::Value,
}

fn emit_report(sink: &mut Sink, r: &InstanceReport) -> Result<()> {
    let mut rows = Vec::new();
    for th in &r.thetas {
        for (ti, t) in r.config.t_total.iter().enumerate() {
            rows.push(vec![
                th.theta_omega.to_string(),
                th.min_gap.s.to_string(),
                th.min_gap.gap.to_string(),
                opt(th.refined_min_gap.map(|m| m.s)),
                opt(th.refined_min_gap.map(|m| m.gap)),
                opt(th.t_ad_total),
                th.divergent.is_some().to_string(),
                t.to_string(),
                th.p_f[ti].to_string(),
                opt(th.p_f_optimal.as_ref().map(|p| p[ti])),
            ]);
        }
    }
    sink.csv_rows(
        "report_summary.csv",
        &[
            "theta_omega",
            "min_gap_s",
            "min_gap",
            "refined_s",
            "refined_gap",
            "t_ad_total",
            "divergent",
            "t_total",
            "p_f",
            "p_f_optimal",
        ],
        rows,
    )?;
    for th in &r.thetas {
        let label = th.theta_omega;
        sink.csv_with(&format!("trace_theta{label}.csv"), |f| {
            write_trace_csv(f, &th.trace, Some(&th.profile))
        })?;
        if let Some(points) = &th.schedule {
            let rows = points
                .iter()
                .map(|(u, s)| vec![u.to_string(), s.to_string()])
                .collect();
            sink.csv_rows(
                &format!("schedule_theta{label}.csv"),
                &["t_over_T", "s"],
                rows,
            )?;
        }
        for (ev, t) in th.evolutions.iter().zip(&r.config.t_total) {
            sink.csv_with(&format!("evolution_theta{label}_T{t}.csv"), |f| {
                write_evolution_csv(f, ev)
            })?;
        }
    }
    let instance = serde_json::from_str(&serialize_instance(&Instance::Ising(r.instance.clone())))?;
    sink.json(
        "report.json",
        &ReportJson {
            report: r,
            instance,
        },
    )?;

    let mut gap = Plot::new("Spectral gap", "s", "gap").log_y();
    let mut sched = Plot::new("Optimal schedules", "t / T", "s");
    let mut evo = Plot::new(
        format!(
            "Final ground-state probability, T = {}",
            r.config.t_total[0]
        ),
        "s",
        "probability",
    );
    for th in &r.thetas {
        let label = format!("Θ = {}Ω", th.theta_omega);
        let pts = th
            .trace
            .s_grid
            .iter()
            .copied()
            .zip(th.trace.gap.iter().copied())
            .collect();
        gap = gap.with(Series::new(label.clone(), pts));
        if let Some(points) = &th.schedule {
            sched = sched.with(Series::new(label.clone(), points.clone()));
        }
        let ev = &th.evolutions[0];
        let pts = ev
            .s_grid
            .iter()
            .copied()
            .zip(ev.final_gs_probability.iter().copied())
            .collect();
        evo = evo.with(Series::new(label, pts));
    }
    sink.svg("report_gap.svg", gap)?;
    sink.svg("report_schedule.svg", sched)?;
    sink.svg("report_evolution.svg", evo)?;
    Ok(())
}

fn emit_pert(sink: &mut Sink, r: &PertSweepResult) -> Result<()> {
    let stat_cols = |s: &super::Stats| {
        vec![
            s.count.to_string(),
            s.mean.to_string(),
            s.std.to_string(),
            s.stderr.to_string(),
        ]
    };
    let rows = r
        .guess_length
        .iter()
        .map(|p| {
            let mut row = vec![
                p.theta_omega.to_string(),
                p.n_errors.to_string(),
                p.lg.to_string(),
            ];
            row.extend(stat_cols(&p.overlap));
            row
        })
        .collect();
    sink.csv_rows(
        "pert_guess_length.csv",
        &[
            "theta_omega",
            "n_errors",
            "lg",
            "count",
            "mean",
            "std",
            "stderr",
        ],
        rows,
    )?;
    let rows = r
        .correct_count
        .iter()
        .map(|p| {
            let mut row = vec![
                p.theta_omega.to_string(),
                p.lg.to_string(),
                p.n_correct.to_string(),
            ];
            row.extend(stat_cols(&p.overlap));
            row
        })
        .collect();
    sink.csv_rows(
        "pert_correct_count.csv",
        &[
            "theta_omega",
            "lg",
            "n_correct",
            "count",
            "mean",
            "std",
            "stderr",
        ],
        rows,
    )?;
    let rows = r
        .validation
        .iter()
        .map(|p| {
            let mut row = vec![p.theta_omega.to_string(), p.s_star.to_string()];
            row.extend(stat_cols(&p.overlap));
            row.extend([p.min.to_string(), p.max.to_string()]);
            row
        })
        .collect();
    sink.csv_rows(
        "pert_validation.csv",
        &[
            "theta_omega",
            "s_star",
            "count",
            "mean",
            "std",
            "stderr",
            "min",
            "max",
        ],
        rows,
    )?;
    sink.json("pert-sweep.json", r)?;

    let n = r.config.n;
    for &e in &r.config.errors {
        let mut plot = Plot::new(
            format!("Target overlap, {e} wrong, N = {n}"),
            "L_g",
            "overlap",
        )
        .log_y();
        for &th in &r.config.theta {
            let pts = r
                .guess_length_curve(th, e)
                .into_iter()
                .map(|(l, v)| (l as f64, v))
                .collect();
            plot = plot.with(Series::new(format!("Θ = {th}Ω"), pts));
        }
        sink.svg(&format!("pert_guess_length_errors{e}.svg"), plot)?;
    }
    let mut plot = Plot::new(
        format!("Target overlap, L_g = {}", r.config.lg),
        "correct entries",
        "overlap",
    )
    .log_y();
    for &th in &r.config.theta {
        let pts = r
            .correct_count_curve(th)
            .into_iter()
            .map(|(c, v)| (c as f64, v))
            .collect();
        plot = plot.with(Series::new(format!("Θ = {th}Ω"), pts));
    }
    sink.svg("pert_correct_count.svg", plot)?;
    let mut plot = Plot::new(
        format!(
            "Analytic vs exact ground state, N = {}",
            r.config.validate_n
        ),
        "s*",
        "overlap",
    );
    for &th in &r.config.theta {
        plot = plot.with(Series::new(format!("Θ = {th}Ω"), r.validation_curve(th)));
    }
    sink.svg("pert_validation.svg", plot)?;
    Ok(())
}
