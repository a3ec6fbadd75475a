//! Seed sweeps of paired classical/noisy runs and their output files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::driver::{self, RatioVariant, Trace};
use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::io::write_trace_file;
use crate::harness::plot::emit_plot_series;
use crate::harness::rolling::RollingMinSeries;
use crate::noise::NoiseSpec;
use crate::problems::Objective;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub variant: RatioVariant,
    pub seed: u64,
    pub trace: Trace,
}

/// Per-run line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub variant: RatioVariant,
    pub seed: u64,
    pub iterations: usize,
    pub completed: bool,
    pub accepted_steps: usize,
    pub final_f_true: f64,
    pub final_f_noisy: f64,
    pub final_gnorm_true: f64,
    pub final_delta: f64,
    pub final_dist: Option<f64>,
    pub min_gnorm_true: f64,
    pub min_gnorm_noisy: f64,
    pub rolling25_true_last: f64,
    pub rolling25_noisy_last: f64,
    pub aborted: String,
}

impl RunSummary {
    pub fn from_run(obj: &Objective, run: &RunOutcome) -> Self {
        let t = &run.trace;
        let g_true: Vec<f64> = t.records.iter().map(|r| r.grad_norm_true).collect();
        let g_noisy: Vec<f64> = t.records.iter().map(|r| r.grad_norm_noisy).collect();
        Self {
            variant: run.variant,
            seed: run.seed,
            iterations: t.records.len(),
            completed: t.is_complete(),
            accepted_steps: t.records.iter().filter(|r| r.accepted).count(),
            final_f_true: t.final_f_true,
            final_f_noisy: t.final_f_noisy,
            final_gnorm_true: obj.gradient(&t.final_x).norm(),
            final_delta: t.final_delta,
            final_dist: obj.known_minimizer().map(|s| (&t.final_x - s).norm()),
            min_gnorm_true: t.min_grad_norm_true(),
            min_gnorm_noisy: t.min_grad_norm_noisy(),
            rolling25_true_last: RollingMinSeries::with_default_window(&g_true).last().unwrap_or(f64::NAN),
            rolling25_noisy_last: RollingMinSeries::with_default_window(&g_noisy).last().unwrap_or(f64::NAN),
            aborted: t.aborted.clone().unwrap_or_default(),
        }
    }
}

/// The noise spec a given seed runs with.
pub fn seeded_noise(cfg: &ExperimentConfig, seed: u64) -> NoiseSpec {
    cfg.noise.with_seed(seed)
}

/// One run of one variant. Both variants of a seed share the start point and
/// the noise stream.
pub fn run_single(cfg: &ExperimentConfig, obj: &Objective, variant: RatioVariant, seed: u64) -> Result<Trace> {
    let x0 = cfg.x0_policy(obj).starting_point(obj, seed)?;
    let tr = cfg.driver.clone().with_variant(variant);
    driver::run(obj, &seeded_noise(cfg, seed), &tr, &x0)
}

/// Runs every (seed, variant) pair in parallel, returned in seed-major order.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    let obj = cfg.objective()?;
    let jobs: Vec<(u64, RatioVariant)> = cfg
        .experiment
        .seeds
        .iter()
        .flat_map(|&s| cfg.experiment.variants.variants().iter().map(move |&v| (s, v)))
        .collect();
    jobs.into_par_iter()
        .map(|(seed, variant)| {
            run_single(cfg, &obj, variant, seed).map(|trace| RunOutcome { variant, seed, trace })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub runs: Vec<RunOutcome>,
    pub summaries: Vec<RunSummary>,
    pub files: Vec<PathBuf>,
}

pub fn trace_file_name(variant: RatioVariant, seed: u64) -> String {
    format!("{variant}_seed{seed}.csv")
}

/// Runs the sweep and writes one trace CSV per (variant, seed), a plot pair
/// per seed when enabled, `summary.csv` and a `config.toml` snapshot.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let runs = run_all(cfg)?;
    let obj = cfg.objective()?;
    let dir = cfg.experiment.out.as_path();
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();

    for run in &runs {
        let path = dir.join(trace_file_name(run.variant, run.seed));
        write_trace_file(&path, &run.trace.records)?;
        files.push(path);
    }
    if cfg.experiment.plots {
        for &seed in &cfg.experiment.seeds {
            let labelled: Vec<(String, &Trace)> = runs
                .iter()
                .filter(|r| r.seed == seed && !r.trace.records.is_empty())
                .map(|r| (r.variant.to_string(), &r.trace))
                .collect();
            let refs: Vec<(&str, &Trace)> = labelled.iter().map(|(l, t)| (l.as_str(), *t)).collect();
            files.extend(emit_plot_series(&refs, cfg.noise.eps_g, dir, &format!("seed{seed}"))?);
        }
    }

    let summaries: Vec<RunSummary> = runs.iter().map(|r| RunSummary::from_run(&obj, r)).collect();
    let summary_path = dir.join("summary.csv");
    write_summaries(&summary_path, &summaries)?;
    files.push(summary_path);

    let cfg_path = dir.join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml_string())?;
    files.push(cfg_path);

    Ok(ExperimentOutput { runs, summaries, files })
}

pub fn write_summaries(path: &Path, summaries: &[RunSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in summaries {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
