//! Ratio between the predicted critical-region radius and the accuracy the
//! noisy variant actually reaches, over a grid of noise levels.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::driver::{RatioVariant, Trace};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, RTableSection};
use crate::harness::experiment::run_single;
use crate::harness::rolling::RollingMinSeries;
use crate::theory;

#[derive(Debug, Clone, PartialEq)]
pub struct RCell {
    pub eps_f: f64,
    pub eps_g: f64,
    /// Critical-region radius `C(εf, εg)`.
    pub c_bound: f64,
    /// Per seed: smallest trailing-25 minimum of the noisy gradient norm.
    pub noisy_minima: Vec<f64>,
    /// Per seed: smallest true gradient norm.
    pub true_minima: Vec<f64>,
    pub r: Option<f64>,
    pub invalid: Option<String>,
}

impl RCell {
    /// Every run's smallest true gradient norm lies within `C`.
    pub fn contained(&self) -> bool {
        !self.true_minima.is_empty() && self.true_minima.iter().all(|g| *g <= self.c_bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RTable {
    pub problem: String,
    /// Curvature constant used for every cell.
    pub m: f64,
    pub eps_f: Vec<f64>,
    pub eps_g: Vec<f64>,
    /// Row-major: one row per `eps_f`, one column per `eps_g`.
    pub cells: Vec<RCell>,
}

impl RTable {
    pub fn cell(&self, i_f: usize, i_g: usize) -> &RCell {
        &self.cells[i_f * self.eps_g.len() + i_g]
    }

    pub fn finite_values(&self) -> Vec<f64> {
        self.cells.iter().filter_map(|c| c.r).filter(|r| r.is_finite()).collect()
    }

    /// `max R − min R` over the valid cells.
    pub fn spread(&self) -> Option<f64> {
        let v = self.finite_values();
        if v.is_empty() {
            return None;
        }
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        Some(hi - lo)
    }
}

fn cell_from_runs(eps_f: f64, eps_g: f64, c_bound: f64, runs: Vec<Result<Trace>>) -> RCell {
    let mut cell = RCell {
        eps_f,
        eps_g,
        c_bound,
        noisy_minima: Vec::new(),
        true_minima: Vec::new(),
        r: None,
        invalid: None,
    };
    for run in runs {
        match run {
            Ok(t) if t.is_complete() => {
                let g: Vec<f64> = t.records.iter().map(|r| r.grad_norm_noisy).collect();
                cell.noisy_minima.push(RollingMinSeries::with_default_window(&g).overall_min());
                cell.true_minima.push(t.min_grad_norm_true());
            }
            Ok(t) => {
                cell.invalid = Some(t.aborted.unwrap_or_else(|| "run ended early".into()));
            }
            Err(e) => cell.invalid = Some(e.to_string()),
        }
    }
    if cell.invalid.is_none() {
        match theory::r_diagnostic(c_bound, &cell.noisy_minima) {
            Ok(r) => cell.r = Some(r),
            Err(e) => cell.invalid = Some(e.to_string()),
        }
    }
    cell
}

/// Runs the noisy variant for every grid cell and seed. `M` is the Hessian
/// norm at the known solution. Failed runs mark their cell invalid without
/// stopping the table.
pub fn r_table(base: &ExperimentConfig, grid: &RTableSection) -> Result<RTable> {
    base.validate()?;
    for (name, g) in [("rtable.eps_f", &grid.eps_f), ("rtable.eps_g", &grid.eps_g)] {
        if g.is_empty() || g.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::config(name, "grid values must be positive and non-empty"));
        }
    }
    let obj = base.objective()?;
    let m = theory::estimate_m(&obj)?;
    let d = &base.driver;

    let cells_in: Vec<(f64, f64)> = grid
        .eps_f
        .iter()
        .flat_map(|&ef| grid.eps_g.iter().map(move |&eg| (ef, eg)))
        .collect();
    let cells = cells_in
        .into_par_iter()
        .map(|(eps_f, eps_g)| {
            let mut cfg = base.clone();
            cfg.noise.eps_f = eps_f;
            cfg.noise.eps_g = eps_g;
            let c_bound = theory::compute_constants(eps_f, eps_g, d.c0, d.c2, d.nu, m)
                .map(|tc| tc.c1_radius)
                .unwrap_or(f64::NAN);
            let runs: Vec<Result<Trace>> = cfg
                .experiment
                .seeds
                .par_iter()
                .map(|&seed| run_single(&cfg, &obj, RatioVariant::Noisy, seed))
                .collect();
            cell_from_runs(eps_f, eps_g, c_bound, runs)
        })
        .collect();

    Ok(RTable {
        problem: obj.name().to_string(),
        m,
        eps_f: grid.eps_f.clone(),
        eps_g: grid.eps_g.clone(),
        cells,
    })
}

/// Writes `rtable.csv` (rows `eps_f`, columns `eps_g`, blank for invalid
/// cells), `rtable_cells.csv` (one line per cell) and `rtable_summary.txt`.
pub fn write_r_table(table: &RTable, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let matrix = dir.join("rtable.csv");
    let mut w = csv::Writer::from_path(&matrix)?;
    let mut header = vec!["eps_f\\eps_g".to_string()];
    header.extend(table.eps_g.iter().map(|g| g.to_string()));
    w.write_record(&header)?;
    for (i, ef) in table.eps_f.iter().enumerate() {
        let mut row = vec![ef.to_string()];
        for j in 0..table.eps_g.len() {
            row.push(table.cell(i, j).r.map(|r| r.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    let long = dir.join("rtable_cells.csv");
    let mut w = csv::Writer::from_path(&long)?;
    w.write_record([
        "eps_f",
        "eps_g",
        "c_bound",
        "r",
        "sum_noisy_minima",
        "max_true_minimum",
        "contained",
        "invalid",
    ])?;
    for c in &table.cells {
        w.write_record([
            c.eps_f.to_string(),
            c.eps_g.to_string(),
            c.c_bound.to_string(),
            c.r.map(|r| r.to_string()).unwrap_or_default(),
            c.noisy_minima.iter().sum::<f64>().to_string(),
            c.true_minima.iter().copied().fold(f64::NEG_INFINITY, f64::max).to_string(),
            c.contained().to_string(),
            c.invalid.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let summary = dir.join("rtable_summary.txt");
    let mut s = String::new();
    let _ = writeln!(s, "problem: {}", table.problem);
    let _ = writeln!(s, "M: {}", table.m);
    let _ = writeln!(s, "cells: {}", table.cells.len());
    let _ = writeln!(s, "finite cells: {}", table.finite_values().len());
    match table.spread() {
        Some(v) => {
            let _ = writeln!(s, "spread (max R - min R): {v}");
        }
        None => {
            let _ = writeln!(s, "spread (max R - min R): undefined");
        }
    }
    let _ = writeln!(
        s,
        "cells violating containment: {}",
        table.cells.iter().filter(|c| !c.contained()).count()
    );
    std::fs::write(&summary, s)?;
    Ok(vec![matrix, long, summary])
}
