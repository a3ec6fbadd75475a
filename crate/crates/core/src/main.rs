use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;

use noisy_tr::driver::{self, RatioVariant};
use noisy_tr::harness::config::{box_start, ExperimentConfig, RTableSection, VariantSelection};
use noisy_tr::harness::experiment::{run_experiment, seeded_noise};
use noisy_tr::harness::presets::preset;
use noisy_tr::harness::rtable::{r_table, write_r_table};
use noisy_tr::problems::{finite_difference_check, ProblemId};
use noisy_tr::subproblem::Solver;
use noisy_tr::theory;
use noisy_tr::{Error, Result};

/// Trust-region experiments with noisy function and derivative values.
#[derive(Parser)]
#[command(name = "ntr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seed sweep from a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in configuration.
    Preset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Build the R table over a grid of noise levels.
    Rtable {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the constants of the convergence analysis for a config.
    Constants { config: PathBuf },
    /// Compare analytic derivatives with finite differences.
    Check {
        problem: String,
        /// Number of random points besides the starting point.
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Args, Default)]
struct Overrides {
    /// Comma-separated seeds; `a-b` expands to an inclusive range.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    delta0: Option<f64>,
    /// classical, noisy or both.
    #[arg(long)]
    variant: Option<VariantSelection>,
    /// cauchy, dogleg or newton_cg.
    #[arg(long)]
    solver: Option<Solver>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = |part: &str| Error::config("--seeds", format!("cannot parse `{part}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if b < a {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    Ok(out)
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = &self.seeds {
            cfg.experiment.seeds = parse_seeds(s)?;
        }
        if let Some(o) = &self.out {
            cfg.experiment.out = o.clone();
        }
        if let Some(n) = self.iters {
            cfg.driver.max_iters = n;
        }
        if let Some(d) = self.delta0 {
            cfg.driver.delta0 = d;
        }
        if let Some(v) = self.variant {
            cfg.experiment.variants = v;
        }
        if let Some(s) = self.solver {
            cfg.driver.solver = s;
        }
        cfg.validate()
    }
}

fn cmd_run(mut cfg: ExperimentConfig, overrides: &Overrides) -> Result<()> {
    overrides.apply(&mut cfg)?;
    let out = run_experiment(&cfg)?;
    println!(
        "{:<10} {:>6} {:>14} {:>14} {:>14} {:>12}",
        "variant", "seed", "final_f", "min_gnorm", "rolling25", "final_delta"
    );
    for s in &out.summaries {
        println!(
            "{:<10} {:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.4e}{}",
            s.variant.to_string(),
            s.seed,
            s.final_f_true,
            s.min_gnorm_true,
            s.rolling25_true_last,
            s.final_delta,
            if s.aborted.is_empty() { String::new() } else { format!("  aborted: {}", s.aborted) }
        );
    }
    println!("wrote {} files to {}", out.files.len(), cfg.experiment.out.display());
    Ok(())
}

fn cmd_rtable(mut cfg: ExperimentConfig, overrides: &Overrides) -> Result<()> {
    overrides.apply(&mut cfg)?;
    let grid = cfg.rtable.clone().unwrap_or_default();
    let table = r_table(&cfg, &grid)?;
    let files = write_r_table(&table, &cfg.experiment.out)?;
    print!("{:>10}", "eps_f\\g");
    for g in &table.eps_g {
        print!(" {g:>8}");
    }
    println!();
    for (i, f) in table.eps_f.iter().enumerate() {
        print!("{f:>10}");
        for j in 0..table.eps_g.len() {
            match table.cell(i, j).r {
                Some(r) => print!(" {r:>8.3}"),
                None => print!(" {:>8}", "invalid"),
            }
        }
        println!();
    }
    match table.spread() {
        Some(s) => println!("spread: {s:.3}"),
        None => println!("spread: undefined"),
    }
    println!("wrote {} files to {}", files.len(), cfg.experiment.out.display());
    Ok(())
}

fn cmd_constants(cfg: &ExperimentConfig) -> Result<()> {
    let obj = cfg.objective()?;
    let d = &cfg.driver;
    let n = &cfg.noise;
    let m = theory::estimate_m(&obj)?;
    let tc = theory::compute_constants(n.eps_f, n.eps_g, d.c0, d.c2, d.nu, m)?;

    // Curvature along an actual noisy-variant path for the first seed.
    let seed = cfg.experiment.seeds[0];
    let x0 = cfg.x0_policy(&obj).starting_point(&obj, seed)?;
    let mut points: Vec<DVector<f64>> = vec![x0.clone()];
    driver::run_observed(
        &obj,
        &seeded_noise(cfg, seed),
        &d.clone().with_variant(RatioVariant::Noisy),
        &x0,
        |ctx| points.push(ctx.trial.clone()),
    )?;
    let l = theory::estimate_lipschitz(&obj, &points);
    let l_b = theory::noisy_hessian_bound(&obj, n.eps_b)?;

    println!("problem = {}", obj.name());
    println!("eps_f = {}\neps_g = {}\neps_B = {}", n.eps_f, n.eps_g, n.eps_b);
    println!("r = {}", tc.r);
    println!("M_at_solution = {m}");
    println!("mu = {}\neta = {}\nbeta = {}\ngamma = {}", tc.mu, tc.eta, tc.beta, tc.gamma);
    println!("delta_bar = {}", tc.delta_bar);
    println!("c1_radius = {}", tc.c1_radius);
    println!("accepted_increase_bound = {}", theory::accepted_increase_bound(tc.r, d.c0, n.eps_f));
    println!("L_path = {l}\nL_B = {l_b}");
    let m_path = theory::curvature_constant(l_b, l);
    if let Ok(tp) = theory::compute_constants(n.eps_f, n.eps_g, d.c0, d.c2, d.nu, m_path) {
        println!("M_path = {m_path}");
        println!("delta_bar_path = {}", tp.delta_bar);
        println!("c1_radius_path = {}", tp.c1_radius);
        println!("G_path = {}", theory::g_constant(&tp, l, n.eps_g, d.nu));
        println!(
            "level_set_band_path = {}",
            theory::level_set_bound(&tp, l, n.eps_f, n.eps_g, d.c0, d.nu)
        );
    }
    Ok(())
}

fn cmd_check(problem: &str, points: usize, tol: f64) -> Result<bool> {
    let id: ProblemId = problem.parse()?;
    let obj = id.build()?;
    let mut xs = Vec::new();
    if let Some(x0) = obj.standard_start() {
        xs.push(("start".to_string(), x0.clone()));
    }
    if let Some(xs_) = obj.known_minimizer() {
        xs.push(("solution".to_string(), xs_.clone()));
    }
    for i in 0..points {
        xs.push((format!("random{i}"), box_start(obj.dimension(), 2.0, i as u64)));
    }
    let mut ok = true;
    println!("{:<10} {:>14} {:>14}", "point", "grad_rel_err", "hess_rel_err");
    for (name, x) in &xs {
        let rep = finite_difference_check(&obj, x, 1e-5)?;
        let pass = rep.grad_rel_err <= tol && rep.hess_rel_err <= tol;
        ok &= pass;
        println!(
            "{name:<10} {:>14.3e} {:>14.3e}{}",
            rep.grad_rel_err,
            rep.hess_rel_err,
            if pass { "" } else { "  FAIL" }
        );
    }
    println!("{}: {}", obj.name(), if ok { "ok" } else { "derivative mismatch" });
    Ok(ok)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, overrides } => cmd_run(ExperimentConfig::load(&config)?, &overrides).map(|_| true),
        Command::Preset { name, overrides } => {
            let cfg = preset(&name)?;
            if cfg.rtable.is_some() {
                cmd_rtable(cfg, &overrides)
            } else {
                cmd_run(cfg, &overrides)
            }
            .map(|_| true)
        }
        Command::Rtable { config, overrides } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if cfg.rtable.is_none() {
                cfg.rtable = Some(RTableSection::default());
            }
            cmd_rtable(cfg, &overrides).map(|_| true)
        }
        Command::Constants { config } => cmd_constants(&ExperimentConfig::load(&config)?).map(|_| true),
        Command::Check { problem, points, tol } => cmd_check(&problem, points, tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", json!({"error": "check_failed", "message": "finite-difference check failed"}));
            ExitCode::FAILURE
        }
        Err(e) => {
            let mut line = json!({"error": e.kind(), "message": e.to_string()});
            if let Error::Config { path, .. } = &e {
                line["path"] = json!(path);
            }
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
