//! The trust-region iteration with the classical or the noise-tolerant
//! acceptance ratio.
//!
//! At iteration `k` the noisy oracle is queried with counter `k`: gradient
//! and Hessian noise at `xₖ`, function noise at the trial point. The noisy
//! value at an accepted trial point becomes `f̃ₖ₊₁`; a rejected step keeps
//! `f̃ₖ`. Function noise at `x₀` comes from its own slot. The true `f` and `g`
//! are recorded for diagnostics and never feed a decision.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuadraticModel;
use crate::noise::{NoiseSpec, QueryKind};
use crate::problems::Objective;
use crate::subproblem::{self, Solver, SubproblemSolution, DEFAULT_CG_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RatioVariant {
    Classical,
    #[default]
    Noisy,
}

impl FromStr for RatioVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(RatioVariant::Classical),
            "noisy" => Ok(RatioVariant::Noisy),
            other => Err(Error::config("variant", format!("unknown ratio variant `{other}`"))),
        }
    }
}

impl fmt::Display for RatioVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatioVariant::Classical => "classical",
            RatioVariant::Noisy => "noisy",
        })
    }
}

/// Algorithm parameters. Defaults are `(c0, c1, c2, ν) = (0.1, 0.25, 0.5, 2)`,
/// `Δ0 = 1`, 200 iterations and Newton-CG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrustRegionConfig {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub nu: f64,
    pub delta0: f64,
    /// `εf` used inside the noisy ratio; `None` means the injected bound.
    pub eps_f_for_ratio: Option<f64>,
    pub ratio_variant: RatioVariant,
    pub max_iters: usize,
    pub solver: Solver,
    pub cg_tol: f64,
    /// Only enlarge Δ on `ρ > c2` when the step reached the boundary.
    pub require_boundary_for_increase: bool,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            c0: 0.1,
            c1: 0.25,
            c2: 0.5,
            nu: 2.0,
            delta0: 1.0,
            eps_f_for_ratio: None,
            ratio_variant: RatioVariant::Noisy,
            max_iters: 200,
            solver: Solver::NewtonCg,
            cg_tol: DEFAULT_CG_TOL,
            require_boundary_for_increase: false,
        }
    }
}

impl TrustRegionConfig {
    /// Enforces `0 < c0 ≤ c1 < c2 < 1`, `ν > 1`, `Δ0 > 0` and friends.
    pub fn validate(&self) -> Result<()> {
        let Self { c0, c1, c2, nu, delta0, .. } = *self;
        if !(0.0 < c0 && c0 <= c1 && c1 < c2 && c2 < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "need 0 < c0 <= c1 < c2 < 1, got c0={c0}, c1={c1}, c2={c2}"
            )));
        }
        if !(nu > 1.0 && nu.is_finite()) {
            return Err(Error::InvalidParameters(format!("need nu > 1, got {nu}")));
        }
        if !(delta0 > 0.0 && delta0.is_finite()) {
            return Err(Error::InvalidParameters(format!("need delta0 > 0, got {delta0}")));
        }
        if let Some(e) = self.eps_f_for_ratio {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::InvalidParameters(format!("need eps_f_for_ratio >= 0, got {e}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameters("max_iters must be positive".into()));
        }
        if !(self.cg_tol > 0.0) {
            return Err(Error::InvalidParameters(format!("need cg_tol > 0, got {}", self.cg_tol)));
        }
        Ok(())
    }

    /// `r = 2 / (1 − c2)`.
    pub fn r(&self) -> f64 {
        2.0 / (1.0 - self.c2)
    }

    /// The `εf` the ratio should use given the injected noise.
    pub fn ratio_eps_f(&self, noise: &NoiseSpec) -> f64 {
        self.eps_f_for_ratio.unwrap_or(noise.eps_f)
    }

    pub fn with_variant(mut self, variant: RatioVariant) -> Self {
        self.ratio_variant = variant;
        self
    }
}

/// Actual-to-predicted reduction ratio.
///
/// The noisy variant adds `r·εf` to numerator and denominator; the classical
/// variant ignores `eps_f`. An exactly zero denominator gives `−∞`.
pub fn acceptance_ratio(
    f_noisy_old: f64,
    f_noisy_new: f64,
    pred_red: f64,
    cfg: &TrustRegionConfig,
    eps_f: f64,
) -> Result<f64> {
    if !(f_noisy_old.is_finite() && f_noisy_new.is_finite() && pred_red.is_finite() && eps_f.is_finite()) {
        return Err(Error::Evaluation(format!(
            "non-finite ratio inputs: f_old={f_noisy_old}, f_new={f_noisy_new}, pred={pred_red}, eps_f={eps_f}"
        )));
    }
    let relax = match cfg.ratio_variant {
        RatioVariant::Classical => 0.0,
        RatioVariant::Noisy => cfg.r() * eps_f,
    };
    let num = f_noisy_old - f_noisy_new + relax;
    let den = pred_red + relax;
    if den == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepUpdate {
    pub new_delta: f64,
    pub accept: bool,
}

/// Radius update and acceptance with strict inequalities:
/// `ρ < c1` shrinks by `ν`, `ρ > c2` grows by `ν`, and `ρ > c0` accepts.
pub fn radius_and_step_update(
    rho: f64,
    delta: f64,
    step: &SubproblemSolution,
    cfg: &TrustRegionConfig,
) -> StepUpdate {
    let new_delta = if rho < cfg.c1 {
        delta / cfg.nu
    } else if rho > cfg.c2 && (!cfg.require_boundary_for_increase || step.boundary_hit) {
        delta * cfg.nu
    } else {
        delta
    };
    StepUpdate {
        new_delta,
        accept: rho > cfg.c0,
    }
}

/// One row of a run trace; all quantities refer to the iterate `xₖ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    #[serde(rename = "iter")]
    pub k: usize,
    pub f_true: f64,
    pub f_noisy: f64,
    #[serde(rename = "gnorm_true")]
    pub grad_norm_true: f64,
    #[serde(rename = "gnorm_noisy")]
    pub grad_norm_noisy: f64,
    pub delta: f64,
    pub rho: f64,
    pub accepted: bool,
    pub step_norm: f64,
    #[serde(rename = "dist")]
    pub dist_to_solution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub problem: String,
    pub config: TrustRegionConfig,
    pub noise: NoiseSpec,
    pub records: Vec<IterationRecord>,
    pub final_x: DVector<f64>,
    pub final_f_noisy: f64,
    pub final_f_true: f64,
    /// Radius after the last iteration.
    pub final_delta: f64,
    /// Set when the run stopped early on a non-finite evaluation.
    pub aborted: Option<String>,
}

impl Trace {
    pub fn is_complete(&self) -> bool {
        self.aborted.is_none() && self.records.len() == self.config.max_iters
    }

    pub fn min_grad_norm_true(&self) -> f64 {
        self.records.iter().map(|r| r.grad_norm_true).fold(f64::INFINITY, f64::min)
    }

    pub fn min_grad_norm_noisy(&self) -> f64 {
        self.records.iter().map(|r| r.grad_norm_noisy).fold(f64::INFINITY, f64::min)
    }
}

/// Everything visible at the end of one iteration, for instrumentation.
pub struct IterationContext<'a> {
    pub record: &'a IterationRecord,
    pub x: &'a DVector<f64>,
    pub model: &'a QuadraticModel,
    pub step: &'a SubproblemSolution,
    pub trial: &'a DVector<f64>,
    pub f_trial_noisy: f64,
    pub new_delta: f64,
}

/// Runs the algorithm for exactly `cfg.max_iters` iterations.
pub fn run(obj: &Objective, noise: &NoiseSpec, cfg: &TrustRegionConfig, x0: &DVector<f64>) -> Result<Trace> {
    run_observed(obj, noise, cfg, x0, |_| {})
}

/// [`run`] with a callback after every iteration.
pub fn run_observed<F>(
    obj: &Objective,
    noise: &NoiseSpec,
    cfg: &TrustRegionConfig,
    x0: &DVector<f64>,
    mut observe: F,
) -> Result<Trace>
where
    F: FnMut(&IterationContext<'_>),
{
    cfg.validate()?;
    let noise = noise.validated()?;
    let n = obj.dimension();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::Evaluation("non-finite starting point".into()));
    }
    let eps_f = cfg.ratio_eps_f(&noise);
    let xstar = obj.known_minimizer();

    let mut trace = Trace {
        problem: obj.name().to_string(),
        config: cfg.clone(),
        noise,
        records: Vec::with_capacity(cfg.max_iters),
        final_x: x0.clone(),
        final_f_noisy: f64::NAN,
        final_f_true: f64::NAN,
        aborted: None,
        final_delta: cfg.delta0,
    };

    let mut x = x0.clone();
    let mut f_true = obj.value(&x);
    let mut f_noisy = f_true + noise.function_noise(0, QueryKind::FunctionStart);
    let mut delta = cfg.delta0;

    for k in 0..cfg.max_iters {
        let counter = k as u64;
        let g_true = obj.gradient(&x);
        let g_noisy = &g_true + noise.gradient_noise(counter, n);
        let mut b = obj.hessian(&x);
        if noise.eps_b > 0.0 {
            b += noise.hessian_noise(counter, n);
        }
        let outcome = iterate(
            obj, &noise, cfg, eps_f, counter, &x, f_noisy, delta, g_noisy.clone(), b,
        );
        let (model, step, trial, f_trial_true, f_trial_noisy, rho) = match outcome {
            Ok(v) => v,
            Err(e) => {
                trace.aborted = Some(format!("iteration {k}: {e}"));
                break;
            }
        };
        let update = radius_and_step_update(rho, delta, &step, cfg);
        let record = IterationRecord {
            k,
            f_true,
            f_noisy,
            grad_norm_true: g_true.norm(),
            grad_norm_noisy: g_noisy.norm(),
            delta,
            rho,
            accepted: update.accept,
            step_norm: step.p.norm(),
            dist_to_solution: xstar.map(|s| (&x - s).norm()),
        };
        trace.records.push(record);
        observe(&IterationContext {
            record: &record,
            x: &x,
            model: &model,
            step: &step,
            trial: &trial,
            f_trial_noisy,
            new_delta: update.new_delta,
        });
        if update.accept {
            x = trial;
            f_true = f_trial_true;
            f_noisy = f_trial_noisy;
        }
        delta = update.new_delta;
    }

    trace.final_x = x;
    trace.final_f_noisy = f_noisy;
    trace.final_f_true = f_true;
    trace.final_delta = delta;
    Ok(trace)
}

type IterationOutcome = (QuadraticModel, SubproblemSolution, DVector<f64>, f64, f64, f64);

#[allow(clippy::too_many_arguments)]
fn iterate(
    obj: &Objective,
    noise: &NoiseSpec,
    cfg: &TrustRegionConfig,
    eps_f: f64,
    counter: u64,
    x: &DVector<f64>,
    f_noisy: f64,
    delta: f64,
    g_noisy: DVector<f64>,
    b: DMatrix<f64>,
) -> Result<IterationOutcome> {
    let model = QuadraticModel::new(f_noisy, g_noisy, b)?;
    let step = subproblem::solve(&model, delta, cfg.solver, cfg.cg_tol)?;
    let trial = x + &step.p;
    let f_trial_true = obj.value(&trial);
    if !f_trial_true.is_finite() || !trial.iter().all(|v| v.is_finite()) {
        return Err(Error::Evaluation("non-finite trial point".into()));
    }
    let f_trial_noisy = f_trial_true + noise.function_noise(counter, QueryKind::Function);
    let rho = acceptance_ratio(f_noisy, f_trial_noisy, step.predicted_reduction, cfg, eps_f)?;
    Ok((model, step, trial, f_trial_true, f_trial_noisy, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseFamily;
    use crate::problems::{quadratic_problem, tridiagonal_problem};

    fn step(boundary_hit: bool) -> SubproblemSolution {
        SubproblemSolution {
            p: DVector::zeros(1),
            predicted_reduction: 0.0,
            boundary_hit,
            solver: Solver::NewtonCg,
            fallback: false,
            degenerate: false,
        }
    }

    #[test]
    fn r_at_half_is_four() {
        let cfg = TrustRegionConfig::default();
        assert_eq!(cfg.r(), 4.0);
    }

    #[test]
    fn ratio_examples() {
        let noisy = TrustRegionConfig::default();
        let classical = noisy.clone().with_variant(RatioVariant::Classical);
        assert_eq!(acceptance_ratio(1.0, 0.0, 1.0, &noisy, 0.1).unwrap(), 1.0);
        assert_eq!(acceptance_ratio(1.0, 0.0, 1.0, &classical, 0.1).unwrap(), 1.0);
        let rho = acceptance_ratio(0.0, 0.2, 0.1, &noisy, 0.1).unwrap();
        assert!((rho - 0.4).abs() < 1e-15);
        assert!(rho > noisy.c0);
        for (a, b, pred) in [(3.0, 1.0, 4.0), (0.5, 0.7, 0.25), (-1.0, -3.0, 1.0)] {
            assert_eq!(
                acceptance_ratio(a, b, pred, &noisy, 0.0).unwrap(),
                acceptance_ratio(a, b, pred, &classical, 0.3).unwrap()
            );
        }
    }

    #[test]
    fn ratio_degenerate_and_invalid() {
        let cfg = TrustRegionConfig::default().with_variant(RatioVariant::Classical);
        assert_eq!(acceptance_ratio(1.0, 1.0, 0.0, &cfg, 0.0).unwrap(), f64::NEG_INFINITY);
        assert!(acceptance_ratio(f64::NAN, 1.0, 1.0, &cfg, 0.0).is_err());
        assert!(acceptance_ratio(1.0, f64::INFINITY, 1.0, &cfg, 0.0).is_err());
    }

    #[test]
    fn update_examples() {
        let cfg = TrustRegionConfig::default();
        let s = step(false);
        let u = |rho| radius_and_step_update(rho, 1.0, &s, &cfg);
        assert_eq!(u(0.2), StepUpdate { new_delta: 0.5, accept: true });
        assert_eq!(u(0.6), StepUpdate { new_delta: 2.0, accept: true });
        assert_eq!(u(0.05), StepUpdate { new_delta: 0.5, accept: false });
        assert_eq!(u(0.3), StepUpdate { new_delta: 1.0, accept: true });
        // Boundaries are strict.
        assert_eq!(u(0.1), StepUpdate { new_delta: 0.5, accept: false });
        assert_eq!(u(0.25), StepUpdate { new_delta: 1.0, accept: true });
        assert_eq!(u(0.5), StepUpdate { new_delta: 1.0, accept: true });
        assert_eq!(u(f64::NEG_INFINITY), StepUpdate { new_delta: 0.5, accept: false });
    }

    #[test]
    fn boundary_requirement_gates_increase() {
        let cfg = TrustRegionConfig {
            require_boundary_for_increase: true,
            ..TrustRegionConfig::default()
        };
        assert_eq!(radius_and_step_update(0.9, 1.0, &step(false), &cfg).new_delta, 1.0);
        assert_eq!(radius_and_step_update(0.9, 1.0, &step(true), &cfg).new_delta, 2.0);
    }

    #[test]
    fn config_validation() {
        assert!(TrustRegionConfig::default().validate().is_ok());
        let bad = [
            TrustRegionConfig { c0: 0.3, ..Default::default() },
            TrustRegionConfig { c2: 1.0, ..Default::default() },
            TrustRegionConfig { nu: 1.0, ..Default::default() },
            TrustRegionConfig { delta0: 0.0, ..Default::default() },
            TrustRegionConfig { max_iters: 0, ..Default::default() },
            TrustRegionConfig { eps_f_for_ratio: Some(-1.0), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn noiseless_quadratic_converges_identically() {
        let obj = quadratic_problem();
        let x0 = obj.standard_start().unwrap().clone();
        let noise = NoiseSpec::none();
        let cfg = TrustRegionConfig::default();
        let a = run(&obj, &noise, &cfg, &x0).unwrap();
        let b = run(&obj, &noise, &cfg.clone().with_variant(RatioVariant::Classical), &x0).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_x, b.final_x);
        assert_eq!(a.records.len(), 200);
        assert!(obj.gradient(&a.final_x).norm() < 1e-8);
    }

    #[test]
    fn accepted_steps_obey_increase_bound() {
        let obj = quadratic_problem();
        let x0 = obj.standard_start().unwrap().clone();
        let cfg = TrustRegionConfig::default();
        for seed in 0..5 {
            let noise = NoiseSpec::uniform(0.1, 1e-5, 0.0, seed).unwrap();
            let t = run(&obj, &noise, &cfg, &x0).unwrap();
            let limit = cfg.r() * (1.0 - cfg.c0) * noise.eps_f;
            for w in t.records.windows(2) {
                if w[0].accepted {
                    assert!(w[0].f_noisy - w[1].f_noisy > -limit);
                } else {
                    assert_eq!(w[0].f_noisy, w[1].f_noisy);
                }
            }
        }
    }

    #[test]
    fn variants_share_noise() {
        let obj = tridiagonal_problem(10).unwrap();
        let x0 = DVector::from_fn(10, |i, _| (i as f64) - 4.5);
        let noise = NoiseSpec::new(NoiseFamily::Uniform, 1.0, 2.0, 3.0, 9).unwrap();
        let cfg = TrustRegionConfig { max_iters: 30, ..Default::default() };
        let mut seen = [Vec::new(), Vec::new()];
        for (slot, variant) in [RatioVariant::Classical, RatioVariant::Noisy].into_iter().enumerate() {
            run_observed(&obj, &noise, &cfg.clone().with_variant(variant), &x0, |ctx| {
                let g_true = obj.gradient(ctx.x);
                seen[slot].push((ctx.model.gradient() - g_true, ctx.f_trial_noisy - obj.value(ctx.trial)));
            })
            .unwrap();
        }
        // The k-th noise draw is the same regardless of the path taken.
        for (k, ((dg0, _), (dg1, _))) in seen[0].iter().zip(&seen[1]).enumerate() {
            let want = noise.gradient_noise(k as u64, 10);
            assert!((dg0 - &want).norm() <= 1e-9 * (1.0 + want.norm()));
            assert!((dg1 - &want).norm() <= 1e-9 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn trace_consistency() {
        let obj = tridiagonal_problem(20).unwrap();
        let x0 = DVector::from_element(20, 3.0);
        let noise = NoiseSpec::uniform(1.0, 1.0, 1.0, 4).unwrap();
        for variant in [RatioVariant::Classical, RatioVariant::Noisy] {
            let cfg = TrustRegionConfig { max_iters: 60, ..Default::default() }.with_variant(variant);
            let t = run(&obj, &noise, &cfg, &x0).unwrap();
            assert!(t.is_complete());
            assert_eq!(t.records.len(), 60);
            for (k, rec) in t.records.iter().enumerate() {
                assert_eq!(rec.k, k);
                assert!(rec.delta > 0.0);
                assert_eq!(rec.accepted, rec.rho > cfg.c0);
                assert!(rec.dist_to_solution.is_some());
            }
        }
    }

    #[test]
    fn rejects_bad_start() {
        let obj = quadratic_problem();
        let cfg = TrustRegionConfig::default();
        assert!(matches!(
            run(&obj, &NoiseSpec::none(), &cfg, &DVector::zeros(3)),
            Err(Error::DimensionMismatch { expected: 8, got: 3 })
        ));
    }
}
