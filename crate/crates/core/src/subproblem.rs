//! Approximate solvers for `min m(p) s.t. ‖p‖ ≤ Δ`.
//!
//! Every solver returns a step whose model reduction is at least that of
//! the Cauchy step.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuadraticModel;

/// Default relative residual tolerance for Newton-CG.
pub const DEFAULT_CG_TOL: f64 = 1e-8;

/// Relative slack for declaring a step on the trust-region boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Cauchy,
    Dogleg,
    #[default]
    NewtonCg,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cauchy" => Ok(Solver::Cauchy),
            "dogleg" => Ok(Solver::Dogleg),
            "newton_cg" | "newton-cg" => Ok(Solver::NewtonCg),
            other => Err(Error::config("solver", format!("unknown solver `{other}`"))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Cauchy => "cauchy",
            Solver::Dogleg => "dogleg",
            Solver::NewtonCg => "newton_cg",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub p: DVector<f64>,
    pub predicted_reduction: f64,
    pub boundary_hit: bool,
    /// The solver that actually produced `p`.
    pub solver: Solver,
    /// Set when dogleg fell back to the Cauchy step.
    pub fallback: bool,
    /// Set when `g̃ = 0` and a zero step was returned.
    pub degenerate: bool,
}

impl SubproblemSolution {
    fn finish(m: &QuadraticModel, delta: f64, p: DVector<f64>, solver: Solver) -> Result<Self> {
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::Evaluation(format!("{solver} produced a non-finite step")));
        }
        let predicted_reduction = m.predicted_reduction(&p)?;
        let boundary_hit = delta.is_finite() && p.norm() >= delta * (1.0 - BOUNDARY_TOL);
        Ok(Self {
            p,
            predicted_reduction,
            boundary_hit,
            solver,
            fallback: false,
            degenerate: false,
        })
    }

    fn zero(n: usize, solver: Solver) -> Self {
        Self {
            p: DVector::zeros(n),
            predicted_reduction: 0.0,
            boundary_hit: false,
            solver,
            fallback: false,
            degenerate: true,
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("trust-region radius must be positive, got {delta}")))
    }
}

/// Dispatches to the chosen solver.
pub fn solve(m: &QuadraticModel, delta: f64, solver: Solver, cg_tol: f64) -> Result<SubproblemSolution> {
    match solver {
        Solver::Cauchy => cauchy_step(m, delta),
        Solver::Dogleg => dogleg(m, delta),
        Solver::NewtonCg => newton_cg(m, delta, cg_tol),
    }
}

/// The Cauchy step `−τ (Δ/‖g̃‖) g̃`.
pub fn cauchy_step(m: &QuadraticModel, delta: f64) -> Result<SubproblemSolution> {
    check_delta(delta)?;
    let g = m.gradient();
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return Ok(SubproblemSolution::zero(g.len(), Solver::Cauchy));
    }
    let gbg = m.curvature(g);
    // τΔ, written so that Δ = ∞ with positive curvature stays finite.
    let length = if gbg <= 0.0 {
        delta
    } else {
        (gnorm.powi(3) / gbg).min(delta)
    };
    let p = g * (-length / gnorm);
    SubproblemSolution::finish(m, delta, p, Solver::Cauchy)
}

/// Both roots `τ` of `‖z + τd‖ = Δ` (smaller first), for `‖z‖ ≤ Δ`.
fn boundary_tau(z: &DVector<f64>, d: &DVector<f64>, delta: f64) -> (f64, f64) {
    let a = d.norm_squared();
    let b = 2.0 * z.dot(d);
    let c = z.norm_squared() - delta * delta;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // Numerically stable roots; c ≤ 0 so they have opposite signs (or one is 0).
    let q = -0.5 * (b + b.signum() * disc);
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    (r1.min(r2), r1.max(r2))
}

/// Steihaug–Toint truncated conjugate gradient.
///
/// Stops when the residual falls below `tol·max(1, ‖g̃‖)` (after at least one
/// step), on negative curvature, on leaving the region, or after `n`
/// iterations.
pub fn newton_cg(m: &QuadraticModel, delta: f64, tol: f64) -> Result<SubproblemSolution> {
    check_delta(delta)?;
    let g = m.gradient();
    let b = m.hessian();
    let n = g.len();
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return Ok(SubproblemSolution::zero(n, Solver::NewtonCg));
    }
    let threshold = tol * gnorm.max(1.0);

    let mut z = DVector::zeros(n);
    let mut r = g.clone();
    let mut d = -g;
    let mut bd = DVector::zeros(n);
    let mut rr = r.norm_squared();

    for _ in 0..n.max(1) {
        b.mul_to(&d, &mut bd);
        let dbd = d.dot(&bd);
        if dbd <= 0.0 {
            // Negative curvature: go to whichever boundary point the model prefers.
            if !delta.is_finite() {
                return Err(Error::Evaluation(
                    "negative curvature with an unbounded trust region".into(),
                ));
            }
            let (lo, hi) = boundary_tau(&z, &d, delta);
            let p_hi = &z + &d * hi;
            let p_lo = &z + &d * lo;
            let p = if m.evaluate(&p_lo)? < m.evaluate(&p_hi)? { p_lo } else { p_hi };
            return SubproblemSolution::finish(m, delta, p, Solver::NewtonCg);
        }
        let alpha = rr / dbd;
        let z_next = &z + &d * alpha;
        if z_next.norm() >= delta {
            let (_, hi) = boundary_tau(&z, &d, delta);
            let p = &z + &d * hi;
            return SubproblemSolution::finish(m, delta, p, Solver::NewtonCg);
        }
        z = z_next;
        r.axpy(alpha, &bd, 1.0);
        let rr_next = r.norm_squared();
        if rr_next.sqrt() <= threshold {
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        d *= beta;
        d -= &r;
        if !rr.is_finite() {
            return Err(Error::Evaluation("non-finite residual in Newton-CG".into()));
        }
    }
    SubproblemSolution::finish(m, delta, z, Solver::NewtonCg)
}

/// Dogleg path from the Cauchy point to the Newton point.
///
/// Requires `B̃` positive definite; otherwise returns the Cauchy step with
/// `fallback` set.
pub fn dogleg(m: &QuadraticModel, delta: f64) -> Result<SubproblemSolution> {
    check_delta(delta)?;
    let g = m.gradient();
    let n = g.len();
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return Ok(SubproblemSolution::zero(n, Solver::Dogleg));
    }
    let Some(chol) = m.hessian().clone().cholesky() else {
        let mut sol = cauchy_step(m, delta)?;
        sol.fallback = true;
        return Ok(sol);
    };
    let p_newton = -chol.solve(g);
    if p_newton.norm() <= delta {
        return SubproblemSolution::finish(m, delta, p_newton, Solver::Dogleg);
    }
    let gbg = m.curvature(g);
    let p_u = g * (-g.norm_squared() / gbg);
    let pu_norm = p_u.norm();
    if pu_norm >= delta {
        let p = g * (-delta / gnorm);
        return SubproblemSolution::finish(m, delta, p, Solver::Dogleg);
    }
    let leg = &p_newton - &p_u;
    let (_, s) = boundary_tau(&p_u, &leg, delta);
    let p = &p_u + leg * s.clamp(0.0, 1.0);
    SubproblemSolution::finish(m, delta, p, Solver::Dogleg)
}
