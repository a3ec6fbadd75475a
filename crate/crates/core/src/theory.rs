//! Constants of the convergence analysis, evaluated numerically so bounds can
//! be compared against traces.
//!
//! With `r = 2/(1−c2)`:
//!
//! ```text
//! β  = √((r εg)² + 8 ν r² (1/c0 − 1) M εf)
//! η  = (β − r εg) / 2,   μ = εg / 2,   γ = η + μ
//! Δ̄  = γ / (r M)
//! C1 = (r + 1) εg + β / 2
//! G  = [(r+1) εg + γ + ν² L γ / ((ν−1) r M)] · ν² γ / ((ν−1) r M)
//! ```

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::Objective;

/// Relative tolerance used by [`estimate_m`].
pub const ESTIMATE_M_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub eps_f: f64,
    pub eps_g: f64,
    pub c0: f64,
    pub c2: f64,
    pub nu: f64,
    /// Gradient Lipschitz estimate, when the constants were built from one.
    pub l: Option<f64>,
    /// Bound on `‖B̃ₖ‖`, when the constants were built from one.
    pub l_b: Option<f64>,
    pub m: f64,
    pub r: f64,
    pub mu: f64,
    pub eta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_bar: f64,
    pub c1_radius: f64,
}

/// `r = 2 / (1 − c2)`.
pub fn r_of(c2: f64) -> f64 {
    2.0 / (1.0 - c2)
}

/// Evaluates every constant from the noise bounds, algorithm parameters and
/// the curvature constant `M`.
pub fn compute_constants(eps_f: f64, eps_g: f64, c0: f64, c2: f64, nu: f64, m: f64) -> Result<TheoryConstants> {
    if !(0.0 < c0 && c0 <= c2 && c2 < 1.0) {
        return Err(Error::InvalidParameters(format!("need 0 < c0 <= c2 < 1, got c0={c0}, c2={c2}")));
    }
    if !(nu > 1.0) {
        return Err(Error::InvalidParameters(format!("need nu > 1, got {nu}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameters(format!("need M > 0, got {m}")));
    }
    if !(eps_f >= 0.0 && eps_g >= 0.0 && eps_f.is_finite() && eps_g.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "noise bounds must be nonnegative, got eps_f={eps_f}, eps_g={eps_g}"
        )));
    }
    let r = r_of(c2);
    let reg = r * eps_g;
    let beta = (reg * reg + 8.0 * nu * r * r * (1.0 / c0 - 1.0) * m * eps_f).sqrt();
    let eta = 0.5 * (beta - reg);
    let mu = 0.5 * eps_g;
    let gamma = eta + mu;
    Ok(TheoryConstants {
        eps_f,
        eps_g,
        c0,
        c2,
        nu,
        l: None,
        l_b: None,
        m,
        r,
        mu,
        eta,
        beta,
        gamma,
        delta_bar: gamma / (r * m),
        c1_radius: (r + 1.0) * eps_g + 0.5 * beta,
    })
}

/// As [`compute_constants`] with `M = (L_B + L) / 2`.
pub fn compute_constants_from_bounds(
    eps_f: f64,
    eps_g: f64,
    c0: f64,
    c2: f64,
    nu: f64,
    l: f64,
    l_b: f64,
) -> Result<TheoryConstants> {
    let mut tc = compute_constants(eps_f, eps_g, c0, c2, nu, curvature_constant(l_b, l))?;
    tc.l = Some(l);
    tc.l_b = Some(l_b);
    Ok(tc)
}

/// `M = ½ (L_B + L)`.
pub fn curvature_constant(l_b: f64, l: f64) -> f64 {
    0.5 * (l_b + l)
}

/// Gradient-norm radius of the critical region, `(r+1) εg + β/2`.
pub fn critical_region_radius(tc: &TheoryConstants, eps_g: f64) -> f64 {
    (tc.r + 1.0) * eps_g + 0.5 * tc.beta
}

/// The constant `G` of the level-set band.
pub fn g_constant(tc: &TheoryConstants, l: f64, eps_g: f64, nu: f64) -> f64 {
    let r = tc.r;
    let m = tc.m;
    let gamma = tc.gamma;
    let scale = nu * nu * gamma / ((nu - 1.0) * r * m);
    ((r + 1.0) * eps_g + gamma + l * scale) * scale
}

/// Full band width `2 εf + max(G, r (1 − c0) εf)` above `sup f` on the
/// critical region.
pub fn level_set_bound(tc: &TheoryConstants, l: f64, eps_f: f64, eps_g: f64, c0: f64, nu: f64) -> f64 {
    let g = g_constant(tc, l, eps_g, nu);
    2.0 * eps_f + g.max(tc.r * (1.0 - c0) * eps_f)
}

/// Largest increase of the noisy function an accepted step can produce,
/// `r (1 − c0) εf`.
pub fn accepted_increase_bound(r: f64, c0: f64, eps_f: f64) -> f64 {
    r * (1.0 - c0) * eps_f
}

/// Whether the radius-increase guarantee applies: `‖g̃‖ > r εg + γ` and
/// `Δ ≤ Δ̄`.
pub fn radius_increase_hypothesis(tc: &TheoryConstants, grad_norm_noisy: f64, delta: f64) -> bool {
    grad_norm_noisy > tc.r * tc.eps_g + tc.gamma && delta <= tc.delta_bar
}

/// `‖∇²f(x*)‖₂`, the curvature constant approximated at the solution.
pub fn estimate_m(obj: &Objective) -> Result<f64> {
    let xstar = obj
        .known_minimizer()
        .ok_or_else(|| Error::UnsupportedProblem(format!("{} has no known minimizer", obj.name())))?;
    Ok(linalg::spectral_norm(&obj.hessian(xstar), ESTIMATE_M_TOL))
}

/// Largest spectral Hessian norm over the given points.
pub fn estimate_lipschitz<'a, I>(obj: &Objective, points: I) -> f64
where
    I: IntoIterator<Item = &'a DVector<f64>>,
{
    points
        .into_iter()
        .map(|x| linalg::spectral_norm(&obj.hessian(x), ESTIMATE_M_TOL))
        .fold(0.0, f64::max)
}

/// `L_B = ‖∇²f(x*)‖₂ + εB` for noisy true Hessians.
pub fn noisy_hessian_bound(obj: &Objective, eps_b: f64) -> Result<f64> {
    Ok(estimate_m(obj)? + eps_b)
}

/// Number of seeds the R diagnostic aggregates over.
pub const R_DIAGNOSTIC_SEEDS: usize = 10;

/// `log10(C / Σ minima)` over exactly ten per-seed minima.
pub fn r_diagnostic(c_bound: f64, min_grad_norms: &[f64]) -> Result<f64> {
    if min_grad_norms.len() != R_DIAGNOSTIC_SEEDS {
        return Err(Error::UndefinedDiagnostic(format!(
            "need exactly {R_DIAGNOSTIC_SEEDS} per-seed minima, got {}",
            min_grad_norms.len()
        )));
    }
    if !(c_bound > 0.0 && c_bound.is_finite()) {
        return Err(Error::UndefinedDiagnostic(format!("bound must be positive, got {c_bound}")));
    }
    if min_grad_norms.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::UndefinedDiagnostic("every per-seed minimum must be positive".into()));
    }
    let sum: f64 = min_grad_norms.iter().sum();
    Ok((c_bound / sum).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    #[test]
    fn noiseless_collapse() {
        let tc = compute_constants(0.0, 0.0, 0.1, 0.5, 2.0, 3.0).unwrap();
        assert_eq!((tc.beta, tc.eta, tc.gamma, tc.c1_radius), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(level_set_bound(&tc, 1.0, 0.0, 0.0, 0.1, 2.0), 0.0);
    }

    #[test]
    fn r_at_half() {
        assert_eq!(r_of(0.5), 4.0);
    }

    #[test]
    fn beta_spot_value() {
        // Frozen from an independent 30-digit evaluation.
        let tc = compute_constants(0.1, 0.0, 0.1, 0.5, 2.0, 1.0).unwrap();
        assert!((tc.beta - 15.178_932_768_808_22).abs() < 1e-12);
        assert!((tc.eta - 7.589_466_384_404_11).abs() < 1e-12);
    }

    #[test]
    fn golden_level_set_values() {
        // (εf, εg, c0, c2, ν, M, L) = (0.1, 0.01, 0.1, 0.5, 2, 1, 1),
        // frozen from an independent 30-digit evaluation.
        let tc = compute_constants(0.1, 0.01, 0.1, 0.5, 2.0, 1.0).unwrap();
        assert!((tc.beta - 15.178_985_473_344_39).abs() < 1e-12);
        assert!((tc.gamma - 7.574_492_736_672_195).abs() < 1e-12);
        assert!((tc.delta_bar - 1.893_623_184_168_049).abs() < 1e-12);
        assert!((tc.c1_radius - 7.639_492_736_672_195).abs() < 1e-12);
        let g = g_constant(&tc, 1.0, 0.01, 2.0);
        assert!((g - 115.124_605_072_633_28).abs() < 1e-9);
        let band = level_set_bound(&tc, 1.0, 0.1, 0.01, 0.1, 2.0);
        assert!((band - 115.324_605_072_633_28).abs() < 1e-9);
    }

    #[test]
    fn g_positive_with_function_noise() {
        let tc = compute_constants(1e-6, 0.0, 0.1, 0.5, 2.0, 1.0).unwrap();
        assert!(g_constant(&tc, 1.0, 0.0, 2.0) > 0.0);
    }

    #[test]
    fn parameter_ordering_enforced() {
        assert!(compute_constants(0.1, 0.1, 0.6, 0.5, 2.0, 1.0).is_err());
        assert!(compute_constants(0.1, 0.1, 0.1, 0.5, 1.0, 1.0).is_err());
        assert!(compute_constants(0.1, 0.1, 0.1, 0.5, 2.0, 0.0).is_err());
        assert!(compute_constants(-0.1, 0.1, 0.1, 0.5, 2.0, 1.0).is_err());
    }

    #[test]
    fn critical_radius_scaling() {
        let a = compute_constants(0.01, 0.0, 0.1, 0.5, 2.0, 2.0).unwrap();
        let b = compute_constants(1.0, 0.0, 0.1, 0.5, 2.0, 2.0).unwrap();
        let ra = critical_region_radius(&a, 0.0);
        let rb = critical_region_radius(&b, 0.0);
        assert!((rb / ra - 10.0).abs() < 1e-12);

        // εf = 0: β = r εg, radius = (r+1) εg + r εg / 2 = 7 εg at r = 4.
        for eg in [0.01, 1.0, 30.0] {
            let tc = compute_constants(0.0, eg, 0.1, 0.5, 2.0, 2.0).unwrap();
            assert!((critical_region_radius(&tc, eg) - 7.0 * eg).abs() < 1e-12 * eg);
        }
    }

    #[test]
    fn estimate_m_values() {
        let m = estimate_m(&problems::quadratic_problem()).unwrap();
        assert!((m - 2.0 * 10f64.powf(-3.25)).abs() < 1e-8 * m);
        let id = problems::Objective::diagonal_quadratic("half", DVector::from_element(5, 0.5)).unwrap();
        assert!((estimate_m(&id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r_diagnostic_examples() {
        assert!(r_diagnostic(5.0, &[0.5; 10]).unwrap().abs() < 1e-15);
        assert!((r_diagnostic(100.0, &[1.0; 10]).unwrap() - 1.0).abs() < 1e-15);
        let a = r_diagnostic(7.0, &[0.3; 10]).unwrap();
        let b = r_diagnostic(7.0, &[0.6; 10]).unwrap();
        assert!((a - b - 2f64.log10()).abs() < 1e-12);
        let mut minima = [1.0; 10];
        minima[3] = 0.0;
        assert!(matches!(r_diagnostic(1.0, &minima), Err(Error::UndefinedDiagnostic(_))));
        assert!(r_diagnostic(1.0, &[1.0; 9]).is_err());
    }
}
