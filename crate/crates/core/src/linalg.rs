//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Default relative tolerance for [`spectral_norm`].
pub const POWER_ITER_TOL: f64 = 1e-10;

const POWER_ITER_MAX: usize = 20_000;

/// Spectral norm of a symmetric matrix by power iteration.
///
/// Converges to the largest eigenvalue magnitude. The start vector is a fixed
/// non-uniform vector so results are deterministic.
pub fn spectral_norm(a: &DMatrix<f64>, tol: f64) -> f64 {
    debug_assert!(a.is_square());
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return a[(0, 0)].abs();
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7).sin());
    v /= v.norm();
    let mut w = DVector::zeros(n);
    let mut sigma = 0.0;
    for _ in 0..POWER_ITER_MAX {
        a.mul_to(&v, &mut w);
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        std::mem::swap(&mut v, &mut w);
        v /= next;
        if (next - sigma).abs() <= tol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Largest eigenvalue of `AᵀA` (the squared spectral norm of a general `A`)
/// by power iteration, never forming `AᵀA`.
pub fn squared_spectral_norm_general(a: &DMatrix<f64>, tol: f64) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7).sin());
    v /= v.norm();
    let mut av = DVector::zeros(a.nrows());
    let mut w = DVector::zeros(n);
    let mut lambda = 0.0;
    for _ in 0..POWER_ITER_MAX {
        a.mul_to(&v, &mut av);
        a.tr_mul_to(&av, &mut w);
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        std::mem::swap(&mut v, &mut w);
        v /= next;
        if (next - lambda).abs() <= tol * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// `max_ij |a_ij - a_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}
