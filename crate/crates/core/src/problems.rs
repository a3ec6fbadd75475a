//! Smooth test objectives with exact derivatives and known minimizers.
//!
//! Every objective is deterministic; noise is layered on top by
//! [`crate::noise`]. Hessians are returned dense.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default size of the tridiagonal problem.
pub const TRIDIAGONAL_DEFAULT_N: usize = 200;

/// Ids of the supported problems from the Schittkowski (1987) collection.
pub const SCHITTKOWSKI_IDS: [u32; 3] = [271, 289, 293];

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `f = xᵀ D x` with `D = diag(d)`.
    DiagonalQuadratic(DVector<f64>),
    /// `½(x₁ − 1)² + ½ Σ (xᵢ − 2xᵢ₊₁)⁴`.
    Tridiagonal,
    /// `Σ_{i=1}^{6} (16 − i)(xᵢ − 1)²`.
    S271,
    /// `1 − exp(−Σ xᵢ² / 60)`, n = 30.
    S289,
    /// `(Σ i·xᵢ²)²`, n = 50.
    S293,
}

/// A smooth objective `f: Rⁿ → R` with analytic gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    name: String,
    dimension: usize,
    known_minimizer: Option<DVector<f64>>,
    known_min_value: Option<f64>,
    standard_start: Option<DVector<f64>>,
    kind: Kind,
}

impl Objective {
    /// `f = xᵀ D x` for a nonnegative diagonal `D`; minimizer at the origin.
    pub fn diagonal_quadratic(name: impl Into<String>, diag: DVector<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidDimension("quadratic needs n >= 1".into()));
        }
        if diag.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidParameters(
                "quadratic diagonal must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            dimension: n,
            known_minimizer: Some(DVector::zeros(n)),
            known_min_value: Some(0.0),
            standard_start: None,
            kind: Kind::DiagonalQuadratic(diag),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn known_minimizer(&self) -> Option<&DVector<f64>> {
        self.known_minimizer.as_ref()
    }

    pub fn known_min_value(&self) -> Option<f64> {
        self.known_min_value
    }

    /// Starting point published with the problem, if any.
    pub fn standard_start(&self) -> Option<&DVector<f64>> {
        self.standard_start.as_ref()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        match &self.kind {
            Kind::DiagonalQuadratic(d) => x.iter().zip(d.iter()).map(|(xi, di)| di * xi * xi).sum(),
            Kind::Tridiagonal => {
                let head = 0.5 * (x[0] - 1.0).powi(2);
                let tail: f64 = (0..self.dimension - 1)
                    .map(|i| (x[i] - 2.0 * x[i + 1]).powi(4))
                    .sum();
                head + 0.5 * tail
            }
            Kind::S271 => (0..6).map(|i| (15 - i) as f64 * (x[i] - 1.0).powi(2)).sum(),
            Kind::S289 => 1.0 - (-x.norm_squared() / 60.0).exp(),
            Kind::S293 => s293_inner(x).powi(2),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.dimension);
        let n = self.dimension;
        match &self.kind {
            Kind::DiagonalQuadratic(d) => x.component_mul(d) * 2.0,
            Kind::Tridiagonal => {
                let mut g = DVector::zeros(n);
                g[0] = x[0] - 1.0;
                for i in 0..n - 1 {
                    let t3 = (x[i] - 2.0 * x[i + 1]).powi(3);
                    g[i] += 2.0 * t3;
                    g[i + 1] -= 4.0 * t3;
                }
                g
            }
            Kind::S271 => DVector::from_fn(6, |i, _| 2.0 * (15 - i) as f64 * (x[i] - 1.0)),
            Kind::S289 => {
                let e = (-x.norm_squared() / 60.0).exp();
                x * (e / 30.0)
            }
            Kind::S293 => {
                let s = s293_inner(x);
                DVector::from_fn(n, |i, _| 4.0 * s * (i + 1) as f64 * x[i])
            }
        }
    }

    /// Dense symmetric Hessian.
    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        debug_assert_eq!(x.len(), self.dimension);
        let n = self.dimension;
        match &self.kind {
            Kind::DiagonalQuadratic(d) => DMatrix::from_diagonal(&(d * 2.0)),
            Kind::Tridiagonal => {
                let mut h = DMatrix::zeros(n, n);
                h[(0, 0)] = 1.0;
                for i in 0..n - 1 {
                    let w = 6.0 * (x[i] - 2.0 * x[i + 1]).powi(2);
                    h[(i, i)] += w;
                    h[(i, i + 1)] -= 2.0 * w;
                    h[(i + 1, i)] -= 2.0 * w;
                    h[(i + 1, i + 1)] += 4.0 * w;
                }
                h
            }
            Kind::S271 => {
                DMatrix::from_diagonal(&DVector::from_fn(6, |i, _| 2.0 * (15 - i) as f64))
            }
            Kind::S289 => {
                let e = (-x.norm_squared() / 60.0).exp();
                let mut h = DMatrix::identity(n, n) * (e / 30.0);
                h.ger(-e / 900.0, x, x, 1.0);
                h
            }
            Kind::S293 => {
                let s = s293_inner(x);
                // ∂²/∂xᵢ∂xⱼ (Σ k xₖ²)² = 8 i j xᵢ xⱼ + 4 s i δᵢⱼ
                let w = DVector::from_fn(n, |i, _| (i + 1) as f64 * x[i]);
                let mut h = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| 4.0 * s * (i + 1) as f64));
                h.ger(8.0, &w, &w, 1.0);
                h
            }
        }
    }
}

fn s293_inner(x: &DVector<f64>) -> f64 {
    x.iter().enumerate().map(|(i, xi)| (i + 1) as f64 * xi * xi).sum()
}

/// `f = xᵀDx` in R⁸ with `D = diag(10^-5, 10^-4.75, …, 10^-3.25)`.
pub fn quadratic_problem() -> Objective {
    let diag = DVector::from_fn(8, |i, _| 10f64.powf(-5.0 + 0.25 * i as f64));
    let mut obj = Objective::diagonal_quadratic("quadratic8", diag).expect("valid diagonal");
    let mut x0 = DVector::zeros(8);
    x0[0] = 1000.0;
    obj.standard_start = Some(x0);
    obj
}

/// The tridiagonal quartic. Minimizer `x*ᵢ = 2^{1−i}` with `f(x*) = 0`.
pub fn tridiagonal_problem(n: usize) -> Result<Objective> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "tridiagonal problem needs N >= 2, got {n}"
        )));
    }
    let xstar = DVector::from_fn(n, |i, _| 0.5f64.powi(i as i32));
    Ok(Objective {
        name: format!("tridiag:{n}"),
        dimension: n,
        known_minimizer: Some(xstar),
        known_min_value: Some(0.0),
        standard_start: None,
        kind: Kind::Tridiagonal,
    })
}

/// Problems 271, 289 and 293 of the Schittkowski (1987) collection, with the
/// collection's starting points attached.
pub fn schittkowski_problem(id: u32) -> Result<Objective> {
    let (n, kind, start) = match id {
        271 => (6, Kind::S271, DVector::zeros(6)),
        289 => (
            30,
            Kind::S289,
            DVector::from_fn(30, |i, _| {
                let k = (i + 1) as f64;
                let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
                sign * (1.0 + k / 30.0)
            }),
        ),
        293 => (50, Kind::S293, DVector::from_element(50, 1.0)),
        other => {
            return Err(Error::NotImplemented(format!(
                "Schittkowski problem {other} (supported: 271, 289, 293)"
            )))
        }
    };
    let xstar = if id == 271 {
        DVector::from_element(n, 1.0)
    } else {
        DVector::zeros(n)
    };
    Ok(Objective {
        name: format!("s{id}"),
        dimension: n,
        known_minimizer: Some(xstar),
        known_min_value: Some(0.0),
        standard_start: Some(start),
        kind,
    })
}

/// CLI-addressable problem identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    Quadratic8,
    Tridiagonal(usize),
    Schittkowski(u32),
}

impl ProblemId {
    pub fn build(&self) -> Result<Objective> {
        match *self {
            ProblemId::Quadratic8 => Ok(quadratic_problem()),
            ProblemId::Tridiagonal(n) => tridiagonal_problem(n),
            ProblemId::Schittkowski(id) => schittkowski_problem(id),
        }
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "quadratic8" {
            return Ok(ProblemId::Quadratic8);
        }
        if s == "tridiag" {
            return Ok(ProblemId::Tridiagonal(TRIDIAGONAL_DEFAULT_N));
        }
        if let Some(n) = s.strip_prefix("tridiag:") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::UnsupportedProblem(format!("bad tridiagonal size in `{s}`")))?;
            if n < 2 {
                return Err(Error::InvalidDimension(format!("tridiagonal N must be >= 2, got {n}")));
            }
            return Ok(ProblemId::Tridiagonal(n));
        }
        if let Some(id) = s.strip_prefix('s') {
            if let Ok(id) = id.parse::<u32>() {
                if SCHITTKOWSKI_IDS.contains(&id) {
                    return Ok(ProblemId::Schittkowski(id));
                }
                return Err(Error::NotImplemented(format!("Schittkowski problem {id}")));
            }
        }
        Err(Error::UnsupportedProblem(format!("unknown problem id `{s}`")))
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemId::Quadratic8 => write!(f, "quadratic8"),
            ProblemId::Tridiagonal(n) => write!(f, "tridiag:{n}"),
            ProblemId::Schittkowski(id) => write!(f, "s{id}"),
        }
    }
}

/// Result of comparing analytic derivatives against central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub grad_rel_err: f64,
    pub hess_rel_err: f64,
}

/// Central-difference check of gradient and Hessian at `x` with step `h`.
///
/// Errors are measured as `max|analytic − fd| / max(1, max|analytic|)`.
/// The Hessian is differenced from the analytic gradient.
pub fn finite_difference_check(obj: &Objective, x: &DVector<f64>, h: f64) -> Result<FdReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Evaluation(format!("step size must be positive, got {h}")));
    }
    if x.len() != obj.dimension() {
        return Err(Error::DimensionMismatch {
            expected: obj.dimension(),
            got: x.len(),
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Evaluation("non-finite query point".into()));
    }
    let n = x.len();
    let g = obj.gradient(x);
    let hess = obj.hessian(x);
    let mut fd_g = DVector::zeros(n);
    let mut fd_h = DMatrix::zeros(n, n);
    let mut xp = x.clone();
    for i in 0..n {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = obj.value(&xp);
        let gp = obj.gradient(&xp);
        xp[i] = xi - h;
        let fm = obj.value(&xp);
        let gm = obj.gradient(&xp);
        xp[i] = xi;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Evaluation(format!("non-finite function value near coordinate {i}")));
        }
        fd_g[i] = (fp - fm) / (2.0 * h);
        let col = (gp - gm) / (2.0 * h);
        fd_h.set_column(i, &col);
    }
    Ok(FdReport {
        grad_rel_err: rel_max_err(g.as_slice(), fd_g.as_slice()),
        hess_rel_err: rel_max_err(hess.as_slice(), fd_h.as_slice()),
    })
}

fn rel_max_err(exact: &[f64], approx: &[f64]) -> f64 {
    let scale = exact.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let diff = exact
        .iter()
        .zip(approx)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    diff / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_condition_number() {
        let obj = quadratic_problem();
        let h = obj.hessian(&DVector::zeros(8));
        let d = h.diagonal();
        let cond = d.max() / d.min();
        assert!((cond - 10f64.powf(1.75)).abs() < 1e-9);
        assert!((cond - 56.234_132_519_034_9).abs() < 1e-9);
    }

    #[test]
    fn quadratic_values() {
        let obj = quadratic_problem();
        let zero = DVector::zeros(8);
        assert_eq!(obj.value(&zero), 0.0);
        assert_eq!(obj.gradient(&zero), zero);
        let x0 = obj.standard_start().unwrap().clone();
        assert!((obj.value(&x0) - 10.0).abs() < 1e-12);
        let g = obj.gradient(&x0);
        assert!((g[0] - 0.02).abs() < 1e-15);
        assert!(g.iter().skip(1).all(|v| *v == 0.0));
    }

    #[test]
    fn tridiagonal_values() {
        let obj = tridiagonal_problem(200).unwrap();
        let xstar = obj.known_minimizer().unwrap().clone();
        assert_eq!(obj.value(&xstar), 0.0);
        assert_eq!(obj.gradient(&xstar).amax(), 0.0);

        let zero = DVector::zeros(200);
        assert_eq!(obj.value(&zero), 0.5);
        let g = obj.gradient(&zero);
        assert_eq!(g[0], -1.0);
        assert!(g.iter().skip(1).all(|v| *v == 0.0));

        let ones = DVector::from_element(200, 1.0);
        assert_eq!(obj.value(&ones), 99.5);
    }

    #[test]
    fn tridiagonal_rejects_small_n() {
        assert!(matches!(tridiagonal_problem(1), Err(Error::InvalidDimension(_))));
        assert!(tridiagonal_problem(2).is_ok());
    }

    #[test]
    fn schittkowski_published_values() {
        // f(x0) and f(x*) as listed in the collection.
        let cases = [(271, 75.0), (289, 0.696_313_469_503_560_1), (293, 1_625_625.0)];
        for (id, f0) in cases {
            let obj = schittkowski_problem(id).unwrap();
            let x0 = obj.standard_start().unwrap();
            let v = obj.value(x0);
            assert!((v - f0).abs() <= 1e-6 * f0.abs().max(1.0), "s{id}: f(x0) = {v}");
            let xs = obj.known_minimizer().unwrap();
            assert!((obj.value(xs) - obj.known_min_value().unwrap()).abs() < 1e-6);
            assert!(obj.gradient(xs).norm() <= 1e-8);
        }
    }

    #[test]
    fn schittkowski_unsupported() {
        assert!(matches!(schittkowski_problem(1), Err(Error::NotImplemented(_))));
        assert!(matches!("s100".parse::<ProblemId>(), Err(Error::NotImplemented(_))));
    }

    #[test]
    fn problem_ids_round_trip() {
        for s in ["quadratic8", "tridiag:10", "s271", "s289", "s293"] {
            let id: ProblemId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
        assert_eq!("tridiag".parse::<ProblemId>().unwrap(), ProblemId::Tridiagonal(200));
        assert!("tridiag:1".parse::<ProblemId>().is_err());
        assert!("rosenbrock".parse::<ProblemId>().is_err());
    }

    #[test]
    fn fd_rejects_zero_step() {
        let obj = quadratic_problem();
        let x = DVector::zeros(8);
        assert!(matches!(finite_difference_check(&obj, &x, 0.0), Err(Error::Evaluation(_))));
    }

    #[test]
    fn fd_quadratic_is_exact() {
        let obj = quadratic_problem();
        let x = DVector::from_fn(8, |i, _| (i as f64 - 3.5) * 17.0);
        let r = finite_difference_check(&obj, &x, 1e-5).unwrap();
        assert!(r.grad_rel_err < 1e-8, "{r:?}");
    }
}
