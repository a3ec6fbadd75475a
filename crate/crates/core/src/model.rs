//! Local quadratic model `m(p) = f̃ + g̃ᵀp + ½ pᵀB̃p`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, POWER_ITER_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    f_noisy: f64,
    g_noisy: DVector<f64>,
    b: DMatrix<f64>,
}

impl QuadraticModel {
    /// Builds a model; `b` must be square, symmetric and finite.
    pub fn new(f_noisy: f64, g_noisy: DVector<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = g_noisy.len();
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.nrows().max(b.ncols()),
            });
        }
        if !f_noisy.is_finite() || !linalg::all_finite(&g_noisy) || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation("model has non-finite entries".into()));
        }
        if linalg::asymmetry(&b) != 0.0 {
            return Err(Error::InvalidParameters("model Hessian is not symmetric".into()));
        }
        Ok(Self { f_noisy, g_noisy, b })
    }

    pub fn dimension(&self) -> usize {
        self.g_noisy.len()
    }

    pub fn f_noisy(&self) -> f64 {
        self.f_noisy
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.g_noisy
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.b
    }

    fn check_dim(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// `m(p)`.
    pub fn evaluate(&self, p: &DVector<f64>) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self.f_noisy + self.g_noisy.dot(p) + 0.5 * self.curvature(p))
    }

    /// `m(0) − m(p) = −g̃ᵀp − ½ pᵀB̃p`.
    pub fn predicted_reduction(&self, p: &DVector<f64>) -> Result<f64> {
        self.check_dim(p)?;
        Ok(-self.g_noisy.dot(p) - 0.5 * self.curvature(p))
    }

    /// `pᵀB̃p`.
    pub fn curvature(&self, p: &DVector<f64>) -> f64 {
        (&self.b * p).dot(p)
    }

    /// Spectral norm of `B̃` by power iteration.
    pub fn hessian_norm(&self) -> f64 {
        linalg::spectral_norm(&self.b, POWER_ITER_TOL)
    }

    /// Cauchy decrease `½‖g̃‖ min(Δ, ‖g̃‖/‖B̃‖)`, with `‖g̃‖/0 = ∞`.
    pub fn cauchy_decrease_bound(&self, delta: f64) -> f64 {
        cauchy_decrease_bound(self.g_noisy.norm(), self.hessian_norm(), delta)
    }
}

/// `½‖g‖ min(Δ, ‖g‖/‖B‖)` given the norms directly.
pub fn cauchy_decrease_bound(g_norm: f64, b_norm: f64, delta: f64) -> f64 {
    let ratio = if b_norm == 0.0 { f64::INFINITY } else { g_norm / b_norm };
    0.5 * g_norm * delta.min(ratio)
}
