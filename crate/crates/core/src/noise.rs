//! Seeded, bounded noise for function, gradient and Hessian evaluations.
//!
//! Draws are keyed by `(seed, counter, kind)`: the seed keys a ChaCha8
//! generator, the counter selects the stream and the kind selects a disjoint
//! region of that stream. Nothing depends on the query point, so two
//! algorithm variants that query at the same counters see identical noise.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Shape of the noise distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    /// `δf ~ U(−εf, εf)`, `δg` uniform in the εg-ball, `Λᵢᵢ ~ U(−εB, εB)`.
    #[default]
    Uniform,
    /// `δf ~ ±εf`, `δg` uniform on the εg-sphere, `Λᵢᵢ ~ ±εB`.
    Rademacher,
    None,
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NoiseFamily::Uniform),
            "rademacher" => Ok(NoiseFamily::Rademacher),
            "none" => Ok(NoiseFamily::None),
            other => Err(Error::config("noise.family", format!("unknown family `{other}`"))),
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseFamily::Uniform => "uniform",
            NoiseFamily::Rademacher => "rademacher",
            NoiseFamily::None => "none",
        })
    }
}

/// Which norm of `A` normalizes the Hessian perturbation `AᵀΛA / ‖A‖²`.
///
/// The spectral norm guarantees `‖δB‖₂ ≤ εB`; Frobenius gives a smaller
/// perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HessianNorm {
    #[default]
    Spectral,
    Frobenius,
}

/// Noise bounds, distribution family and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub family: NoiseFamily,
    #[serde(default)]
    pub eps_f: f64,
    #[serde(default)]
    pub eps_g: f64,
    #[serde(default, rename = "eps_B")]
    pub eps_b: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub hessian_norm: HessianNorm,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::none()
    }
}

/// Disjoint draw slots within one counter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    /// Function noise at a trial point.
    Function = 0,
    /// Function noise at the starting point (drawn once per run).
    FunctionStart = 1,
    Gradient = 2,
    Hessian = 3,
}

// Each kind owns 2^40 keystream words of a counter's stream, far more than
// an n = 10⁴ Hessian draw consumes.
const KIND_WORD_OFFSET: u128 = 1 << 40;

impl NoiseSpec {
    /// Validated constructor. `NoiseFamily::None` forces every bound to zero.
    pub fn new(family: NoiseFamily, eps_f: f64, eps_g: f64, eps_b: f64, seed: u64) -> Result<Self> {
        Self {
            family,
            eps_f,
            eps_g,
            eps_b,
            seed,
            hessian_norm: HessianNorm::Spectral,
        }
        .validated()
    }

    pub fn uniform(eps_f: f64, eps_g: f64, eps_b: f64, seed: u64) -> Result<Self> {
        Self::new(NoiseFamily::Uniform, eps_f, eps_g, eps_b, seed)
    }

    pub fn rademacher(eps_f: f64, eps_g: f64, eps_b: f64, seed: u64) -> Result<Self> {
        Self::new(NoiseFamily::Rademacher, eps_f, eps_g, eps_b, seed)
    }

    pub fn none() -> Self {
        Self {
            family: NoiseFamily::None,
            eps_f: 0.0,
            eps_g: 0.0,
            eps_b: 0.0,
            seed: 0,
            hessian_norm: HessianNorm::Spectral,
        }
    }

    /// Checks bounds and normalizes the `None` family.
    pub fn validated(mut self) -> Result<Self> {
        for (name, v) in [("eps_f", self.eps_f), ("eps_g", self.eps_g), ("eps_B", self.eps_b)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    format!("noise.{name}"),
                    format!("must be finite and nonnegative, got {v}"),
                ));
            }
        }
        if self.family == NoiseFamily::None {
            self.eps_f = 0.0;
            self.eps_g = 0.0;
            self.eps_b = 0.0;
        }
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_hessian_norm(mut self, norm: HessianNorm) -> Self {
        self.hessian_norm = norm;
        self
    }

    pub fn is_noiseless(&self) -> bool {
        self.family == NoiseFamily::None
            || (self.eps_f == 0.0 && self.eps_g == 0.0 && self.eps_b == 0.0)
    }

    /// A stream starting at counter 0.
    pub fn stream(&self) -> NoiseStream {
        NoiseStream {
            spec: *self,
            counter: 0,
        }
    }

    fn rng(&self, counter: u64, kind: QueryKind) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(counter);
        rng.set_word_pos(kind as u128 * KIND_WORD_OFFSET);
        rng
    }

    /// Function noise for the given counter and slot.
    pub fn function_noise(&self, counter: u64, kind: QueryKind) -> f64 {
        if self.family == NoiseFamily::None || self.eps_f == 0.0 {
            return 0.0;
        }
        let mut rng = self.rng(counter, kind);
        match self.family {
            NoiseFamily::Uniform => rng.gen_range(-self.eps_f..=self.eps_f),
            NoiseFamily::Rademacher => {
                if rng.gen::<bool>() {
                    self.eps_f
                } else {
                    -self.eps_f
                }
            }
            NoiseFamily::None => unreachable!(),
        }
    }

    /// Gradient noise of dimension `n` for the given counter.
    pub fn gradient_noise(&self, counter: u64, n: usize) -> DVector<f64> {
        if self.family == NoiseFamily::None || self.eps_g == 0.0 || n == 0 {
            return DVector::zeros(n);
        }
        let mut rng = self.rng(counter, QueryKind::Gradient);
        let dir = loop {
            let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = v.norm();
            if norm > 0.0 {
                break v / norm;
            }
        };
        let radius = match self.family {
            NoiseFamily::Uniform => self.eps_g * rng.gen::<f64>().powf(1.0 / n as f64),
            NoiseFamily::Rademacher => self.eps_g,
            NoiseFamily::None => unreachable!(),
        };
        let mut v = dir * radius;
        // Rounding can put a boundary draw one ulp outside the ball.
        while v.norm() > self.eps_g {
            v *= 1.0 - f64::EPSILON;
        }
        v
    }

    /// Symmetric Hessian perturbation `AᵀΛA / ‖A‖²` for the given counter.
    pub fn hessian_noise(&self, counter: u64, n: usize) -> DMatrix<f64> {
        if self.family == NoiseFamily::None || self.eps_b == 0.0 || n == 0 {
            return DMatrix::zeros(n, n);
        }
        let mut rng = self.rng(counter, QueryKind::Hessian);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>());
        let lambda: Vec<f64> = (0..n)
            .map(|_| match self.family {
                NoiseFamily::Uniform => rng.gen_range(-self.eps_b..=self.eps_b),
                NoiseFamily::Rademacher => {
                    if rng.gen::<bool>() {
                        self.eps_b
                    } else {
                        -self.eps_b
                    }
                }
                NoiseFamily::None => unreachable!(),
            })
            .collect();
        let norm_sq = match self.hessian_norm {
            // Power iteration approaches ‖A‖² from below; the margin keeps
            // ‖δB‖₂ ≤ εB despite the residual error.
            HessianNorm::Spectral => linalg::squared_spectral_norm_general(&a, 1e-13) * (1.0 + 1e-11),
            HessianNorm::Frobenius => a.norm_squared(),
        };
        if norm_sq == 0.0 {
            return DMatrix::zeros(n, n);
        }
        // ΛA scales row i of A by λᵢ.
        let mut la = a.clone();
        for (i, l) in lambda.iter().enumerate() {
            la.row_mut(i).scale_mut(*l / norm_sq);
        }
        let mut out = a.tr_mul(&la);
        symmetrize(&mut out);
        out
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// A cursor over a [`NoiseSpec`]. Each draw uses the current counter and then
/// advances it, so replaying from the same counter reproduces the sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStream {
    spec: NoiseSpec,
    counter: u64,
}

impl NoiseStream {
    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// The same stream repositioned at `counter`.
    pub fn at(mut self, counter: u64) -> Self {
        self.counter = counter;
        self
    }

    pub fn draw_function_noise(&mut self) -> f64 {
        let v = self.spec.function_noise(self.counter, QueryKind::Function);
        self.counter += 1;
        v
    }

    pub fn draw_gradient_noise(&mut self, n: usize) -> DVector<f64> {
        let v = self.spec.gradient_noise(self.counter, n);
        self.counter += 1;
        v
    }

    pub fn draw_hessian_noise(&mut self, n: usize) -> DMatrix<f64> {
        let v = self.spec.hessian_noise(self.counter, n);
        self.counter += 1;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_bounds_give_zero() {
        let mut s = NoiseSpec::uniform(0.0, 0.0, 0.0, 3).unwrap().stream();
        assert_eq!(s.draw_function_noise(), 0.0);
        assert_eq!(s.draw_gradient_noise(4), DVector::zeros(4));
        assert_eq!(s.draw_hessian_noise(3), DMatrix::zeros(3, 3));
    }

    #[test]
    fn none_family_forces_zero_bounds() {
        let s = NoiseSpec::new(NoiseFamily::None, 1.0, 2.0, 3.0, 9).unwrap();
        assert_eq!((s.eps_f, s.eps_g, s.eps_b), (0.0, 0.0, 0.0));
        assert!(s.is_noiseless());
    }

    #[test]
    fn negative_bound_rejected() {
        assert!(NoiseSpec::uniform(-1.0, 0.0, 0.0, 0).is_err());
        assert!(NoiseSpec::uniform(0.0, f64::NAN, 0.0, 0).is_err());
    }

    #[test]
    fn rademacher_values_and_mean() {
        let mut s = NoiseSpec::rademacher(0.1, 0.0, 0.0, 11).unwrap().stream();
        let draws: Vec<f64> = (0..10_000).map(|_| s.draw_function_noise()).collect();
        assert!(draws.iter().all(|d| *d == 0.1 || *d == -0.1));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn uniform_function_noise() {
        let mut s = NoiseSpec::uniform(10.0, 0.0, 0.0, 5).unwrap().stream();
        let draws: Vec<f64> = (0..10_000).map(|_| s.draw_function_noise()).collect();
        assert!(draws.iter().all(|d| d.abs() <= 10.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.3, "mean {mean}");
    }

    #[test]
    fn sphere_has_exact_radius() {
        let mut s = NoiseSpec::rademacher(0.0, 5.0, 0.0, 1).unwrap().stream();
        for n in [1, 2, 7, 200] {
            let v = s.draw_gradient_noise(n);
            assert!((v.norm() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_hessian_noise_is_lambda() {
        let spec = NoiseSpec::uniform(0.0, 0.0, 3.0, 42).unwrap();
        let d = spec.hessian_noise(7, 1);
        // Reproduce the draws: A = (a), Λ = (λ), so δB = a·λ·a / a² = λ up to
        // the normalizer's safety margin.
        let mut rng = spec.rng(7, QueryKind::Hessian);
        let _a: f64 = rng.gen();
        let lambda: f64 = rng.gen_range(-3.0..=3.0);
        assert!((d[(0, 0)] - lambda).abs() <= 2e-11 * lambda.abs().max(1.0));
    }

    #[test]
    fn streams_replay_bitwise() {
        let spec = NoiseSpec::uniform(1.0, 2.0, 3.0, 77).unwrap();
        let mut a = spec.stream();
        let mut b = spec.stream();
        for _ in 0..20 {
            assert_eq!(a.draw_function_noise().to_bits(), b.draw_function_noise().to_bits());
            assert_eq!(a.draw_gradient_noise(5), b.draw_gradient_noise(5));
            assert_eq!(a.draw_hessian_noise(4), b.draw_hessian_noise(4));
        }
        let mut c = spec.stream().at(3);
        let mut d = spec.stream();
        for _ in 0..3 {
            d.draw_function_noise();
        }
        assert_eq!(c.draw_function_noise(), d.draw_function_noise());
    }

    #[test]
    fn kinds_are_independent_slots() {
        let spec = NoiseSpec::uniform(1.0, 1.0, 1.0, 1).unwrap();
        assert_ne!(
            spec.function_noise(4, QueryKind::Function),
            spec.function_noise(4, QueryKind::FunctionStart)
        );
    }
}
