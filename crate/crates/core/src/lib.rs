//! Trust-region optimization under bounded noise.
//!
//! The crate provides the classical trust-region iteration and a
//! noise-tolerant variant whose acceptance ratio is relaxed by `r·εf`, along
//! with test problems, seeded noise, subproblem solvers, the constants of the
//! convergence analysis and an experiment harness.

pub mod driver;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod problems;
pub mod subproblem;
pub mod theory;

pub use driver::{run, IterationRecord, RatioVariant, Trace, TrustRegionConfig};
pub use error::{Error, Result};
pub use model::QuadraticModel;
pub use noise::{NoiseFamily, NoiseSpec, NoiseStream};
pub use problems::{Objective, ProblemId};
pub use subproblem::{Solver, SubproblemSolution};
pub use theory::TheoryConstants;
