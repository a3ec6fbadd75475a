//! Built-in experiment configurations.

use std::path::PathBuf;

use crate::driver::TrustRegionConfig;
use crate::error::{Error, Result};
use crate::harness::config::{
    ExperimentConfig, ExperimentSection, ProblemSection, RTableSection, VariantSelection, X0Policy,
    DEFAULT_BOX_HALF_WIDTH,
};
use crate::noise::{HessianNorm, NoiseFamily, NoiseSpec};

pub const PRESET_NAMES: [&str; 10] = [
    "quad-fail",
    "tridiag-smalldelta",
    "tridiag-big",
    "s271-small",
    "s271-big",
    "s289-small",
    "s289-big",
    "s293-small",
    "s293-big",
    "rtable",
];

/// Also accepted: `rademacher`.
pub const EXTRA_PRESETS: [&str; 1] = ["rademacher"];

pub const SMALL_DELTA0: f64 = 1e-6;

/// Starting box for the small-radius tridiagonal runs. At half-width 50 the
/// starting gradient is so large that even a 1e-6 step predicts a decrease
/// far above the function noise, which hides the effect being shown.
pub const SMALL_DELTA_BOX_HALF_WIDTH: f64 = 5.0;

/// Noise bounds for the Schittkowski presets (exact Hessians).
pub const SCHITTKOWSKI_EPS_F: f64 = 1e-2;
pub const SCHITTKOWSKI_EPS_G: f64 = 1e-2;

fn ten_seeds() -> Vec<u64> {
    (1..=10).collect()
}

fn noise(family: NoiseFamily, eps_f: f64, eps_g: f64, eps_b: f64) -> NoiseSpec {
    NoiseSpec {
        family,
        eps_f,
        eps_g,
        eps_b,
        seed: 0,
        hessian_norm: HessianNorm::Spectral,
    }
}

fn config(name: &str, problem: &str, x0: X0Policy, noise: NoiseSpec, delta0: f64) -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemSection {
            id: problem.to_string(),
            x0: Some(x0),
        },
        noise,
        driver: TrustRegionConfig {
            delta0,
            ..TrustRegionConfig::default()
        },
        experiment: ExperimentSection {
            seeds: ten_seeds(),
            out: PathBuf::from("out").join(name),
            variants: VariantSelection::Both,
            plots: true,
        },
        rtable: None,
    }
}

fn tridiag_noise(family: NoiseFamily) -> NoiseSpec {
    noise(family, 10.0, 100.0, 1000.0)
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let big_box = X0Policy::Box {
        half_width: DEFAULT_BOX_HALF_WIDTH,
    };
    let cfg = match name {
        "quad-fail" => config(
            name,
            "quadratic8",
            X0Policy::Default,
            noise(NoiseFamily::Uniform, 1e-1, 1e-5, 0.0),
            1.0,
        ),
        "tridiag-smalldelta" => config(
            name,
            "tridiag",
            X0Policy::Box {
                half_width: SMALL_DELTA_BOX_HALF_WIDTH,
            },
            tridiag_noise(NoiseFamily::Uniform),
            SMALL_DELTA0,
        ),
        "tridiag-big" => config(name, "tridiag", big_box, tridiag_noise(NoiseFamily::Uniform), 1.0),
        "rademacher" => config(name, "tridiag", big_box, tridiag_noise(NoiseFamily::Rademacher), 1.0),
        "rtable" => {
            let mut cfg = config(name, "tridiag", big_box, tridiag_noise(NoiseFamily::Uniform), 1.0);
            cfg.experiment.variants = VariantSelection::Noisy;
            cfg.experiment.plots = false;
            cfg.rtable = Some(RTableSection::default());
            cfg
        }
        other => {
            let (problem, size) = other
                .split_once('-')
                .ok_or_else(|| unknown(other))?;
            if !matches!(problem, "s271" | "s289" | "s293") {
                return Err(unknown(other));
            }
            let delta0 = match size {
                "small" => SMALL_DELTA0,
                "big" => 1.0,
                _ => return Err(unknown(other)),
            };
            config(
                name,
                problem,
                X0Policy::Default,
                noise(NoiseFamily::Uniform, SCHITTKOWSKI_EPS_F, SCHITTKOWSKI_EPS_G, 0.0),
                delta0,
            )
        }
    };
    Ok(cfg)
}

fn unknown(name: &str) -> Error {
    Error::config(
        "preset",
        format!(
            "unknown preset `{name}`; available: {}, {}",
            PRESET_NAMES.join(", "),
            EXTRA_PRESETS.join(", ")
        ),
    )
}
