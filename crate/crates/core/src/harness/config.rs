//! Experiment configuration (TOML) and starting-point policies.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::driver::{RatioVariant, TrustRegionConfig};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::problems::{Objective, ProblemId};

/// Half-width of the default starting box.
pub const DEFAULT_BOX_HALF_WIDTH: f64 = 50.0;

// Starting points are drawn from a stream the noise oracle never uses.
const X0_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum X0Policy {
    Explicit { values: Vec<f64> },
    /// Each entry uniform in `[−half_width, half_width]`, keyed by the seed.
    Box {
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    /// The problem's published starting point.
    Default,
}

fn default_half_width() -> f64 {
    DEFAULT_BOX_HALF_WIDTH
}

impl X0Policy {
    pub fn starting_point(&self, obj: &Objective, seed: u64) -> Result<DVector<f64>> {
        let n = obj.dimension();
        match self {
            X0Policy::Explicit { values } => {
                if values.len() != n {
                    return Err(Error::config(
                        "problem.x0.values",
                        format!("expected {n} entries, got {}", values.len()),
                    ));
                }
                Ok(DVector::from_column_slice(values))
            }
            X0Policy::Box { half_width } => Ok(box_start(n, *half_width, seed)),
            X0Policy::Default => obj.standard_start().cloned().ok_or_else(|| {
                Error::config(
                    "problem.x0.policy",
                    format!("{} has no published starting point", obj.name()),
                )
            }),
        }
    }
}

/// Uniform draw from `[−a, a]ⁿ` keyed by `seed`.
pub fn box_start(n: usize, half_width: f64, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(X0_STREAM);
    DVector::from_fn(n, |_, _| rng.gen_range(-half_width..=half_width))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub id: String,
    #[serde(default)]
    pub x0: Option<X0Policy>,
}

/// Which ratio variants an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VariantSelection {
    Classical,
    Noisy,
    #[default]
    Both,
}

impl VariantSelection {
    pub fn variants(self) -> &'static [RatioVariant] {
        match self {
            VariantSelection::Classical => &[RatioVariant::Classical],
            VariantSelection::Noisy => &[RatioVariant::Noisy],
            VariantSelection::Both => &[RatioVariant::Classical, RatioVariant::Noisy],
        }
    }
}

impl std::str::FromStr for VariantSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(VariantSelection::Classical),
            "noisy" => Ok(VariantSelection::Noisy),
            "both" => Ok(VariantSelection::Both),
            other => Err(Error::config("experiment.variants", format!("unknown selection `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub variants: VariantSelection,
    #[serde(default = "default_true")]
    pub plots: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seeds: default_seeds(),
            out: default_out(),
            variants: VariantSelection::Both,
            plots: true,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

/// The noise-level grid of an R table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RTableSection {
    #[serde(default = "decade_grid")]
    pub eps_f: Vec<f64>,
    #[serde(default = "decade_grid")]
    pub eps_g: Vec<f64>,
}

impl Default for RTableSection {
    fn default() -> Self {
        Self {
            eps_f: decade_grid(),
            eps_g: decade_grid(),
        }
    }
}

/// `10⁻², 10⁻¹, …, 10²`.
pub fn decade_grid() -> Vec<f64> {
    vec![1e-2, 1e-1, 1.0, 1e1, 1e2]
}

/// A complete experiment: one problem, one noise model, the algorithm
/// parameters shared by both variants, and a seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// `ratio_variant` here is ignored; variants come from `experiment.variants`.
    #[serde(default)]
    pub driver: TrustRegionConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub rtable: Option<RTableSection>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::config("<toml>", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn problem_id(&self) -> Result<ProblemId> {
        self.problem
            .id
            .parse()
            .map_err(|e: Error| Error::config("problem.id", e.to_string()))
    }

    pub fn objective(&self) -> Result<Objective> {
        self.problem_id()?.build()
    }

    /// Starting-point policy with the default resolved.
    pub fn x0_policy(&self, obj: &Objective) -> X0Policy {
        match &self.problem.x0 {
            Some(p) => p.clone(),
            None if obj.standard_start().is_some() => X0Policy::Default,
            None => X0Policy::Box {
                half_width: DEFAULT_BOX_HALF_WIDTH,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let obj = self.objective()?;
        self.noise
            .validated()
            .map_err(|e| Error::config("noise", e.to_string()))?;
        self.driver
            .validate()
            .map_err(|e| Error::config("driver", e.to_string()))?;
        if self.experiment.seeds.is_empty() {
            return Err(Error::config("experiment.seeds", "must not be empty"));
        }
        match self.x0_policy(&obj) {
            X0Policy::Box { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
                return Err(Error::config(
                    "problem.x0.half_width",
                    format!("must be positive, got {half_width}"),
                ))
            }
            X0Policy::Explicit { values } if values.len() != obj.dimension() => {
                return Err(Error::config(
                    "problem.x0.values",
                    format!("expected {} entries, got {}", obj.dimension(), values.len()),
                ))
            }
            X0Policy::Default if obj.standard_start().is_none() => {
                return Err(Error::config(
                    "problem.x0.policy",
                    format!("{} has no published starting point", obj.name()),
                ))
            }
            _ => {}
        }
        if let Some(rt) = &self.rtable {
            for (name, grid) in [("rtable.eps_f", &rt.eps_f), ("rtable.eps_g", &rt.eps_g)] {
                if grid.is_empty() || grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(Error::config(name, "grid values must be positive and non-empty"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[problem]
id = "tridiag:20"
x0 = { policy = "box", half_width = 5.0 }

[noise]
family = "uniform"
eps_f = 1.0
eps_g = 2.0
eps_B = 3.0

[driver]
delta0 = 0.5
max_iters = 50

[experiment]
seeds = [1, 2, 3]
out = "out/sample"
variants = "both"
"#;

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.noise.eps_b, 3.0);
        assert_eq!(cfg.driver.max_iters, 50);
        assert_eq!(cfg.driver.c1, 0.25);
        assert_eq!(cfg.experiment.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.problem.x0, Some(X0Policy::Box { half_width: 5.0 }));
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn empty_seeds_is_config_error() {
        let text = SAMPLE.replace("seeds = [1, 2, 3]", "seeds = []");
        match ExperimentConfig::from_toml_str(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "experiment.seeds"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn bad_driver_reports_section() {
        let text = SAMPLE.replace("delta0 = 0.5", "delta0 = 0.5\nc1 = 0.9");
        match ExperimentConfig::from_toml_str(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "driver"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = SAMPLE.replace("eps_B = 3.0", "eps_B = 3.0\nepsilon = 1");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn box_start_is_seeded() {
        let a = box_start(10, 50.0, 7);
        assert_eq!(a, box_start(10, 50.0, 7));
        assert_ne!(a, box_start(10, 50.0, 8));
        assert!(a.iter().all(|v| v.abs() <= 50.0));
    }
}
