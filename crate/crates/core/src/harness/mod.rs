//! Experiment plumbing: configs, presets, sweeps, CSV and SVG output, and
//! the R table.

pub mod config;
pub mod experiment;
pub mod io;
pub mod plot;
pub mod presets;
pub mod rolling;
pub mod rtable;

pub use config::{ExperimentConfig, VariantSelection, X0Policy};
pub use experiment::{run_experiment, ExperimentOutput, RunOutcome, RunSummary};
pub use plot::{clip_rho, emit_plot_series};
pub use presets::preset;
pub use rolling::RollingMinSeries;
pub use rtable::{r_table, write_r_table, RTable};
