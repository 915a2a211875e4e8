//! Experiment configuration, drivers and report output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;
pub mod svg;

pub use config::{Experiment, ExperimentConfig, Format, Overrides};
pub use experiments::{
    run, run_bernoulli_check, run_catmap_experiment, run_convergence_sweep, run_spectrum_experiment,
    run_timeseries_experiment,
};
pub use output::emit_outputs;
pub use report::{ConvergenceReport, Report, ReportBody, SpectrumReport};
