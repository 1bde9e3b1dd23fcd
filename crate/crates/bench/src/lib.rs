//! Experiment harness for the quasi-Newton splitting solvers: JSON
//! experiment configs, the algorithm roster, reference optimal values,
//! CSV logs and linear-rate fits.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod rate;
pub mod reference;
pub mod selftest;

pub use config::{
    parse_algorithms, Algorithm, ExperimentConfig, GammaConfig, KernelConfig, ProblemConfig,
    TargetGap,
};
pub use error::{BenchError, Result};
pub use experiment::{
    evaluate, run_algorithm, run_experiment, run_experiment_with_cache, solver_config, AlgorithmRun, RunSummary,
    CSV_HEADER,
};
pub use rate::{first_below, fit_linear_rate, floor_for_plot, GAP_FLOOR};
pub use reference::{compute_reference, reference_gap, Reference};
pub use selftest::{oracle_selftest, SelftestReport};
