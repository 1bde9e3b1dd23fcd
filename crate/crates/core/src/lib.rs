//! Forward-backward splitting with low-rank quasi-Newton metrics.
//!
//! Solves monotone inclusions `0 ∈ Az + Bz` with `A` maximal monotone and
//! `B` cocoercive, preconditioned by metrics `M ± UUᵀ` whose resolvents are
//! reduced to a small root-finding problem. The PDHG method is recovered as
//! the special case of a block metric, and inherits the same accelerations.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod metric;
pub mod ops;
pub mod oracle;
pub mod pdhg;
pub mod resolvent;
pub mod splitting;

pub use error::{Error, Result};
pub use metric::{
    build_sr1_metric, osr1_direction, GammaRule, MetricMode, MetricScheduleState, QuasiNewtonMetric, Sign, SpdBase,
};
pub use pdhg::{build_pdhg_metric, pdhg_fb_step, pdhg_step, PdhgMetric, SaddleProblem, StepSize};
pub use resolvent::{resolve_perturbed, LowRankTerm, RootConfig, RootMethod, RootSolveReport};
pub use splitting::{
    AlphaSchedule, FbModel, InclusionProblem, IterateRecord, ObserverControl, SolverConfig, SolverOutcome, StopReason,
    Variant,
};
