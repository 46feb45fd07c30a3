//! Adaptive step-size optimizers for the interpolation regime.
//!
//! The crate provides the ALI-G step-size `min{ℓ/(‖∇ℓ‖² + δ), η}` and the
//! classical Polyak step-size, projected optimization loops built on them,
//! Euclidean projections onto l2 balls, and a set of test problems whose
//! minimizers and constants are known by construction.

pub mod error;
pub mod optimizer;
pub mod problem;
pub mod problems;
pub mod projection;
pub mod stepsize;
pub mod trajectory;
pub mod types;

pub use error::{Error, Result};
pub use optimizer::{
    alig_momentum_step, alig_step, polyak_gd_step, run, sgd_step, LogSchedule, MomentumVariant, OptimizerConfig, OptimizerKind,
    OptimizerState, DEFAULT_DELTA,
};
pub use problem::{evaluate_batch, evaluate_sample, full_objective, Problem};
pub use problems::{make_problem, BuiltinProblem, Dims, ProblemKind};
pub use projection::{project, FeasibleRegion};
pub use stepsize::{alig_step_size, hyperplane_intersection_check, polyak_step_size, prox_truncated_solve};
pub use trajectory::{StepRecord, Termination, Trajectory, CSV_HEADER};
pub use types::{ParamVector, ProblemMeta, SampleEval};
