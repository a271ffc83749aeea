//! Data-driven control toolkit built on behavioral representations of LTI
//! systems: Hankel data matrices with rank certification, single-step
//! forward and inverse data-enabled predictors, trajectory-level system
//! interconnection, and internal behavior control in both
//! component-by-component and unified forms, cross-checked against a
//! classical model-based internal-model controller.

pub mod config;
pub mod controllers;
pub mod error;
pub mod filter;
pub mod hankel;
pub mod interconnect;
pub mod lti;
pub mod predictors;
pub mod sim;
pub mod solve;
pub mod trajectory;

pub use controllers::{
    build_cbc, build_imc, build_unified, CbcController, Controller, ImcController,
    UnifiedController,
};
pub use error::{Error, Result};
pub use filter::{make_advanced_filter, make_imc_filter, ImcFilter};
pub use hankel::{
    build_controller_matrix, build_forward, build_inverse, check_rank, hankel, rank_profile,
    ControllerDataMatrix, ForwardDataMatrix, InverseDataMatrix, RankReport, DEFAULT_RANK_TOL,
};
pub use interconnect::{
    feedback, negative_feedback, parallel, series, unified_controller_trajectory,
    zero_ic_trajectory, InterconnectionKind, InterconnectionTrajectory, RegenerationContext,
};
pub use lti::{
    filter_signal, realize, realize_discrete, zoh_discretize, ContinuousStateSpace,
    ContinuousTransferFunction, DiscreteStateSpace,
};
pub use predictors::{ForwardPredictor, InversePredictor};
pub use sim::{
    collect_offline, compare_controllers, run_closed_loop, run_closed_loop_with,
    ComparisonReport, ControllerChoice, ExperimentConfig, SimLog, SimRecord, StepSchedule,
};
pub use solve::{min_norm_solve, pinv};
pub use trajectory::Trajectory;
