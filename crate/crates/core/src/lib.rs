//! Quantum Fisher information of definite-photon-number states in a two-arm
//! optical interferometer with photon loss, and the search for the input state
//! that maximizes it.
//!
//! - [`state`]: input states, presets and the loss model.
//! - [`branch`]: decomposition of the lossy state into conditional pure branches.
//! - [`fisher`]: pure, bound, one-arm and exact Fisher information.
//! - [`optimize`]: global maximization over the weight simplex.
//! - [`strategies`]: closed-form benchmarks (Heisenberg, SIL, N00N, chopping).
//! - [`scaling`]: precision curves and differential scaling exponents.

pub mod binomial;
pub mod branch;
pub mod error;
pub mod fisher;
pub mod golden;
pub mod optimize;
pub mod scaling;
pub mod state;
pub mod strategies;

pub use branch::{branch_coefficient, decompose, Branch, BranchDecomposition};
pub use error::{Error, Result};
pub use fisher::{
    qfi_bound, qfi_bound_gradient, qfi_exact, qfi_exact_at_phase, qfi_one_arm, qfi_pure, QfiMethod,
    QfiResult,
};
pub use optimize::{
    optimize, optimize_from, optimize_two_component, OptimizationReport, OptimizerOptions,
    TwoComponentForm,
};
pub use scaling::{
    differential_scaling, eta_curve, precision_curve, strategy_precision, CurveRow, PrecisionCurve,
    ScalingCurve, ScalingRow, StrategyValue,
};
pub use state::{preset_state, InputState, LossModel, StateKind};
pub use strategies::{
    chopping, chopping_numeric, heisenberg_limit, noon_precision, sil, ChoppingRegime,
    ChoppingResult, LossMode, StrategyKind, StrategySpec,
};
