//! Push-sum distributed dual averaging (PS-DDA) over time-varying directed
//! graphs with fixed per-edge communication delays.
//!
//! Delays are modeled by inserting relay nodes on every delayed edge, which
//! turns the delayed system into a larger undelayed one driven by
//! column-stochastic matrices. The crate builds those matrices, runs the
//! iteration, evaluates the convergence constants, and ships an independent
//! message-passing simulator used to cross-check the augmented model.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod delay;
pub mod dual_averaging;
pub mod error;
pub mod event_sim;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod network;
pub mod objective;

pub use constants::{error_bound, ConvergenceConstants, DeltaMode};
pub use delay::{augment_matrix, build_index_map, validate_augmented, AugmentedIndexMap, DelaySpec};
pub use dual_averaging::{
    proximal_projection, run, theorem1_envelope, theorem1_rhs, EuclideanProx, ProximalMap, ScriptedSubgradients,
    StepSchedule, SubgradientSource, SystemState, Trajectory,
};
pub use error::{Error, Result};
pub use event_sim::{compare_trajectories, simulate_event_driven};
pub use graph::{out_degree, Edge, EdgeList, TimeVaryingDigraph};
pub use matrix::{build_p_matrix, column_spread, transition_product, ColumnStochasticMatrix};
pub use network::DelayedNetwork;
pub use objective::{project_l1_ball, FeasibleSet, Objective, QuadraticObjective, SensorObjective};
