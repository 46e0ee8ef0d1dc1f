//! Constrained reinforcement-learning laboratory: CMDP/CMG abstractions,
//! a desk-scale planar task suite, hand-task reward math, a minimal
//! differentiable MLP stack, advantage estimation, and the full catalogue
//! of safe policy-optimization update rules.
//!
//! Everything numeric is generic over the scalar type through
//! [`scalar::Real`]; the `*64` aliases below fix `f64`, which the training
//! harness uses throughout.

pub mod algos;
pub mod cmdp;
pub mod envs;
pub mod estimation;
pub mod hand;
pub mod multi;
pub mod nn;
pub mod scalar;

pub use scalar::Real;

/// Scalar type used by the harness and CLI.
pub type F64 = f64;

pub type Trajectory64 = cmdp::Trajectory<f64>;
pub type JointTrajectory64 = cmdp::JointTrajectory<f64>;
pub type BoxSpace64 = cmdp::BoxSpace<f64>;
pub type PolicyParams64 = nn::PolicyParams<f64>;
pub type Batch64 = algos::Batch<f64>;
