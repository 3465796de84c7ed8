//! Log-linear reaction-quotient dynamics for chemical reaction networks.
//!
//! Reaction quotients `Q` relax toward their equilibrium constants linearly
//! in log space: with `x = ln(Q/K_eq)`,
//!
//! ```text
//! dx/dt = -K x + u(t)
//! ```
//!
//! The crate provides closed-form and integrated trajectories, eigenmode and
//! steady-state analysis, thermodynamic consistency checks on networks, and
//! the reconstruction of positive concentrations from target quotients and
//! conserved totals.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the common `f64` instantiations.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod massaction;
pub mod network;
pub mod numerics;
pub mod reconstruct;
pub mod scalar;
pub mod scenarios;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use nalgebra::{Complex, DMatrix, DVector};

/// Double-precision reaction network.
pub type Network = network::Network<f64>;
/// Single-precision reaction network.
pub type Network32 = network::Network<f32>;
pub type ConservationBasis = network::ConservationBasis<f64>;
pub type LogLinearSystem = dynamics::LogLinearSystem<f64>;
pub type LogLinearSystem32 = dynamics::LogLinearSystem<f32>;
pub type ControlInput = dynamics::ControlInput<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type EigenmodeDecomposition = numerics::EigenDecomposition<f64>;
pub type MassActionAB = massaction::MassActionAB<f64>;
pub type ReconstructionResult = reconstruct::ReconstructionResult<f64>;
