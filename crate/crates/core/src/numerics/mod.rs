//! Dense numerical kernels used by the dynamics and reconstruction code.
//!
//! Everything here works on small dense matrices (a handful of species and
//! reactions), is deterministic, and is generic over [`Scalar`](crate::Scalar).

mod eig;
mod expm;
mod linalg;
mod newton;
mod rk4;

pub use eig::{eig, EigenDecomposition};
pub use expm::expm;
pub use linalg::{
    condition_number, echelon_basis, lstsq_min_norm, null_space, rank, singular_cutoff, solve,
};
pub use newton::{newton_minimize, NewtonError, NewtonOptions, NewtonOutcome, ObjectiveEval};
pub use rk4::{rk4, rk4_step};
