use nalgebra::{Complex, DVector};

use super::LogLinearSystem;
use crate::error::Result;
use crate::numerics::{eig, EigenDecomposition};
use crate::Scalar;

/// Eigen decomposition of the relaxation matrix `K`.
///
/// For symmetric `K` the modes are real and orthonormal and the mode
/// coordinates are `z = Vᵀx`; otherwise `z = V⁻¹x` with complex modes.
/// Each `z_i` evolves as `z_i(0)·e^{−λ_i t}` without drive.
pub fn eigenmodes<T: Scalar>(sys: &LogLinearSystem<T>) -> Result<EigenDecomposition<T>> {
    eig(sys.relaxation())
}

/// Damped oscillation carried by a complex eigenvalue pair `a ± iω` of `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation<T> {
    /// Decay rate `a` of the envelope `e^{−a t}` (1/s).
    pub damping: T,
    /// Angular frequency `ω` (rad/s).
    pub frequency: T,
    /// `2π/ω` (s).
    pub period: T,
}

/// One entry per complex-conjugate eigenvalue pair; empty for a real spectrum.
pub fn oscillation_parameters<T: Scalar>(sys: &LogLinearSystem<T>) -> Result<Vec<Oscillation<T>>> {
    let modes = eigenmodes(sys)?;
    Ok(modes
        .values
        .iter()
        .filter(|v| v.im > T::zero())
        .map(|v| Oscillation {
            damping: v.re,
            frequency: v.im,
            period: T::TAU() / v.im,
        })
        .collect())
}

/// Mode coordinates of `x` under the decomposition.
pub fn mode_coordinates<T: Scalar>(
    modes: &EigenDecomposition<T>,
    x: &DVector<T>,
) -> Result<DVector<Complex<T>>> {
    modes.coordinates(x)
}
