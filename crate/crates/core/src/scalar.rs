//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FloatConst, ToPrimitive};

/// Real floating-point type usable by the solvers: `f32` or `f64`.
///
/// Tolerances throughout the crate are written as `f64` literals tuned for
/// double precision. [`Scalar::tol`] clamps them from below by a small
/// multiple of machine epsilon so the same code stays meaningful in `f32`.
pub trait Scalar:
    RealField + Copy + ToPrimitive + FloatConst + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Machine epsilon of the type.
    const EPS: Self;

    /// Converts an `f64` constant into this type.
    fn lit(v: f64) -> Self;

    /// Converts back to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;

    /// A relative tolerance of `v`, floored at `64·EPS`.
    fn tol(v: f64) -> Self {
        let floor = Self::EPS * Self::lit(64.0);
        let t = Self::lit(v);
        if t < floor {
            floor
        } else {
            t
        }
    }
}

impl Scalar for f64 {
    const EPS: Self = f64::EPSILON;

    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const EPS: Self = f32::EPSILON;

    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}
