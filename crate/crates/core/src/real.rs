use std::fmt::{Debug, Display};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive};

/// Scalar type for all chart computations.
///
/// Everything in this crate is written against this trait so the same
/// formulas run at `f32` or `f64`; the shipped tolerances assume `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lift an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal must be representable")
    }

    fn two() -> Self {
        Self::of(2.0)
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    /// 16*pi, the constant relating scalar curvature to energy density.
    fn sixteen_pi() -> Self {
        Self::of(16.0) * Self::PI()
    }
}

impl Real for f32 {}
impl Real for f64 {}
