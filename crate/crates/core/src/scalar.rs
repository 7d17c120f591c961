//! Floating-point scalar abstraction.
//!
//! Every geometric routine in this crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. Tolerances are written once in `f64`
//! units and rescaled by machine epsilon for narrower types.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the geometry kernels.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a length or index into `Self`.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy widening used for error payloads and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Rescales an `f64` tolerance to the precision of `Self`.
    ///
    /// Returns `t` unchanged for `f64`; for `f32` the tolerance grows by the
    /// ratio of the two machine epsilons.
    fn tol(t: f64) -> Self {
        let ratio = Self::epsilon().as_f64() / f64::EPSILON;
        Self::lit(t * ratio.max(1.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sum of a slice.
pub(crate) fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum()
}

/// Euclidean inner product of two equal-length slices.
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
