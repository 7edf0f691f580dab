//! Scalar abstraction shared by every numeric routine in the crate.

use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point scalar used for counts, probabilities and scores: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Lossless widening used by serialization and reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real to f64")
    }

    /// Absolute slack used when deciding whether a score gain is a real improvement.
    ///
    /// Gains smaller than this relative to `scale` are treated as ties, so that
    /// moves that are equal in exact arithmetic resolve by scan order.
    #[inline]
    fn score_tolerance(scale: Self) -> Self {
        Self::epsilon() * Self::lit(1e3) * (Self::one() + scale.abs())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `x * ln(y)` with the convention `0 * ln(0) = 0`.
#[inline]
pub fn xlogy<T: Real>(x: T, y: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x * y.ln()
    }
}
