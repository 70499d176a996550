//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over a floating-point scalar so the
//! same kernels run in `f32` or `f64`. The verification tolerances are tuned
//! for `f64`; `f32` is supported for quick exploratory runs only.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the solver and the analysis routines.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum<Self> + fmt::Debug + fmt::Display + 'static
{
    /// Shorthand for converting an `f64` literal into `Self`.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion back to `f64` (used for formatting and reports).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip() {
        let x: f64 = Real::of(0.25);
        assert_eq!(x, 0.25);
        let y: f32 = Real::of(0.5);
        assert_eq!(y, 0.5f32);
        assert_eq!(x.as_f64(), 0.25);
    }
}
