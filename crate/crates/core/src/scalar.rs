//! Scalar abstraction so the numeric core runs on `f32` or `f64`.
//!
//! The canonical pipeline uses `f64` (see the type aliases at the crate
//! root); `f32` is supported for callers that want the smaller footprint.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssign};

/// Floating-point scalar used throughout the numeric core.
///
/// Deliberately not a supertrait of `FromPrimitive`: the infallible
/// conversions below would collide with its fallible namesakes.
pub trait Scalar:
    Float + NumAssign + Sum<Self> + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64` (exact for `f64` itself).
    fn from_f64(v: f64) -> Self;

    /// Widening conversion to `f64` (exact for `f32` and `f64`).
    fn to_f64(self) -> f64;

    /// Conversion from a sample/count index.
    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}
