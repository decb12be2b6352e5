//! Scalar abstraction for the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar: `f32` or `f64`.
///
/// Everything in `linalg`, `confidence` and `policies` is generic over this
/// trait; the simulation layers pin `f64` through the crate-root aliases.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Conversion from an `f64` constant. Panics on values a float cannot
    /// represent (never for the literals this crate feeds it).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert")
    }

    /// Conversion from a count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count must convert")
    }
}

impl Real for f32 {}
impl Real for f64 {}
