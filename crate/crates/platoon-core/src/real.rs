//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the toolkit computes with.
///
/// Implemented for `f32` and `f64`. The bounds cover what the numerics
/// actually need: IEEE arithmetic, conversion from literals, text
/// round-tripping for CSV, and thread-safety for parallel map evaluation.
pub trait Real:
    Float + FromPrimitive + Display + Debug + FromStr + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal to the working scalar type.
#[inline]
pub fn fp<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("literal representable in scalar type")
}
