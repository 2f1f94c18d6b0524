//! Scalar abstraction shared by every model in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};

/// Floating point type the models are evaluated in.
///
/// Implemented for `f32` and `f64`. Everything user-facing in the harness runs
/// in `f64`; `f32` is useful for bulk field evaluation where the tolerances
/// allow it.
pub trait Scalar: Float + FloatConst + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal or parameter into this scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        <Self as num_traits::NumCast>::from(value).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
