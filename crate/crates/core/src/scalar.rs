//! Scalar abstraction: the numeric kernels are generic over the float type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every kernel in this crate: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossless conversion from a cell or index count.
    ///
    /// Counts in this crate stay far below the mantissa width of `f32`, so
    /// the conversion is exact for both supported scalars.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
