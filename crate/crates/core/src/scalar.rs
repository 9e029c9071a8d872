//! Scalar abstraction: the numeric kernels work over any IEEE float type.

use std::fmt;

use num_traits::{Float, FromPrimitive, NumAssign};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable throughout the crate (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts from `f64`; lossless for `f64`, rounding for `f32`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to scalar")
    }

    /// Converts to `f64` (exact for `f64`).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssign
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    x.iter()
        .fold(T::zero(), |acc, &v| acc + v * v)
        .sqrt()
}

/// Dot product.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// True iff every entry is finite.
pub fn all_finite<T: Scalar>(x: &[T]) -> bool {
    x.iter().all(|v| v.is_finite())
}
