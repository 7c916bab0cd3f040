//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Pairwise (tree) summation in slice order. The result depends only on the
/// input order, never on scheduling.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + *x * *y;
    }
    acc
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
