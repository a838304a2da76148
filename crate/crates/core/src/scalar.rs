//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the models and optimizer are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; used for constants and random draws.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean of a slice; zero for an empty slice.
pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Population standard deviation (ddof = 0).
pub fn std_dev<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let m = mean(xs);
    let ss: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / T::of_usize(xs.len())).sqrt()
}

pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}
