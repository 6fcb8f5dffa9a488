//! Scalar abstractions shared by the geometry and metric kernels.
//!
//! [`Scalar`] is satisfied by `f32`, `f64` and exact rationals, and covers
//! everything that only needs field arithmetic and ordering (overlap, areas,
//! curve sweeps). [`Real`] adds the transcendental functions required by
//! distances and priors.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Ordered field element: floats or exact rationals.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Signed + FromPrimitive + ToPrimitive
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite value representable in scalar type")
    }

    fn from_usize_exact(v: usize) -> Self {
        Self::from_usize(v).expect("count representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl<T> Scalar for T where
    T: Clone + PartialOrd + Debug + Display + Num + Signed + FromPrimitive + ToPrimitive
{
}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + Copy {}

impl<T> Real for T where T: Scalar + Float + Copy {}
