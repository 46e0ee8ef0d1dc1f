//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type implementing [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar used throughout the crate (`f32` or `f64`).
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into this scalar type.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }

    /// Widen to `f64` (exact for `f32` and `f64`).
    fn to_f64_c(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Euclidean norm of a slice.
pub fn norm<S: Real>(v: &[S]) -> S {
    v.iter().map(|&x| x * x).sum::<S>().sqrt()
}

/// Dot product of two equal-length slices.
pub fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `out += scale * v`, elementwise.
pub fn axpy<S: Real>(out: &mut [S], scale: S, v: &[S]) {
    debug_assert_eq!(out.len(), v.len());
    for (o, &x) in out.iter_mut().zip(v) {
        *o += scale * x;
    }
}

/// True when every entry is finite.
pub fn all_finite<S: Real>(v: &[S]) -> bool {
    v.iter().all(|x| x.is_finite())
}
