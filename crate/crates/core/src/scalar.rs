//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real field the geometry is computed over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// `2π`.
    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// `4π`, the mass at which an atom becomes a cusp.
    #[inline]
    fn four_pi() -> Self {
        Self::TAU() + Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Points of the plane are complex numbers.
pub type Point<T> = Complex<T>;

/// The point `apex + offset`, kept split so that distances to `apex` do not
/// suffer cancellation when the offset is far below the apex's ulp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loc<T> {
    pub apex: Point<T>,
    pub offset: Point<T>,
}

impl<T: Real> Loc<T> {
    pub fn at(z: Point<T>) -> Self {
        Self {
            apex: z,
            offset: Complex::new(T::zero(), T::zero()),
        }
    }

    #[inline]
    pub fn z(&self) -> Point<T> {
        self.apex + self.offset
    }

    /// `|z − p|`, exact in the offset when `p` is the apex.
    #[inline]
    pub fn distance_to(&self, p: Point<T>) -> T {
        if p == self.apex {
            self.offset.norm()
        } else {
            (self.z() - p).norm()
        }
    }
}

#[inline]
pub(crate) fn pt<T: Real>(x: T, y: T) -> Point<T> {
    Complex::new(x, y)
}

/// Twice the signed area of the triangle `(o, a, b)`.
#[inline]
pub(crate) fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a.re * b.im - a.im * b.re
}

/// Deterministic pairwise summation.
pub(crate) fn pairwise_sum<T: Real>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}
