//! Scalar abstraction: all core math is generic over a floating-point type.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate (`f32` or `f64`).
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }

    fn pi() -> Self {
        Self::lit(std::f64::consts::PI)
    }

    fn tau() -> Self {
        Self::lit(std::f64::consts::TAU)
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

pub type Point<T> = [T; 2];

pub fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

pub fn sub<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn add<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn scale<T: Real>(a: Point<T>, s: T) -> Point<T> {
    [a[0] * s, a[1] * s]
}

pub fn norm<T: Real>(a: Point<T>) -> T {
    dot(a, a).sqrt()
}

pub fn dist<T: Real>(a: Point<T>, b: Point<T>) -> T {
    norm(sub(a, b))
}

/// z-component of the cross product of `a` and `b`.
pub fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[1] - a[1] * b[0]
}
