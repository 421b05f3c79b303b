//! Scalar abstraction: every numerical kernel in this crate is generic over
//! the working floating-point type.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the solver can run on (`f32`, `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar.
#[inline]
pub fn real<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("constant must be representable in the scalar type")
}

/// Error-free transformation of a product: returns `(p, e)` with
/// `a * b == p + e` exactly.
#[inline]
pub fn two_prod<R: Real>(a: R, b: R) -> (R, R) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated (Kahan-Babuska-Neumaier) accumulator.
///
/// Dot products against stiffness rows cancel catastrophically at fine
/// meshes (terms of size `1/h^3` summing to `O(1)`); plain summation would
/// bury KKT residuals under rounding noise.
#[derive(Clone, Copy, Debug)]
pub struct Accumulator<R> {
    sum: R,
    comp: R,
}

impl<R: Real> Default for Accumulator<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> Accumulator<R> {
    pub fn new() -> Self {
        Accumulator {
            sum: R::zero(),
            comp: R::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, v: R) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Adds `a * b` without losing the rounding error of the product.
    #[inline]
    pub fn add_prod(&mut self, a: R, b: R) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.add(e);
    }

    #[inline]
    pub fn value(&self) -> R {
        self.sum + self.comp
    }
}

/// Compensated dot product.
pub fn dot<R: Real>(x: &[R], y: &[R]) -> R {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Accumulator::new();
    for (&a, &b) in x.iter().zip(y) {
        acc.add_prod(a, b);
    }
    acc.value()
}
