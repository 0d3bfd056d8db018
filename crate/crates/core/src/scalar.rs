//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Floating-point scalar the tracker is generic over (`f32` or `f64`).
///
/// Everything that must be exact to 1e-10 is exercised with `f64`; `f32`
/// is supported for memory-constrained use and runs the same code paths.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Largest value strictly below one that the fit ratio is clamped to.
    #[inline]
    fn fit_ratio_ceiling() -> Self {
        let eps = Self::lit(1e-12).max(Self::epsilon());
        Self::one() - eps
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> KahanSum<T> {
    pub(crate) fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    #[inline]
    pub(crate) fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Multiplies the accumulated value by `s`.
    #[inline]
    pub(crate) fn scale(&mut self, s: T) {
        self.sum *= s;
        self.carry *= s;
    }

    #[inline]
    pub(crate) fn value(&self) -> T {
        self.sum + self.carry
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = KahanSum::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

pub(crate) fn energy<T: Real>(y: &[T]) -> T {
    dot(y, y)
}
