//! Scalar abstractions.
//!
//! Grid solvers, metrics and curve cutting are written against [`Real`], which is implemented
//! for `f32` and `f64`. Game bookkeeping is written against [`ExactScalar`], which adds `BigRational`
//! so cost certificates can be checked without rounding.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Signed, ToPrimitive};

/// Floating point scalar used by every grid-based computation.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + 'static
{
    /// Base-2 exponent of the quantum used for exactly summable path costs.
    ///
    /// Values that are integer multiples of `2^-QUANTUM_BITS` and bounded by
    /// `2^(MANTISSA_DIGITS - QUANTUM_BITS - 1)` add without rounding.
    const QUANTUM_BITS: i32;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Rounds to the nearest multiple of the summation quantum.
    #[inline]
    fn quantize(self) -> Self {
        if !self.is_finite() {
            return self;
        }
        let scale = Self::lit((2.0f64).powi(Self::QUANTUM_BITS));
        (self * scale).round() / scale
    }

    /// Largest magnitude for which quantized sums stay exact.
    #[inline]
    fn exact_sum_bound() -> Self {
        let digits = if std::mem::size_of::<Self>() == 4 { 24 } else { 53 };
        Self::lit((2.0f64).powi(digits - Self::QUANTUM_BITS - 1))
    }
}

impl Real for f32 {
    const QUANTUM_BITS: i32 = 8;
}

impl Real for f64 {
    const QUANTUM_BITS: i32 = 30;
}

/// Ordered field scalar for bookkeeping that must be exact when instantiated with `BigRational`.
pub trait ExactScalar:
    Clone + PartialOrd + Debug + Signed + num_traits::Num + Send + Sync + 'static
{
    /// Exact conversion of a finite `f64` (every finite double is a dyadic rational).
    fn from_f64_exact(x: f64) -> Option<Self>;
    fn to_f64_approx(&self) -> f64;
    /// `true` when arithmetic on this type never rounds.
    fn is_exact() -> bool;
}

impl ExactScalar for f64 {
    fn from_f64_exact(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64_approx(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl ExactScalar for BigRational {
    fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64_approx(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        true
    }
}

/// Builds the rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantized_values_sum_exactly() {
        let a = 0.1f64.quantize();
        let b = 0.7f64.quantize();
        let c = (-0.3f64).quantize();
        assert_eq!((a + b) + c, a + (b + c));
        assert!(1.0e6 < f64::exact_sum_bound());
    }

    #[test]
    fn rational_roundtrip_is_exact() {
        let x = 0.1f64;
        let r = BigRational::from_f64_exact(x).unwrap();
        assert_eq!(r.to_f64_approx(), x);
        assert!(BigRational::from_f64_exact(f64::NAN).is_none());
    }
}
