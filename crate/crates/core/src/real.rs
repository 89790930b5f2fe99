//! Scalar abstraction shared by every numerical routine.
//!
//! Routines are generic over [`Real`] so the same code runs in `f64` and in
//! an arbitrary-precision type supplied by a downstream crate.

use alloc::string::String;
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// An ordered field with the handful of transcendental operations the
/// spectral code needs.
///
/// Values carry their own precision; `*_like` constructors produce a value
/// with the precision of `self`, so inner loops never consult a context.
pub trait Real:
    Clone
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Mantissa bits this type can represent, given a requested width.
    fn effective_bits(requested: u32) -> u32;

    fn from_f64(x: f64, ctx: &PrecisionContext) -> Self;
    fn from_f64_like(&self, x: f64) -> Self;
    fn from_i64_like(&self, x: i64) -> Self;

    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn is_finite(&self) -> bool;
    /// Exact multiplication by `2^e`.
    fn mul_pow2(&self, e: i32) -> Self;
    /// `floor(self)` when it fits in an `i128`.
    fn floor_i128(&self) -> Option<i128>;
    /// Scientific notation with `digits` significant decimal digits.
    fn to_sci_string(&self, digits: usize) -> String;

    fn zero_like(&self) -> Self {
        self.from_i64_like(0)
    }
    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }
    fn is_sign_negative(&self) -> bool {
        *self < self.zero_like()
    }
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Working precision and the comparison tolerance derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionContext {
    pub bits: u32,
    /// Relative tolerance for equality checks; never below `2^(1-bits)`.
    pub eq_tol: f64,
}

impl PrecisionContext {
    /// Smallest supported width: IEEE double.
    pub const MIN_BITS: u32 = 53;

    /// Context with the default tolerance `2^(8-bits)`.
    pub fn new(bits: u32) -> Result<Self> {
        Self::with_tol(bits, pow2(8 - bits as i32))
    }

    pub fn with_tol(bits: u32, eq_tol: f64) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::Precondition("precision below 53 bits"));
        }
        if !(eq_tol >= pow2(1 - bits as i32)) {
            return Err(Error::Precondition("tolerance below the rounding unit"));
        }
        Ok(PrecisionContext { bits, eq_tol })
    }

    pub fn double() -> Self {
        PrecisionContext { bits: 53, eq_tol: pow2(-45) }
    }

    /// `2^(shift - bits)`, the tolerance scale used for derived quantities.
    /// Underflows to zero for very wide contexts.
    pub fn ulp_scaled(&self, shift: i32) -> f64 {
        pow2(shift - self.bits as i32)
    }

    /// Decimal digits needed to round-trip a value at this width.
    pub fn decimal_digits(&self) -> usize {
        libm::ceil(self.bits as f64 * core::f64::consts::LOG10_2) as usize
    }
}

pub(crate) fn pow2(e: i32) -> f64 {
    libm::ldexp(1.0, e)
}

impl Real for f64 {
    fn effective_bits(_requested: u32) -> u32 {
        53
    }
    fn from_f64(x: f64, _ctx: &PrecisionContext) -> Self {
        x
    }
    fn from_f64_like(&self, x: f64) -> Self {
        x
    }
    fn from_i64_like(&self, x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn mul_pow2(&self, e: i32) -> Self {
        libm::ldexp(*self, e)
    }
    fn floor_i128(&self) -> Option<i128> {
        let f = libm::floor(*self);
        // i128 covers < 2^127 in magnitude
        if f.is_finite() && libm::fabs(f) < 1.7e38 {
            Some(f as i128)
        } else {
            None
        }
    }
    fn to_sci_string(&self, digits: usize) -> String {
        alloc::format!("{:.*e}", digits.saturating_sub(1), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_rejects_narrow_widths() {
        assert!(PrecisionContext::new(52).is_err());
        assert!(PrecisionContext::with_tol(128, 1e-60).is_err());
        let c = PrecisionContext::new(128).unwrap();
        assert_eq!(c.decimal_digits(), 39);
        assert_eq!(PrecisionContext::double().decimal_digits(), 16);
    }

    #[test]
    fn f64_floor_and_format() {
        assert_eq!((-0.5f64).floor_i128(), Some(-1));
        assert_eq!(f64::INFINITY.floor_i128(), None);
        assert_eq!(1.5f64.to_sci_string(3), "1.50e0");
        assert_eq!(3.0f64.mul_pow2(-1), 1.5);
    }
}
