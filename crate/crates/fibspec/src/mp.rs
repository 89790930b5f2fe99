//! Arbitrary-precision [`Real`] backed by MPFR.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use fibspec_core::{PrecisionContext, Real};
use rug::float::Round;
use rug::Float;

/// An MPFR float. The precision is fixed at construction and inherited by
/// every result computed from it.
#[derive(Clone, Debug, PartialEq)]
pub struct Mpf(pub Float);

impl Mpf {
    pub fn with_bits(bits: u32, x: f64) -> Self {
        Mpf(Float::with_val(bits, x))
    }

    pub fn bits(&self) -> u32 {
        self.0.prec()
    }
}

impl PartialOrd for Mpf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Mpf {
            type Output = Mpf;
            fn $f(self, rhs: Mpf) -> Mpf {
                Mpf(self.0.$f(rhs.0))
            }
        }
        impl<'a> $tr<&'a Mpf> for Mpf {
            type Output = Mpf;
            fn $f(self, rhs: &'a Mpf) -> Mpf {
                Mpf(self.0.$f(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Mpf {
    type Output = Mpf;
    fn neg(self) -> Mpf {
        Mpf(-self.0)
    }
}

impl Real for Mpf {
    fn effective_bits(requested: u32) -> u32 {
        requested
    }
    fn from_f64(x: f64, ctx: &PrecisionContext) -> Self {
        Mpf::with_bits(ctx.bits, x)
    }
    fn from_f64_like(&self, x: f64) -> Self {
        Mpf::with_bits(self.bits(), x)
    }
    fn from_i64_like(&self, x: i64) -> Self {
        Mpf(Float::with_val(self.bits(), x))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn abs(&self) -> Self {
        Mpf(self.0.clone().abs())
    }
    fn sqrt(&self) -> Self {
        Mpf(self.0.clone().sqrt())
    }
    fn ln(&self) -> Self {
        Mpf(self.0.clone().ln())
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn mul_pow2(&self, e: i32) -> Self {
        Mpf(self.0.clone() << e)
    }
    fn floor_i128(&self) -> Option<i128> {
        self.0.to_integer_round(Round::Down)?.0.to_i128()
    }
    fn to_sci_string(&self, digits: usize) -> String {
        if self.0.is_zero() {
            // match the f64 rendering of zero
            let sign = if self.0.is_sign_negative() { "-" } else { "" };
            return format!("{sign}{:.*e}", digits.saturating_sub(1), 0.0);
        }
        if !self.0.is_finite() {
            return self.to_f64().to_string();
        }
        // value = 0.d1 d2 ... * 10^exp
        let (neg, ds, exp) = self.0.to_sign_string_exp(10, Some(digits.max(1)));
        let exp = exp.unwrap_or(0) - 1;
        let sign = if neg { "-" } else { "" };
        let (head, tail) = ds.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}
