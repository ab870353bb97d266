//! Fixed-precision real arithmetic.
//!
//! All inexact norm and constant evaluations run on [`Real`], a binary
//! floating-point number whose working precision is set once per process:
//! by [`set_working_digits`], else the `PADIC_HARDY_DIGITS` environment
//! variable, else [`DEFAULT_DIGITS`]. Exponents stay rational for as long as
//! possible; `Real` enters only at final evaluation.

use crate::rational::Rat;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::{BigInt, Sign};
use num_traits::ToPrimitive;
use std::cmp::Ordering;
use std::sync::OnceLock;

type F = FBig<HalfEven, 2>;

/// Decimal digits carried by default.
pub const DEFAULT_DIGITS: u32 = 50;

static DIGITS: OnceLock<u32> = OnceLock::new();

/// Fixes the working precision in decimal digits for the whole process.
/// Returns `false` if the precision was already fixed.
pub fn set_working_digits(digits: u32) -> bool {
    DIGITS.set(digits.clamp(10, 10_000)).is_ok()
}

/// Decimal digits the process is working with.
pub fn working_digits() -> u32 {
    *DIGITS.get_or_init(|| {
        std::env::var("PADIC_HARDY_DIGITS")
            .ok()
            .and_then(|v| v.parse::<u32>().ok())
            .map(|d| d.clamp(10, 10_000))
            .unwrap_or(DEFAULT_DIGITS)
    })
}

fn precision_bits() -> usize {
    working_digits() as usize * 4 + 32
}

fn big_to_ibig(n: &BigInt) -> IBig {
    let (sign, bytes) = n.to_bytes_le();
    let mag = IBig::from_le_bytes(&bytes);
    match sign {
        Sign::Minus => -mag,
        _ => mag,
    }
}

/// Real number at the process working precision.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(F);

impl Real {
    pub fn zero() -> Self {
        Real(F::ZERO.with_precision(precision_bits()).value())
    }

    pub fn one() -> Self {
        Real(F::ONE.with_precision(precision_bits()).value())
    }

    pub fn from_i64(k: i64) -> Self {
        Real(F::from(k).with_precision(precision_bits()).value())
    }

    pub fn from_rat(r: &Rat) -> Self {
        let num = F::from(big_to_ibig(r.numer()))
            .with_precision(precision_bits())
            .value();
        let den = F::from(big_to_ibig(r.denom()))
            .with_precision(precision_bits())
            .value();
        Real(num / den)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == F::ZERO
    }

    pub fn is_negative(&self) -> bool {
        self.0 < F::ZERO
    }

    pub fn add(&self, o: &Real) -> Real {
        Real(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Real) -> Real {
        Real(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Real) -> Real {
        Real(&self.0 * &o.0)
    }

    pub fn div(&self, o: &Real) -> Real {
        Real(&self.0 / &o.0)
    }

    pub fn neg(&self) -> Real {
        Real(-self.0.clone())
    }

    pub fn abs(&self) -> Real {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Real {
        Real::one().div(self)
    }

    /// `self^k` for integer `k`; `self != 0` when `k < 0`.
    pub fn powi(&self, k: i64) -> Real {
        Real(self.0.powi(IBig::from(k)))
    }

    /// `self^e` for rational `e`; requires `self > 0` unless `e` is integral.
    pub fn pow_rat(&self, e: &Rat) -> Real {
        if e.is_integer() {
            if let Some(k) = e.numer().to_i64() {
                return self.powi(k);
            }
        }
        Real(self.0.powf(&Real::from_rat(e).0))
    }

    /// `p^e` for rational `e`.
    pub fn prime_pow(p: u32, e: &Rat) -> Real {
        Real::from_i64(p as i64).pow_rat(e)
    }

    pub fn max(&self, o: &Real) -> Real {
        if self.0 >= o.0 {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn total_cmp(&self, o: &Real) -> Ordering {
        self.0.cmp(&o.0)
    }
}

impl std::fmt::Debug for Real {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Real({:e})", self.to_f64())
    }
}

impl std::fmt::Display for Real {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.*e}", 17, self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn rational_conversion_is_faithful() {
        let r = Real::from_rat(&rat(1, 3));
        let three = Real::from_i64(3);
        let back = r.mul(&three).sub(&Real::one()).abs();
        assert!(back.to_f64() < 1e-45);
    }

    #[test]
    fn integer_powers() {
        let two = Real::from_i64(2);
        assert_eq!(two.powi(10).to_f64(), 1024.0);
        assert_eq!(two.powi(-3).to_f64(), 0.125);
    }

    #[test]
    fn rational_powers() {
        let v = Real::prime_pow(2, &rat(1, 2));
        assert!((v.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let w = Real::prime_pow(3, &rat(-3, 2));
        assert!((w.to_f64() - 3f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn ordering() {
        let a = Real::from_rat(&rat(1, 3));
        let b = Real::from_rat(&rat(1, 2));
        assert!(a < b);
        assert_eq!(a.max(&b).to_f64(), b.to_f64());
        assert!(a.sub(&b).is_negative());
    }
}
