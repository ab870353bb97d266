//! Exact rational arithmetic helpers.
//!
//! Norm exponents, shell measures and sharp-constant formulas are all rational
//! in `p`, so everything downstream funnels through [`Rat`].

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rat = BigRational;

/// `k` as a rational.
pub fn rat_i64(k: i64) -> Rat {
    Rat::from_integer(BigInt::from(k))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

pub fn rat_is_zero(r: &Rat) -> bool {
    r.is_zero()
}

pub fn rat_is_neg(r: &Rat) -> bool {
    r.is_negative()
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

/// Smallest integer `>= r`.
pub fn rat_ceil_i64(r: &Rat) -> i64 {
    r.ceil().numer().to_i64().expect("ceil fits i64")
}

/// `num/den` as a rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// `p^k` as an exact rational, for any sign of `k`.
pub fn ppow(p: u32, k: i64) -> Rat {
    let base = BigInt::from(p);
    if k >= 0 {
        Rat::from_integer(base.pow(k as u32))
    } else {
        Rat::new(BigInt::one(), base.pow((-k) as u32))
    }
}

/// Binomial coefficient as an `i64`; callers keep `n` small.
pub fn binom_i64(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc as i64
}

/// `r` as `i64` when it is an integer in range.
pub fn rat_to_i64(r: &Rat) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

/// Nearest `f64` to `r`.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exponent of `p` in the nonzero integer `n`.
fn int_valuation(p: u32, n: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0i64;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// p-adic valuation of a nonzero rational; `None` for zero.
pub fn rat_valuation(p: u32, r: &Rat) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    Some(int_valuation(p, r.numer()) - int_valuation(p, r.denom()))
}

/// `|r|_p = p^{-v_p(r)}`, with `|0|_p = 0`.
pub fn rat_padic_norm(p: u32, r: &Rat) -> Rat {
    match rat_valuation(p, r) {
        None => Rat::zero(),
        Some(v) => ppow(p, -v),
    }
}

/// Formats as `num/den`, denominator always written.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"3"`, `"-1/2"` or `"0.25"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = |reason: &str| Error::Parse {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let (sign, int) = match int.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, int),
        };
        let int = if int.is_empty() { "0" } else { int };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad decimal"));
        }
        let i: BigInt = int.parse().map_err(|_| bad("bad decimal"))?;
        let f: BigInt = frac.parse().map_err(|_| bad("bad decimal"))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rat::new((i * &scale + f) * BigInt::from(sign), scale));
    }
    let n: BigInt = t.parse().map_err(|_| bad("not a rational"))?;
    Ok(Rat::from_integer(n))
}

/// Deterministic trial-division primality test for moduli that fit practice.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for d in [2u64, 3, 5] {
        if n == d {
            return true;
        }
        if n % d == 0 {
            return false;
        }
    }
    let mut d = 7u64;
    while d * d <= n {
        for off in [0, 4] {
            if n % (d + off) == 0 {
                return false;
            }
        }
        d += 6;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(ppow(2, 3), rat_i64(8));
        assert_eq!(ppow(3, -2), rat(1, 9));
        assert_eq!(ppow(5, 0), rat_i64(1));
    }

    #[test]
    fn valuations() {
        assert_eq!(rat_valuation(2, &rat(12, 1)), Some(2));
        assert_eq!(rat_valuation(2, &rat(3, 8)), Some(-3));
        assert_eq!(rat_valuation(3, &rat(-9, 2)), Some(2));
        assert_eq!(rat_valuation(2, &Rat::zero()), None);
        assert_eq!(rat_padic_norm(2, &rat(3, 8)), rat_i64(8));
        assert_eq!(rat_padic_norm(7, &Rat::zero()), Rat::zero());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3").unwrap(), rat_i64(3));
        assert_eq!(parse_rat("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-2.5").unwrap(), rat(-5, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn format_round_trip() {
        for r in [rat(3, 4), rat(-7, 2), rat_i64(5), Rat::zero()] {
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(!is_prime(1));
        assert!(!is_prime(9));
        assert!(is_prime(7919));
        assert!(!is_prime(7921));
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_i64(5, 2), 10);
        assert_eq!(binom_i64(10, 0), 1);
        assert_eq!(binom_i64(4, 7), 0);
        assert_eq!(binom_i64(30, 15), 155_117_520);
    }
}
