//! Canonical p-adic scalars.
//!
//! A nonzero scalar is `p^valuation * (d0 + d1*p + d2*p^2 + ...)` with
//! `d0 != 0`. `digits` lists the stored coefficients; `known` says how many
//! digit positions starting at `valuation` are determined. Exact scalars have
//! every unlisted digit equal to zero. Truncated scalars know nothing past
//! their window, and an operation that cannot pin the leading digit of its
//! result fails with [`Error::InsufficientPrecision`] instead of guessing.
//! The empty digit string is exactly zero; there is no approximate zero.

use crate::error::{Error, Result};
use crate::rational::{is_prime, ppow, Rat};
use num_bigint::BigInt;
use num_traits::Zero;

/// Digit window used by [`PAdicScalar::truncated`] when no length is given.
pub const DEFAULT_KNOWN_DIGITS: usize = 64;

const EXACT: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicScalar {
    prime: u32,
    valuation: i64,
    digits: Vec<u32>,
    known: usize,
}

fn check_prime(p: u32) -> Result<()> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(Error::NotPrime(p as u64))
    }
}

impl PAdicScalar {
    pub fn zero(prime: u32) -> Result<Self> {
        check_prime(prime)?;
        Ok(PAdicScalar {
            prime,
            valuation: 0,
            digits: Vec::new(),
            known: EXACT,
        })
    }

    /// Builds `p^valuation * (digits[0] + digits[1] p + ...)`.
    ///
    /// `known = None` marks the scalar exact: the listed digits are the whole
    /// expansion. `known = Some(w)` keeps only the first `w` digit positions.
    /// Leading zero digits shift the valuation; a window that contains only
    /// zeros is unresolvable.
    pub fn from_digits(
        prime: u32,
        valuation: i64,
        digits: &[u32],
        known: Option<usize>,
    ) -> Result<Self> {
        check_prime(prime)?;
        for &d in digits {
            if d >= prime {
                return Err(Error::DigitOutOfRange { digit: d, prime });
            }
        }
        let known = known.unwrap_or(EXACT);
        if known == 0 {
            return Err(Error::InsufficientPrecision);
        }
        let mut digits: Vec<u32> = if known == EXACT {
            digits.to_vec()
        } else {
            digits.iter().copied().take(known).collect()
        };
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        if lead == digits.len() {
            return if known == EXACT {
                Self::zero(prime)
            } else {
                Err(Error::InsufficientPrecision)
            };
        }
        digits.drain(..lead);
        while digits.last() == Some(&0) {
            digits.pop();
        }
        let known = if known == EXACT { EXACT } else { known - lead };
        Ok(PAdicScalar {
            prime,
            valuation: valuation + lead as i64,
            digits,
            known,
        })
    }

    /// Exact scalar for a nonnegative integer.
    pub fn from_integer(prime: u32, value: u64) -> Result<Self> {
        check_prime(prime)?;
        if value == 0 {
            return Self::zero(prime);
        }
        let p = prime as u64;
        let mut v = value;
        let mut valuation = 0i64;
        while v % p == 0 {
            v /= p;
            valuation += 1;
        }
        let mut digits = Vec::new();
        while v > 0 {
            digits.push((v % p) as u32);
            v /= p;
        }
        Ok(PAdicScalar {
            prime,
            valuation,
            digits,
            known: EXACT,
        })
    }

    /// Forgets digits past a window of `known` positions.
    pub fn truncated(&self, known: Option<usize>) -> Result<Self> {
        let w = known.unwrap_or(DEFAULT_KNOWN_DIGITS);
        if self.is_zero() {
            return Err(Error::InsufficientPrecision);
        }
        Self::from_digits(self.prime, self.valuation, &self.digits, Some(w))
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.known == EXACT
    }

    /// `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.valuation)
        }
    }

    /// Number of determined digit positions; `None` for exact scalars.
    pub fn known_digits(&self) -> Option<usize> {
        if self.known == EXACT {
            None
        } else {
            Some(self.known)
        }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `|x|_p = p^{-valuation}` as an exact rational; zero for zero.
    pub fn norm(&self) -> Rat {
        match self.valuation() {
            None => Rat::zero(),
            Some(v) => ppow(self.prime, -v),
        }
    }

    /// The represented rational, for exact scalars only.
    pub fn to_rational(&self) -> Option<Rat> {
        if !self.is_exact() {
            return None;
        }
        let mut unit = BigInt::zero();
        for &d in self.digits.iter().rev() {
            unit = unit * BigInt::from(self.prime) + BigInt::from(d);
        }
        Some(Rat::from_integer(unit) * ppow(self.prime, self.valuation))
    }

    fn digit_at(&self, offset: usize) -> u32 {
        self.digits.get(offset).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let v = self.valuation.min(other.valuation);
        let off = [
            (self.valuation - v) as usize,
            (other.valuation - v) as usize,
        ];
        let exact = self.is_exact() && other.is_exact();
        let window = if exact {
            (off[0] + self.digits.len()).max(off[1] + other.digits.len()) + 1
        } else {
            // known windows are anchored at each operand's valuation
            let mut w = usize::MAX;
            for (s, o) in [(self, off[0]), (other, off[1])] {
                if !s.is_exact() {
                    w = w.min(o + s.known);
                }
            }
            w
        };
        let p = self.prime;
        let mut digits = Vec::with_capacity(window);
        let mut carry = 0u32;
        for i in 0..window {
            let a = if i >= off[0] { self.digit_at(i - off[0]) } else { 0 };
            let b = if i >= off[1] { other.digit_at(i - off[1]) } else { 0 };
            let s = a + b + carry;
            digits.push(s % p);
            carry = s / p;
        }
        // carry out of a truncated window is unknowable territory; drop it
        Self::from_digits(p, v, &digits, if exact { None } else { Some(window) })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.prime);
        }
        let v = self.valuation + other.valuation;
        let exact = self.is_exact() && other.is_exact();
        let window = if exact {
            self.digits.len() + other.digits.len() + 1
        } else {
            let mut w = usize::MAX;
            for s in [self, other] {
                if !s.is_exact() {
                    w = w.min(s.known);
                }
            }
            w
        };
        let p = self.prime as u64;
        let mut acc = vec![0u64; window];
        for (i, &a) in self.digits.iter().enumerate() {
            if i >= window {
                break;
            }
            for (j, &b) in other.digits.iter().enumerate() {
                if i + j >= window {
                    break;
                }
                acc[i + j] += a as u64 * b as u64;
            }
        }
        let mut digits = Vec::with_capacity(window);
        let mut carry = 0u64;
        for a in acc {
            let s = a + carry;
            digits.push((s % p) as u32);
            carry = s / p;
        }
        // unit times unit keeps d0 nonzero: the valuation is exactly v
        debug_assert!(digits[0] != 0);
        Self::from_digits(
            self.prime,
            v,
            &digits,
            if exact { None } else { Some(window) },
        )
    }

    /// `p^gamma * (d0 + d1*p + d2*p^2 + ...)` with the prime written out.
    pub fn to_verbose(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let p = self.prime;
        let terms: Vec<String> = self
            .digits
            .iter()
            .enumerate()
            .map(|(i, d)| match i {
                0 => format!("{d}"),
                1 => format!("{d}*{p}"),
                _ => format!("{d}*{p}^{i}"),
            })
            .collect();
        format!("{}^{} * ({})", p, self.valuation, terms.join(" + "))
    }

    /// `valuation|digits`, digits written little-endian. Primes up to 36 use
    /// one character per digit (0-9a-z); larger primes separate decimal
    /// digits with dots.
    pub fn to_compact(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let body = if self.prime <= 36 {
            self.digits
                .iter()
                .map(|&d| char::from_digit(d, 36).unwrap())
                .collect::<String>()
        } else {
            self.digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        format!("{}|{}", self.valuation, body)
    }

    /// Parses the [`to_compact`](Self::to_compact) form; the result is exact.
    pub fn parse_compact(prime: u32, s: &str) -> Result<Self> {
        check_prime(prime)?;
        let bad = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        if t == "0" {
            return Self::zero(prime);
        }
        let (v, body) = t.split_once('|').ok_or_else(|| bad("missing '|'"))?;
        let valuation: i64 = v.parse().map_err(|_| bad("bad valuation"))?;
        let digits: Vec<u32> = if body.contains('.') {
            body.split('.')
                .map(|d| d.parse().map_err(|_| bad("bad digit")))
                .collect::<Result<_>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(36).ok_or_else(|| bad("bad digit")))
                .collect::<Result<_>>()?
        };
        Self::from_digits(prime, valuation, &digits, None)
    }

    /// Parses the [`to_verbose`](Self::to_verbose) form; the result is exact.
    pub fn parse_verbose(prime: u32, s: &str) -> Result<Self> {
        check_prime(prime)?;
        let bad = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        if t == "0" {
            return Self::zero(prime);
        }
        let (head, rest) = t.split_once('*').ok_or_else(|| bad("missing '*'"))?;
        let (base, gamma) = head.trim().split_once('^').ok_or_else(|| bad("missing '^'"))?;
        let base: u32 = base.trim().parse().map_err(|_| bad("bad base"))?;
        if base != prime {
            return Err(Error::PrimeMismatch(prime, base));
        }
        let valuation: i64 = gamma.trim().parse().map_err(|_| bad("bad exponent"))?;
        let rest = rest.trim();
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad("missing parentheses"))?;
        let mut digits = Vec::new();
        for (i, term) in inner.split('+').enumerate() {
            let term = term.trim();
            let digit_str = match term.split_once('*') {
                None => term,
                Some((d, pow)) => {
                    let pow = pow.trim();
                    let expect = if i == 1 {
                        format!("{prime}")
                    } else {
                        format!("{prime}^{i}")
                    };
                    if pow != expect {
                        return Err(bad("power out of sequence"));
                    }
                    d.trim()
                }
            };
            if i > 0 && !term.contains('*') {
                return Err(bad("missing power"));
            }
            let d: u32 = digit_str.parse().map_err(|_| bad("bad digit"))?;
            digits.push(d);
        }
        Self::from_digits(prime, valuation, &digits, None)
    }
}

impl std::fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_compact())
    }
}
