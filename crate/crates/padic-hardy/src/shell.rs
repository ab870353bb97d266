//! Radial shell functions.
//!
//! A radial function on the n-dimensional space is constant on each sphere
//! `S_k` of radius `p^k`, so it is a doubly infinite coefficient sequence.
//! We store an explicit window of coefficients `[window_start, window_end)`
//! plus closed-form tails on both sides. Each tail is a finite sum of terms
//! `c * k^degree * p^(k*exponent)`, which is closed under the averaging
//! operators in this crate: geometric partial sums stay in the class, and
//! the borderline exponents promote the polynomial degree by one instead of
//! leaving it.
//!
//! Coefficients are generic over [`Coeff`], instantiated by exact rationals
//! ([`Rat`]) and fixed-precision reals ([`Real`]). Exponents are always
//! exact rationals; an exact carrier that cannot represent `p^e` reports
//! failure rather than rounding.

use crate::error::{Error, Result};
use crate::rational::{is_prime, rat_i64, rat_is_zero, rat_to_i64, rat_zero, Rat};
use crate::real::Real;
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Shared arithmetic interface for shell coefficients.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    /// Whether this carrier is exact (no rounding anywhere).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn from_i64(k: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn cmp_total(&self, o: &Self) -> Ordering;
    /// `p^e`; `None` when the carrier cannot represent it.
    fn prime_pow(p: u32, e: &Rat) -> Option<Self>;
    /// `self^e` for a nonnegative base; `None` when not representable.
    fn pow_rat(&self, e: &Rat) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn is_nonneg(&self) -> bool {
        !self.is_negative()
    }

    /// `self^k` for a small nonnegative integer exponent.
    fn powu(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Coeff for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        rat_zero()
    }

    fn one() -> Self {
        rat_i64(1)
    }

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn from_i64(k: i64) -> Self {
        rat_i64(k)
    }

    fn is_zero(&self) -> bool {
        rat_is_zero(self)
    }

    fn is_negative(&self) -> bool {
        crate::rational::rat_is_neg(self)
    }

    fn add(&self, o: &Self) -> Self {
        self + o
    }

    fn sub(&self, o: &Self) -> Self {
        self - o
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }

    fn div(&self, o: &Self) -> Self {
        self / o
    }

    fn neg(&self) -> Self {
        -self
    }

    fn abs(&self) -> Self {
        crate::rational::rat_abs(self)
    }

    fn cmp_total(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }

    fn prime_pow(p: u32, e: &Rat) -> Option<Self> {
        let k = rat_to_i64(e)?;
        Some(crate::rational::ppow(p, k))
    }

    fn pow_rat(&self, e: &Rat) -> Option<Self> {
        let k = rat_to_i64(e)?;
        if rat_is_zero(self) {
            return if k > 0 {
                Some(rat_zero())
            } else if k == 0 {
                Some(rat_i64(1))
            } else {
                None
            };
        }
        let k32 = i32::try_from(k).ok()?;
        Some(num_traits::Pow::pow(self, k32))
    }

    fn to_f64(&self) -> f64 {
        crate::rational::rat_to_f64(self)
    }
}

impl Coeff for Real {
    const EXACT: bool = false;

    fn zero() -> Self {
        Real::zero()
    }

    fn one() -> Self {
        Real::one()
    }

    fn from_rat(r: &Rat) -> Self {
        Real::from_rat(r)
    }

    fn from_i64(k: i64) -> Self {
        Real::from_i64(k)
    }

    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }

    fn is_negative(&self) -> bool {
        Real::is_negative(self)
    }

    fn add(&self, o: &Self) -> Self {
        Real::add(self, o)
    }

    fn sub(&self, o: &Self) -> Self {
        Real::sub(self, o)
    }

    fn mul(&self, o: &Self) -> Self {
        Real::mul(self, o)
    }

    fn div(&self, o: &Self) -> Self {
        Real::div(self, o)
    }

    fn neg(&self) -> Self {
        Real::neg(self)
    }

    fn abs(&self) -> Self {
        Real::abs(self)
    }

    fn cmp_total(&self, o: &Self) -> Ordering {
        Real::total_cmp(self, o)
    }

    fn prime_pow(p: u32, e: &Rat) -> Option<Self> {
        Some(Real::prime_pow(p, e))
    }

    fn pow_rat(&self, e: &Rat) -> Option<Self> {
        if Real::is_zero(self) {
            return if e > &rat_zero() {
                Some(Real::zero())
            } else if rat_is_zero(e) {
                Some(Real::one())
            } else {
                None
            };
        }
        Some(Real::pow_rat(self, e))
    }

    fn to_f64(&self) -> f64 {
        Real::to_f64(self)
    }
}

/// One tail summand `coeff * k^degree * p^(k*exponent)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTerm<T> {
    pub coeff: T,
    pub exponent: Rat,
    pub degree: u32,
}

/// Closed-form one-sided tail: a finite sum of [`PowerTerm`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct Tail<T> {
    terms: Vec<PowerTerm<T>>,
}

/// Cap on distinct `(exponent, degree)` pairs per tail.
pub const MAX_TAIL_TERMS: usize = 64;

impl<T: Coeff> Tail<T> {
    pub fn zero() -> Self {
        Tail { terms: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::from_terms(vec![PowerTerm {
            coeff: c,
            exponent: rat_zero(),
            degree: 0,
        }])
        .expect("single term")
    }

    pub fn power(c: T, exponent: Rat) -> Self {
        Self::from_terms(vec![PowerTerm {
            coeff: c,
            exponent,
            degree: 0,
        }])
        .expect("single term")
    }

    /// Merges duplicate `(exponent, degree)` keys and drops zero coefficients.
    pub fn from_terms(terms: Vec<PowerTerm<T>>) -> Result<Self> {
        let mut map: BTreeMap<(Rat, u32), T> = BTreeMap::new();
        for t in terms {
            if t.coeff.is_zero() {
                continue;
            }
            let key = (t.exponent.clone(), t.degree);
            match map.get_mut(&key) {
                Some(c) => *c = c.add(&t.coeff),
                None => {
                    map.insert(key, t.coeff);
                }
            }
        }
        let terms: Vec<PowerTerm<T>> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((exponent, degree), coeff)| PowerTerm {
                coeff,
                exponent,
                degree,
            })
            .collect();
        if terms.len() > MAX_TAIL_TERMS {
            return Err(Error::UnrepresentableTail(format!(
                "{} terms exceed the cap of {MAX_TAIL_TERMS}",
                terms.len()
            )));
        }
        Ok(Tail { terms })
    }

    pub fn terms(&self) -> &[PowerTerm<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when the tail is `Zero` or `Constant`.
    pub fn constant_value(&self) -> Option<T> {
        match self.terms.as_slice() {
            [] => Some(T::zero()),
            [t] if t.degree == 0 && rat_is_zero(&t.exponent) => Some(t.coeff.clone()),
            _ => None,
        }
    }

    /// Evaluates at shell index `k`.
    pub fn value_at(&self, p: u32, k: i64) -> Result<T> {
        let mut acc = T::zero();
        for t in &self.terms {
            let e = &t.exponent * rat_i64(k);
            let pw = T::prime_pow(p, &e).ok_or_else(|| {
                Error::ExactUnavailable(format!("p^({k}*{})", t.exponent))
            })?;
            let kd = T::from_i64(k).powu(t.degree);
            acc = acc.add(&t.coeff.mul(&kd).mul(&pw));
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &T) -> Self {
        Tail {
            terms: self
                .terms
                .iter()
                .filter(|t| !c.mul(&t.coeff).is_zero())
                .map(|t| PowerTerm {
                    coeff: c.mul(&t.coeff),
                    exponent: t.exponent.clone(),
                    degree: t.degree,
                })
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&T::one().neg())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self::from_terms(terms)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                terms.push(PowerTerm {
                    coeff: a.coeff.mul(&b.coeff),
                    exponent: &a.exponent + &b.exponent,
                    degree: a.degree + b.degree,
                });
            }
        }
        Self::from_terms(terms)
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Tail<U> {
        Tail {
            terms: self
                .terms
                .iter()
                .map(|t| PowerTerm {
                    coeff: f(&t.coeff),
                    exponent: t.exponent.clone(),
                    degree: t.degree,
                })
                .collect(),
        }
    }
}

/// Radial function determined by shell coefficients: explicit on a window,
/// closed-form on both tails.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialShellFunction<T> {
    prime: u32,
    dim: u32,
    window_start: i64,
    coeffs: Vec<T>,
    inner: Tail<T>,
    outer: Tail<T>,
}

/// Widest window a pointwise combination may materialize.
pub const MAX_WINDOW: usize = 1 << 16;

impl<T: Coeff> RadialShellFunction<T> {
    pub fn new(
        prime: u32,
        dim: u32,
        window_start: i64,
        coeffs: Vec<T>,
        inner: Tail<T>,
        outer: Tail<T>,
    ) -> Result<Self> {
        if !is_prime(prime as u64) {
            return Err(Error::NotPrime(prime as u64));
        }
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if coeffs.len() > MAX_WINDOW {
            return Err(Error::UnrepresentableTail(format!(
                "window of {} shells exceeds the cap of {MAX_WINDOW}",
                coeffs.len()
            )));
        }
        Ok(RadialShellFunction {
            prime,
            dim,
            window_start,
            coeffs,
            inner,
            outer,
        })
    }

    pub fn zero(prime: u32, dim: u32) -> Result<Self> {
        Self::new(prime, dim, 0, Vec::new(), Tail::zero(), Tail::zero())
    }

    /// Indicator of the sphere `S_k` of radius `p^k` about the origin.
    pub fn sphere_indicator(prime: u32, dim: u32, k: i64) -> Result<Self> {
        Self::new(prime, dim, k, vec![T::one()], Tail::zero(), Tail::zero())
    }

    /// Indicator of the ball of radius `p^gamma` about the origin.
    pub fn ball_indicator(prime: u32, dim: u32, gamma: i64) -> Result<Self> {
        Self::new(
            prime,
            dim,
            gamma + 1,
            Vec::new(),
            Tail::constant(T::one()),
            Tail::zero(),
        )
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// First shell index of the explicit window (also where the inner tail
    /// stops applying, even when the window is empty).
    pub fn window_start(&self) -> i64 {
        self.window_start
    }

    /// One past the last explicit shell index; the outer tail applies from
    /// here on.
    pub fn window_end(&self) -> i64 {
        self.window_start + self.coeffs.len() as i64
    }

    pub fn window_coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn inner_tail(&self) -> &Tail<T> {
        &self.inner
    }

    pub fn outer_tail(&self) -> &Tail<T> {
        &self.outer
    }

    /// Coefficient on shell `k`.
    pub fn value_at(&self, k: i64) -> Result<T> {
        if k < self.window_start {
            self.inner.value_at(self.prime, k)
        } else if k >= self.window_end() {
            self.outer.value_at(self.prime, k)
        } else {
            Ok(self.coeffs[(k - self.window_start) as usize].clone())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero()) && self.inner.is_zero() && self.outer.is_zero()
    }

    /// True when every stored coefficient is nonnegative. For tails this
    /// checks term coefficients, which is sufficient for the constant and
    /// single-power tails used as operator inputs.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_nonneg())
            && self.inner.terms().iter().all(|t| t.coeff.is_nonneg())
            && self.outer.terms().iter().all(|t| t.coeff.is_nonneg())
    }

    pub fn scale(&self, c: &T) -> Self {
        RadialShellFunction {
            prime: self.prime,
            dim: self.dim,
            window_start: self.window_start,
            coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(),
            inner: self.inner.scale(c),
            outer: self.outer.scale(c),
        }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> RadialShellFunction<U> {
        RadialShellFunction {
            prime: self.prime,
            dim: self.dim,
            window_start: self.window_start,
            coeffs: self.coeffs.iter().map(&f).collect(),
            inner: self.inner.map(&f),
            outer: self.outer.map(&f),
        }
    }

    fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.prime != o.prime {
            return Err(Error::PrimeMismatch(self.prime, o.prime));
        }
        if self.dim != o.dim {
            return Err(Error::DimensionMismatch(self.dim, o.dim));
        }
        Ok(())
    }

    fn combine(&self, o: &Self, op: impl Fn(&T, &T) -> T, tails: impl Fn(&Tail<T>, &Tail<T>) -> Result<Tail<T>>) -> Result<Self> {
        self.check_compatible(o)?;
        let inner = tails(&self.inner, &o.inner)?;
        let outer = tails(&self.outer, &o.outer)?;
        let start = self.window_start.min(o.window_start);
        let end = self.window_end().max(o.window_end());
        if start == end {
            // both windows empty at the same boundary
            return Self::new(self.prime, self.dim, start, Vec::new(), inner, outer);
        }
        let width = end - start;
        if width < 0 || width as usize > MAX_WINDOW {
            return Err(Error::UnrepresentableTail(format!(
                "combined window of {width} shells"
            )));
        }
        let mut coeffs = Vec::with_capacity(width as usize);
        for k in start..end {
            coeffs.push(op(&self.value_at(k)?, &o.value_at(k)?));
        }
        Self::new(self.prime, self.dim, start, coeffs, inner, outer)
    }

    /// Pointwise sum.
    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a.add(b), |x, y| x.add(y))
    }

    /// Pointwise difference.
    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&T::one().neg()))
    }

    /// Pointwise product.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a.mul(b), |x, y| x.mul(y))
    }

    /// Restriction to `[lo, hi]` with zero tails.
    pub fn truncate(&self, lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Self::zero(self.prime, self.dim);
        }
        let width = hi - lo + 1;
        if width as usize > MAX_WINDOW {
            return Err(Error::UnrepresentableTail(format!(
                "truncation window of {width} shells"
            )));
        }
        let mut coeffs = Vec::with_capacity(width as usize);
        for k in lo..=hi {
            coeffs.push(self.value_at(k)?);
        }
        Self::new(self.prime, self.dim, lo, coeffs, Tail::zero(), Tail::zero())
    }
}

impl RadialShellFunction<Rat> {
    /// Exact function lifted to the fixed-precision carrier.
    pub fn to_real(&self) -> RadialShellFunction<Real> {
        self.map(Real::from_rat)
    }
}

/// Parameters of the near-extremal family for the averaging operators: unit
/// coefficient on shell zero, then a decaying power tail whose exponent sits
/// `eps` below the critical decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremizerSpec {
    pub prime: u32,
    pub dim: u32,
    pub q: Rat,
    pub alpha: Rat,
    pub eps: Rat,
}

/// Builds the near-extremal function `f(k) = p^(k*s)` for `k >= 0` (zero
/// below), where `s = -(alpha + n)/q - eps`.
pub fn make_extremizer<T: Coeff>(spec: &ExtremizerSpec) -> Result<RadialShellFunction<T>> {
    let n = rat_i64(spec.dim as i64);
    let one = rat_i64(1);
    if spec.q <= one {
        return Err(Error::InadmissibleParameters(format!(
            "q = {} must exceed 1",
            spec.q
        )));
    }
    if spec.eps <= rat_zero() {
        return Err(Error::InadmissibleParameters(format!(
            "eps = {} must be positive",
            spec.eps
        )));
    }
    if spec.alpha >= n.clone() * (&spec.q - &one) {
        return Err(Error::InadmissibleParameters(format!(
            "alpha = {} reaches the critical index n(q-1)",
            spec.alpha
        )));
    }
    let s = -(&spec.alpha + &n) / &spec.q - &spec.eps;
    RadialShellFunction::new(
        spec.prime,
        spec.dim,
        0,
        vec![T::one()],
        Tail::zero(),
        Tail::power(T::one(), s),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    type ShellQ = RadialShellFunction<Rat>;

    fn sphere(k: i64) -> ShellQ {
        ShellQ::sphere_indicator(2, 1, k).unwrap()
    }

    #[test]
    fn indicator_values() {
        let b = ShellQ::ball_indicator(2, 1, 0).unwrap();
        assert_eq!(b.value_at(-5).unwrap(), rat_i64(1));
        assert_eq!(b.value_at(0).unwrap(), rat_i64(1));
        assert_eq!(b.value_at(1).unwrap(), rat_zero());
        let s = sphere(2);
        assert_eq!(s.value_at(2).unwrap(), rat_i64(1));
        assert_eq!(s.value_at(1).unwrap(), rat_zero());
        assert_eq!(s.value_at(3).unwrap(), rat_zero());
    }

    #[test]
    fn tail_evaluation() {
        let t: Tail<Rat> = Tail::from_terms(vec![
            PowerTerm {
                coeff: rat_i64(3),
                exponent: rat_i64(-1),
                degree: 0,
            },
            PowerTerm {
                coeff: rat(1, 2),
                exponent: rat_zero(),
                degree: 1,
            },
        ])
        .unwrap();
        // 3 * 2^{-k} + k/2 at k = 3
        assert_eq!(t.value_at(2, 3).unwrap(), rat(3, 8) + rat(3, 2));
    }

    #[test]
    fn tail_merge_cancels() {
        let t: Tail<Rat> = Tail::from_terms(vec![
            PowerTerm {
                coeff: rat_i64(1),
                exponent: rat(1, 2),
                degree: 0,
            },
            PowerTerm {
                coeff: rat_i64(-1),
                exponent: rat(1, 2),
                degree: 0,
            },
        ])
        .unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn exact_carrier_refuses_fractional_powers() {
        let t: Tail<Rat> = Tail::power(rat_i64(1), rat(1, 2));
        assert!(t.value_at(2, 3).is_err());
        assert!(t.value_at(2, 4).is_ok());
    }

    #[test]
    fn combine_misaligned_windows() {
        let b = ShellQ::ball_indicator(2, 1, -2).unwrap(); // window start -1
        let s = sphere(1);
        let sum = b.add(&s).unwrap();
        assert_eq!(sum.window_start(), -1);
        assert_eq!(sum.window_end(), 2);
        assert_eq!(sum.value_at(-3).unwrap(), rat_i64(1)); // inner constant
        assert_eq!(sum.value_at(-1).unwrap(), rat_zero());
        assert_eq!(sum.value_at(1).unwrap(), rat_i64(1));
        assert_eq!(sum.value_at(5).unwrap(), rat_zero());
        let prod = b.mul(&s).unwrap();
        assert!(prod.is_zero() || (-3..4).all(|k| prod.value_at(k).unwrap().is_zero()));
    }

    #[test]
    fn sub_cancels_exactly() {
        let s = sphere(3);
        let d = s.sub(&s).unwrap();
        for k in -2..6 {
            assert!(d.value_at(k).unwrap().is_zero());
        }
        assert!(d.inner_tail().is_zero() && d.outer_tail().is_zero());
    }

    #[test]
    fn extremizer_shape() {
        let spec = ExtremizerSpec {
            prime: 2,
            dim: 1,
            q: rat_i64(2),
            alpha: rat_zero(),
            eps: rat(1, 2),
        };
        let f: RadialShellFunction<Rat> = make_extremizer(&spec).unwrap();
        // s = -1/2 - 1/2 = -1
        assert_eq!(f.value_at(0).unwrap(), rat_i64(1));
        assert_eq!(f.value_at(3).unwrap(), rat(1, 8));
        assert_eq!(f.value_at(-1).unwrap(), rat_zero());
        // boundary alpha is rejected
        let bad = ExtremizerSpec {
            alpha: rat_i64(1),
            ..spec
        };
        assert!(matches!(
            make_extremizer::<Rat>(&bad),
            Err(Error::InadmissibleParameters(_))
        ));
    }

    #[test]
    fn real_lift_matches() {
        let f = sphere(0).add(&ShellQ::ball_indicator(2, 1, -1).unwrap()).unwrap();
        let g = f.to_real();
        for k in -4..4 {
            let exact = f.value_at(k).unwrap().to_f64();
            let lifted = g.value_at(k).unwrap().to_f64();
            assert!((exact - lifted).abs() < 1e-14);
        }
    }
}
