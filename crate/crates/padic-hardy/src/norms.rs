//! Norms of radial shell functions, evaluated in closed form.
//!
//! Every norm here reduces to one pattern: an explicit window sum plus, on
//! each side, a series `sum_{t>=0} |v(t)|^q * W * z^t` where
//! `v(t) = sum_i c_i t^{d_i} u_i^t` collects the reindexed tail terms.
//! Convergence is decided exactly on the rational exponents. Values come
//! from a multinomial expansion into geometric-polynomial sums when `q` is a
//! small integer and the sign of `v` has been certified, and otherwise from
//! truncation with a proven geometric remainder bound (inexact carrier
//! only). An exact carrier that cannot reach a closed form reports
//! [`Error::ExactUnavailable`] instead of approximating.

use crate::error::{Error, Result};
use crate::rational::{
    ppow, rat_ceil_i64, rat_i64, rat_is_zero, rat_to_f64, rat_to_i64, rat_zero, Rat,
};
use crate::real::Real;
use crate::shell::{Coeff, PowerTerm, RadialShellFunction};

/// `1 - p^{-n}`: the measure of the unit sphere.
pub fn measure_factor(p: u32, n: u32) -> Rat {
    rat_i64(1) - ppow(p, -(n as i64))
}

fn exact_unavailable(what: impl std::fmt::Display) -> Error {
    Error::ExactUnavailable(format!("{what} is not representable in the exact carrier"))
}

/// `p^e` in the carrier, or an error for carriers that cannot hold it.
pub(crate) fn req_pow<T: Coeff>(p: u32, e: &Rat) -> Result<T> {
    T::prime_pow(p, e).ok_or_else(|| exact_unavailable(format!("{p}^({e})")))
}

/// `|v|^q` in the carrier.
pub(crate) fn abs_qpow<T: Coeff>(v: &T, q: &Rat) -> Result<T> {
    v.abs()
        .pow_rat(q)
        .ok_or_else(|| exact_unavailable(format!("|.|^({q})")))
}

/// Binomial coefficient built inside the carrier (exact for rationals).
fn binom_t<T: Coeff>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 1..=k {
        acc = acc.mul(&T::from_i64((n - k + i) as i64)).div(&T::from_i64(i as i64));
    }
    acc
}

// ---------------------------------------------------------------------------
// Polynomial machinery. A polynomial is a coefficient vector, index = power.
// ---------------------------------------------------------------------------

pub(crate) fn poly_eval<T: Coeff>(poly: &[T], m: i64) -> T {
    let mv = T::from_i64(m);
    let mut acc = T::zero();
    for c in poly.iter().rev() {
        acc = acc.mul(&mv).add(c);
    }
    acc
}

/// `q(m) -> q(m + delta)` by binomial expansion.
pub(crate) fn poly_shift<T: Coeff>(poly: &[T], delta: i64) -> Vec<T> {
    let mut out = vec![T::zero(); poly.len()];
    let dv = T::from_i64(delta);
    for (j, c) in poly.iter().enumerate() {
        let mut pw = T::one();
        for i in (0..=j).rev() {
            let b = binom_t::<T>(j as u32, i as u32);
            out[i] = out[i].add(&c.mul(&b).mul(&pw));
            if i > 0 {
                pw = pw.mul(&dv);
            }
        }
    }
    out
}

/// Particular polynomial solution of `Q(m) - y*Q(m-1) = m^d`, `y != 1`.
///
/// With `x = 1/y`, `G(m) = Q(m) x^m` satisfies `G(m) - G(m-1) = m^d x^m`, so
/// `Q` turns running sums of `k^d x^k` from below into closed form.
pub(crate) fn cum_particular<T: Coeff>(y: &T, d: u32) -> Vec<T> {
    let d = d as usize;
    let mut a = vec![T::zero(); d + 1];
    let denom = T::one().sub(y);
    debug_assert!(!denom.is_zero());
    for i in (0..=d).rev() {
        let mut s = if i == d { T::one() } else { T::zero() };
        for j in (i + 1)..=d {
            let mut b = binom_t::<T>(j as u32, i as u32);
            if (j - i) % 2 == 1 {
                b = b.neg();
            }
            s = s.add(&y.mul(&b).mul(&a[j]));
        }
        a[i] = s.div(&denom);
    }
    a
}

/// Particular polynomial solution of `Q(m) - x*Q(m+1) = m^d`, `x != 1`.
///
/// `G(m) = Q(m) x^m` satisfies `G(m) - G(m+1) = m^d x^m`, so `Q` turns
/// running sums of `k^d x^k` from above into closed form; for `x < 1` the
/// whole series `sum_{k>=m}` equals `Q(m) x^m`.
pub(crate) fn cosum_particular<T: Coeff>(x: &T, d: u32) -> Vec<T> {
    let d = d as usize;
    let mut a = vec![T::zero(); d + 1];
    let denom = T::one().sub(x);
    debug_assert!(!denom.is_zero());
    for i in (0..=d).rev() {
        let mut s = if i == d { T::one() } else { T::zero() };
        for j in (i + 1)..=d {
            let b = binom_t::<T>(j as u32, i as u32);
            s = s.add(&x.mul(&b).mul(&a[j]));
        }
        a[i] = s.div(&denom);
    }
    a
}

/// Polynomial `F_d` with `F_d(m) - F_d(m-1) = m^d` and `F_d(0) = 0^d`,
/// so `sum_{k=a}^{m} k^d = F_d(m) - F_d(a-1)` for all integers.
pub(crate) fn faulhaber<T: Coeff>(d: u32) -> Vec<T> {
    let mut fs: Vec<Vec<T>> = Vec::new();
    for dd in 0..=d {
        let deg = dd as usize + 1;
        let mut poly: Vec<T> = (0..=deg)
            .map(|i| binom_t::<T>(deg as u32, i as u32))
            .collect();
        for (i_prev, f) in fs.iter().enumerate() {
            let b = binom_t::<T>(deg as u32, i_prev as u32);
            for (idx, c) in f.iter().enumerate() {
                poly[idx] = poly[idx].sub(&b.mul(c));
            }
        }
        let den = T::from_i64(deg as i64);
        for c in poly.iter_mut() {
            *c = c.div(&den);
        }
        fs.push(poly);
    }
    fs.pop().expect("at least one row")
}

// ---------------------------------------------------------------------------
// One-sided series over a tail.
// ---------------------------------------------------------------------------

/// Which side of the window a series runs over.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Side {
    /// Shells `k <= bound`, reindexed `k = bound - t`.
    Inner(i64),
    /// Shells `k >= bound`, reindexed `k = bound + t`.
    Outer(i64),
}

impl Side {
    fn bound(self) -> i64 {
        match self {
            Side::Inner(b) => b,
            Side::Outer(a) => a,
        }
    }
}

/// One reindexed summand `coeff * t^degree * p^(exp * t)` on `t >= 0`.
#[derive(Debug, Clone)]
struct SeriesPart<T> {
    coeff: T,
    degree: u32,
    exp: Rat,
}

fn reindex<T: Coeff>(p: u32, terms: &[&PowerTerm<T>], side: Side) -> Result<Vec<SeriesPart<T>>> {
    let b = side.bound();
    let flip = matches!(side, Side::Inner(_));
    let mut parts: Vec<SeriesPart<T>> = Vec::new();
    for term in terms {
        let base_exp = &term.exponent * rat_i64(b);
        let base = req_pow::<T>(p, &base_exp)?;
        let scaled = term.coeff.mul(&base);
        let bv = T::from_i64(b);
        let exp = if flip {
            -&term.exponent
        } else {
            term.exponent.clone()
        };
        for i in 0..=term.degree {
            let mut c = scaled
                .mul(&binom_t::<T>(term.degree, i))
                .mul(&bv.powu(term.degree - i));
            if flip && i % 2 == 1 {
                c = c.neg();
            }
            if c.is_zero() {
                continue;
            }
            match parts
                .iter_mut()
                .find(|q| q.degree == i && q.exp == exp)
            {
                Some(q) => q.coeff = q.coeff.add(&c),
                None => parts.push(SeriesPart {
                    coeff: c,
                    degree: i,
                    exp: exp.clone(),
                }),
            }
        }
    }
    parts.retain(|q| !q.coeff.is_zero());
    Ok(parts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CertifiedSign {
    NonNegative,
    NonPositive,
}

/// Proves a sign for `v(t) = sum_i c_i t^{d_i} p^{e_i t}` on all of `t >= 0`,
/// or gives up with `None`.
///
/// Strategy: the part with the lexicographically largest `(e, d)` dominates
/// for large `t`. Past an explicitly computed index, every other part's
/// ratio against the dominant one is decreasing; once their sum drops below
/// one the sign is locked. The finite prefix is checked term by term.
fn certify_sign<T: Coeff>(p: u32, parts: &[SeriesPart<T>]) -> Option<CertifiedSign> {
    if parts.is_empty() {
        return Some(CertifiedSign::NonNegative);
    }
    if parts.iter().all(|q| q.coeff.is_nonneg()) {
        return Some(CertifiedSign::NonNegative);
    }
    if parts.iter().all(|q| !q.coeff.is_nonneg() || q.coeff.is_zero()) {
        return Some(CertifiedSign::NonPositive);
    }
    let i0 = parts
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            a.exp
                .cmp(&b.exp)
                .then(a.degree.cmp(&b.degree))
        })
        .map(|(i, _)| i)?;
    let dom = &parts[i0];
    let ln_p = (p as f64).ln();
    let cap: i64 = if T::EXACT { 4096 } else { 65536 };
    let mut t_scan: i64 = 1;
    for (i, part) in parts.iter().enumerate() {
        if i == i0 || part.exp == dom.exp {
            continue;
        }
        let gap = rat_to_f64(&(&dom.exp - &part.exp)) * ln_p;
        let delta = part.degree as f64 - dom.degree as f64;
        if delta > 0.0 {
            t_scan = t_scan.max((delta / gap).ceil() as i64 + 2);
        }
    }
    if t_scan > cap {
        return None;
    }
    // grow t_scan until the competitors are jointly below the dominant part
    loop {
        let tv = T::from_i64(t_scan);
        let dom_val = dom
            .coeff
            .abs()
            .mul(&tv.powu(dom.degree))
            .mul(&T::prime_pow(p, &(&dom.exp * rat_i64(t_scan)))?);
        let mut rest = T::zero();
        for (i, part) in parts.iter().enumerate() {
            if i == i0 {
                continue;
            }
            let val = part
                .coeff
                .abs()
                .mul(&tv.powu(part.degree))
                .mul(&T::prime_pow(p, &(&part.exp * rat_i64(t_scan)))?);
            rest = rest.add(&val);
        }
        if rest.cmp_total(&dom_val) == std::cmp::Ordering::Less {
            break;
        }
        t_scan = t_scan.checked_mul(2)?;
        if t_scan > cap {
            return None;
        }
    }
    // explicit prefix scan
    let steps: Vec<T> = parts
        .iter()
        .map(|part| T::prime_pow(p, &part.exp))
        .collect::<Option<Vec<_>>>()?;
    let mut pows: Vec<T> = vec![T::one(); parts.len()];
    let want_nonneg = dom.coeff.is_nonneg();
    for t in 0..=t_scan {
        let tv = T::from_i64(t);
        let mut v = T::zero();
        for (part, pw) in parts.iter().zip(&pows) {
            v = v.add(&part.coeff.mul(&tv.powu(part.degree)).mul(pw));
        }
        if want_nonneg && v.is_negative() {
            return None;
        }
        if !want_nonneg && !(v.is_negative() || v.is_zero()) {
            return None;
        }
        if t < t_scan {
            for (pw, st) in pows.iter_mut().zip(&steps) {
                *pw = pw.mul(st);
            }
        }
    }
    Some(if want_nonneg {
        CertifiedSign::NonNegative
    } else {
        CertifiedSign::NonPositive
    })
}

fn for_each_composition(total: u32, slots: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(rem: u32, idx: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if idx + 1 == cur.capacity() {
            cur.push(rem);
            f(cur);
            cur.pop();
            return;
        }
        for j in 0..=rem {
            cur.push(j);
            rec(rem - j, idx + 1, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(slots);
    rec(total, 0, &mut cur, f);
}

/// `sum_{t>=0} |v(t)|^q * w * p^(z_exp * t)` with `v` given by `parts`.
fn series_qpow<T: Coeff>(
    p: u32,
    parts: &[SeriesPart<T>],
    q: &Rat,
    z_exp: &Rat,
    w: &T,
) -> Result<T> {
    if parts.is_empty() || w.is_zero() {
        return Ok(T::zero());
    }
    // single geometric part: closed form for every q
    if parts.len() == 1 && parts[0].degree == 0 {
        let c_q = abs_qpow(&parts[0].coeff, q)?;
        let x_exp = q * &parts[0].exp + z_exp;
        debug_assert!(x_exp < rat_zero());
        let x = req_pow::<T>(p, &x_exp)?;
        return Ok(c_q.mul(w).div(&T::one().sub(&x)));
    }
    let cert = certify_sign(p, parts);
    let q_int = rat_to_i64(q).filter(|&v| (1..=24).contains(&v));
    if let (Some(qi), Some(sign)) = (q_int, cert) {
        let count_ok = parts.len() <= 16 && {
            let c = crate::rational::binom_i64(
                qi as u32 + parts.len() as u32 - 1,
                parts.len() as u32 - 1,
            );
            (1..=20_000).contains(&c)
        };
        if count_ok {
            let flipped: Vec<SeriesPart<T>> = parts
                .iter()
                .map(|part| SeriesPart {
                    coeff: if sign == CertifiedSign::NonPositive {
                        part.coeff.neg()
                    } else {
                        part.coeff.clone()
                    },
                    degree: part.degree,
                    exp: part.exp.clone(),
                })
                .collect();
            let mut acc = T::zero();
            let mut failed: Option<Error> = None;
            for_each_composition(qi as u32, flipped.len(), &mut |js| {
                if failed.is_some() {
                    return;
                }
                let mut coeff = T::one();
                let mut rem = qi as u32;
                let mut deg = 0u32;
                let mut x_exp = z_exp.clone();
                for (part, &j) in flipped.iter().zip(js) {
                    coeff = coeff.mul(&binom_t::<T>(rem, j)).mul(&part.coeff.powu(j));
                    rem -= j;
                    deg += part.degree * j;
                    x_exp += &part.exp * rat_i64(j as i64);
                }
                if coeff.is_zero() {
                    return;
                }
                debug_assert!(x_exp < rat_zero());
                match T::prime_pow(p, &x_exp) {
                    None => failed = Some(exact_unavailable(format!("{p}^({x_exp})"))),
                    Some(x) => {
                        let poly = cosum_particular(&x, deg);
                        acc = acc.add(&coeff.mul(&poly_eval(&poly, 0)));
                    }
                }
            });
            if let Some(e) = failed {
                return Err(e);
            }
            return Ok(acc.mul(w));
        }
    }
    if T::EXACT {
        return Err(Error::ExactUnavailable(
            "series needs an integer exponent and a certified sign for closed form".to_string(),
        ));
    }
    numeric_series_qpow(p, parts, q, z_exp, w)
}

/// Certified truncation for the inexact carrier: past the cut, the summand
/// is bounded by `N^q t^D x^t` with `x < 1`, whose tail is geometric.
fn numeric_series_qpow<T: Coeff>(
    p: u32,
    parts: &[SeriesPart<T>],
    q: &Rat,
    z_exp: &Rat,
    w: &T,
) -> Result<T> {
    let e_max = parts
        .iter()
        .map(|part| part.exp.clone())
        .max()
        .expect("nonempty");
    let d_max = parts.iter().map(|part| part.degree).max().expect("nonempty");
    let rho_exp = q * &e_max + z_exp;
    debug_assert!(rho_exp < rat_zero());
    let x_hat = req_pow::<T>(p, &rho_exp)?;
    let z = req_pow::<T>(p, z_exp)?;
    let mut n_sum = T::zero();
    for part in parts {
        n_sum = n_sum.add(&part.coeff.abs());
    }
    let n_q = abs_qpow(&n_sum, q)?;
    let dcap = rat_ceil_i64(&(q * rat_i64(d_max as i64))).max(0) as u32;
    let digits = crate::real::working_digits() as i64;
    let tol = T::from_rat(&ppow(10, -(digits + 6)));
    let floor = T::from_rat(&ppow(10, -(3 * digits)));
    let steps: Vec<T> = parts
        .iter()
        .map(|part| req_pow::<T>(p, &part.exp))
        .collect::<Result<Vec<_>>>()?;
    let mut pows: Vec<T> = vec![T::one(); parts.len()];
    let mut weight = w.clone();
    let mut acc = T::zero();
    let cap: i64 = 4_000_000;
    let mut t: i64 = 0;
    loop {
        let tv = T::from_i64(t);
        let mut v = T::zero();
        for (part, pw) in parts.iter().zip(&pows) {
            v = v.add(&part.coeff.mul(&tv.powu(part.degree)).mul(pw));
        }
        acc = acc.add(&abs_qpow(&v, q)?.mul(&weight));
        if t >= 8 && t % 64 == 0 {
            let t1 = T::from_i64(t + 1);
            let growth = T::from_i64(t + 2).div(&t1).powu(dcap);
            let rho = x_hat.mul(&growth);
            if rho.cmp_total(&T::one()) == std::cmp::Ordering::Less {
                let head = n_q
                    .mul(&t1.powu(dcap))
                    .mul(&x_hat.powi(t + 1))
                    .mul(&w.abs());
                let rem = head.div(&T::one().sub(&rho));
                let target = acc.abs().mul(&tol).add(&floor);
                if rem.cmp_total(&target) == std::cmp::Ordering::Less {
                    return Ok(acc);
                }
            }
        }
        t += 1;
        if t > cap {
            return Err(Error::NonconvergedIteration(format!(
                "series truncation exceeded {cap} shells"
            )));
        }
        for (pw, st) in pows.iter_mut().zip(&steps) {
            *pw = pw.mul(st);
        }
        weight = weight.mul(&z);
    }
}

/// `sum` over one side of `|v(k)|^q * w0 * p^(k * weight_exp)`.
pub(crate) fn one_sided_qpow<T: Coeff>(
    p: u32,
    terms: &[PowerTerm<T>],
    q: &Rat,
    weight_exp: &Rat,
    w0: &T,
    side: Side,
) -> Result<T> {
    let live: Vec<&PowerTerm<T>> = terms.iter().filter(|t| !t.coeff.is_zero()).collect();
    if live.is_empty() || w0.is_zero() {
        return Ok(T::zero());
    }
    for t in &live {
        let crit = q * &t.exponent + weight_exp;
        let converges = match side {
            Side::Outer(_) => crit < rat_zero(),
            Side::Inner(_) => crit > rat_zero(),
        };
        if !converges {
            return Err(Error::Divergent(format!(
                "shell growth p^(k*{}) against weight p^(k*{})",
                t.exponent, weight_exp
            )));
        }
    }
    let b = side.bound();
    let z_exp = match side {
        Side::Outer(_) => weight_exp.clone(),
        Side::Inner(_) => -weight_exp,
    };
    let w = w0.mul(&req_pow::<T>(p, &(weight_exp * rat_i64(b)))?);
    let parts = reindex(p, &live, side)?;
    series_qpow(p, &parts, q, &z_exp, &w)
}

/// Signed one-sided sum `sum c_k k^d p^(k*(e + weight_exp)) * w0` in closed
/// form; the combined exponent must keep the series convergent.
pub(crate) fn one_sided_signed<T: Coeff>(
    p: u32,
    terms: &[PowerTerm<T>],
    weight_exp: &Rat,
    w0: &T,
    side: Side,
) -> Result<T> {
    let mut acc = T::zero();
    for term in terms {
        if term.coeff.is_zero() {
            continue;
        }
        let e = &term.exponent + weight_exp;
        let converges = match side {
            Side::Outer(_) => e < rat_zero(),
            Side::Inner(_) => e > rat_zero(),
        };
        if !converges {
            return Err(Error::Divergent(format!(
                "signed series at combined exponent {e}"
            )));
        }
        let b = side.bound();
        let boundary = req_pow::<T>(p, &(&e * rat_i64(b)))?;
        let val = match side {
            Side::Inner(_) => {
                let y = req_pow::<T>(p, &-&e)?;
                let q_poly = cum_particular(&y, term.degree);
                poly_eval(&q_poly, b)
            }
            Side::Outer(_) => {
                let x = req_pow::<T>(p, &e)?;
                let q_poly = cosum_particular(&x, term.degree);
                poly_eval(&q_poly, b)
            }
        };
        acc = acc.add(&term.coeff.mul(&val).mul(&boundary));
    }
    Ok(acc.mul(w0))
}

/// Signed finite-range sum `sum_{k=lo}^{hi} c_k k^d p^(k*(e + weight_exp))`.
pub(crate) fn bounded_signed_range<T: Coeff>(
    p: u32,
    terms: &[PowerTerm<T>],
    weight_exp: &Rat,
    lo: i64,
    hi: i64,
) -> Result<T> {
    let mut acc = T::zero();
    if hi < lo {
        return Ok(acc);
    }
    for term in terms {
        if term.coeff.is_zero() {
            continue;
        }
        let e = &term.exponent + weight_exp;
        let val = if rat_is_zero(&e) {
            let f = faulhaber::<T>(term.degree);
            poly_eval(&f, hi).sub(&poly_eval(&f, lo - 1))
        } else {
            let y = req_pow::<T>(p, &-&e)?;
            let q_poly = cum_particular(&y, term.degree);
            let at_hi = poly_eval(&q_poly, hi).mul(&req_pow::<T>(p, &(&e * rat_i64(hi)))?);
            let at_lo = poly_eval(&q_poly, lo - 1).mul(&req_pow::<T>(p, &(&e * rat_i64(lo - 1)))?);
            at_hi.sub(&at_lo)
        };
        acc = acc.add(&term.coeff.mul(&val));
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Public norms.
// ---------------------------------------------------------------------------

fn window_qpow<T: Coeff>(f: &RadialShellFunction<T>, q: &Rat, weight_exp: &Rat, w0: &T) -> Result<T> {
    let mut acc = T::zero();
    if f.window_coeffs().is_empty() {
        return Ok(acc);
    }
    let p = f.prime();
    let step = req_pow::<T>(p, weight_exp)?;
    let mut pw = req_pow::<T>(p, &(weight_exp * rat_i64(f.window_start())))?;
    for c in f.window_coeffs() {
        if !c.is_zero() {
            acc = acc.add(&abs_qpow(c, q)?.mul(w0).mul(&pw));
        }
        pw = pw.mul(&step);
    }
    Ok(acc)
}

/// q-th power of the norm on the weighted Lebesgue space with weight
/// `|x|^alpha`: `sum_k |c_k|^q p^{k(alpha+n)} (1 - p^{-n})`.
pub fn weighted_lq_qpow<T: Coeff>(
    f: &RadialShellFunction<T>,
    q: &Rat,
    alpha: &Rat,
) -> Result<T> {
    if q <= &rat_zero() {
        return Err(Error::InadmissibleParameters(format!(
            "q = {q} must be positive"
        )));
    }
    let p = f.prime();
    let n = f.dim();
    let e_w = alpha + rat_i64(n as i64);
    let w0 = T::from_rat(&measure_factor(p, n));
    let mut acc = window_qpow(f, q, &e_w, &w0)?;
    acc = acc.add(&one_sided_qpow(
        p,
        f.inner_tail().terms(),
        q,
        &e_w,
        &w0,
        Side::Inner(f.window_start() - 1),
    )?);
    acc = acc.add(&one_sided_qpow(
        p,
        f.outer_tail().terms(),
        q,
        &e_w,
        &w0,
        Side::Outer(f.window_end()),
    )?);
    Ok(acc)
}

/// Norm on the weighted Lebesgue space (inexact carrier).
pub fn weighted_lq_norm(f: &RadialShellFunction<Real>, q: &Rat, alpha: &Rat) -> Result<Real> {
    let pow = weighted_lq_qpow(f, q, alpha)?;
    pow.pow_rat(&(rat_i64(1) / q))
        .ok_or_else(|| exact_unavailable("root"))
}

/// q-th power of the Herz norm with regularity `alpha`, outer exponent `q`,
/// block exponent `r`: `sum_k p^{k alpha q} (|c_k|^r |S_k|)^{q/r}`.
pub fn herz_qpow<T: Coeff>(
    f: &RadialShellFunction<T>,
    alpha: &Rat,
    q: &Rat,
    r: &Rat,
) -> Result<T> {
    if q <= &rat_zero() || r <= &rat_zero() {
        return Err(Error::InadmissibleParameters(format!(
            "exponents q = {q}, r = {r} must be positive"
        )));
    }
    let p = f.prime();
    let n = f.dim();
    let e_w = q * &(alpha + rat_i64(n as i64) / r);
    let w0 = T::from_rat(&measure_factor(p, n))
        .pow_rat(&(q / r))
        .ok_or_else(|| exact_unavailable(format!("measure^({q}/{r})")))?;
    let mut acc = window_qpow(f, q, &e_w, &w0)?;
    acc = acc.add(&one_sided_qpow(
        p,
        f.inner_tail().terms(),
        q,
        &e_w,
        &w0,
        Side::Inner(f.window_start() - 1),
    )?);
    acc = acc.add(&one_sided_qpow(
        p,
        f.outer_tail().terms(),
        q,
        &e_w,
        &w0,
        Side::Outer(f.window_end()),
    )?);
    Ok(acc)
}

/// Herz norm (inexact carrier).
pub fn herz_norm(f: &RadialShellFunction<Real>, alpha: &Rat, q: &Rat, r: &Rat) -> Result<Real> {
    let pow = herz_qpow(f, alpha, q, r)?;
    pow.pow_rat(&(rat_i64(1) / q))
        .ok_or_else(|| exact_unavailable("root"))
}

/// Average of `f` over the ball of radius `p^gamma` about the origin.
pub fn ball_mean<T: Coeff>(f: &RadialShellFunction<T>, gamma: i64) -> Result<T> {
    let mass = cumulative_mass(f, gamma)?;
    let n = f.dim() as i64;
    Ok(mass.mul(&req_pow::<T>(f.prime(), &rat_i64(-gamma * n))?))
}

/// `integral of f over the ball B_gamma`: window and tails in closed form.
pub(crate) fn cumulative_mass<T: Coeff>(f: &RadialShellFunction<T>, gamma: i64) -> Result<T> {
    let p = f.prime();
    let n = f.dim();
    let n_rat = rat_i64(n as i64);
    let w0 = T::from_rat(&measure_factor(p, n));
    let inner_hi = gamma.min(f.window_start() - 1);
    let mut acc = one_sided_signed(
        p,
        f.inner_tail().terms(),
        &n_rat,
        &w0,
        Side::Inner(inner_hi),
    )
    .map_err(|e| match e {
        Error::Divergent(_) => Error::NonIntegrableAtZero,
        other => other,
    })?;
    if gamma >= f.window_start() && !f.window_coeffs().is_empty() {
        let hi = gamma.min(f.window_end() - 1);
        let step = req_pow::<T>(p, &n_rat)?;
        let mut pw = req_pow::<T>(p, &(rat_i64(f.window_start()) * &n_rat))?;
        for (i, c) in f.window_coeffs().iter().enumerate() {
            let k = f.window_start() + i as i64;
            if k > hi {
                break;
            }
            acc = acc.add(&c.mul(&pw).mul(&w0));
            pw = pw.mul(&step);
        }
    }
    if gamma >= f.window_end() {
        let part = bounded_signed_range(p, f.outer_tail().terms(), &n_rat, f.window_end(), gamma)?;
        acc = acc.add(&part.mul(&w0));
    }
    Ok(acc)
}

/// Integral of `f` over the whole space.
pub fn integral<T: Coeff>(f: &RadialShellFunction<T>) -> Result<T> {
    let p = f.prime();
    let n_rat = rat_i64(f.dim() as i64);
    let w0 = T::from_rat(&measure_factor(p, f.dim()));
    let mut acc = one_sided_signed(
        p,
        f.inner_tail().terms(),
        &n_rat,
        &w0,
        Side::Inner(f.window_start() - 1),
    )
    .map_err(|e| match e {
        Error::Divergent(_) => Error::NonIntegrableAtZero,
        other => other,
    })?;
    let step = req_pow::<T>(p, &n_rat)?;
    let mut pw = req_pow::<T>(p, &(rat_i64(f.window_start()) * &n_rat))?;
    for c in f.window_coeffs() {
        acc = acc.add(&c.mul(&pw).mul(&w0));
        pw = pw.mul(&step);
    }
    acc = acc.add(
        &one_sided_signed(
            p,
            f.outer_tail().terms(),
            &n_rat,
            &w0,
            Side::Outer(f.window_end()),
        )
        .map_err(|e| match e {
            Error::Divergent(_) => Error::NonIntegrableAtInfinity,
            other => other,
        })?,
    );
    Ok(acc)
}

/// q-th power of the central mean oscillation norm
/// `sup_gamma (1/|B_gamma|) * integral_{B_gamma} |b - mean(b)|^q`.
///
/// Both tails must be constant (or zero). The supremum is found by scanning
/// outward; past the window the oscillation admits an explicit decreasing
/// bound, and the scan stops once that bound falls below the recorded
/// maximum.
pub fn cmo_qpow<T: Coeff>(b: &RadialShellFunction<T>, q: &Rat) -> Result<T> {
    if q < &rat_i64(1) {
        return Err(Error::InadmissibleParameters(format!(
            "oscillation exponent q = {q} must be at least 1"
        )));
    }
    let c_in = b
        .inner_tail()
        .constant_value()
        .ok_or_else(|| Error::UnsupportedTail("oscillation needs a constant inner tail".into()))?;
    let c_out = b
        .outer_tail()
        .constant_value()
        .ok_or_else(|| Error::UnsupportedTail("oscillation needs a constant outer tail".into()))?;
    let p = b.prime();
    let n = b.dim();
    let n_rat = rat_i64(n as i64);
    let w0 = T::from_rat(&measure_factor(p, n));
    let ws = b.window_start();
    let we = b.window_end();
    let pn = req_pow::<T>(p, &n_rat)?;
    let pn_inv = req_pow::<T>(p, &-&n_rat)?;
    let kappa = T::from_i64(2)
        .pow_rat(&(q - rat_i64(1)))
        .ok_or_else(|| exact_unavailable("2^(q-1)"))?;

    // measure of the inner region as one lump
    let base_meas = req_pow::<T>(p, &(rat_i64(ws - 1) * &n_rat))?;
    // running total mass and per-shell measures
    let mut mass = c_in.mul(&base_meas);
    let mut shell_meas = base_meas.mul(&pn).mul(&w0); // |S_ws|
    let mut ball_meas = base_meas.clone(); // |B_{ws-1}|

    // oscillation against the outer constant, fixed parts
    let mut w_b = abs_qpow(&c_in.sub(&c_out), q)?.mul(&base_meas);
    {
        let mut sm = shell_meas.clone();
        for c in b.window_coeffs() {
            w_b = w_b.add(&abs_qpow(&c.sub(&c_out), q)?.mul(&sm));
            sm = sm.mul(&pn);
        }
    }

    let mut best = T::zero();
    let near_one = T::from_rat(&(rat_i64(1) - ppow(10, -9)));
    let mut gamma = ws;
    let cap = 400_000;
    let mut iter = 0;
    loop {
        // advance mass and measures to gamma
        let coeff_here: T = if gamma < we {
            b.window_coeffs()[(gamma - ws) as usize].clone()
        } else {
            c_out.clone()
        };
        mass = mass.add(&coeff_here.mul(&shell_meas));
        ball_meas = ball_meas.mul(&pn);
        shell_meas = shell_meas.mul(&pn);

        let mu = mass.mul(&ball_meas.clone().pow_rat(&rat_i64(-1)).unwrap_or_else(|| {
            // ball_meas is a positive prime power; inversion always defined
            T::one().div(&ball_meas)
        }));
        // oscillation at this radius
        let mut osc = abs_qpow(&c_in.sub(&mu), q)?.mul(&base_meas);
        {
            let mut sm = base_meas.mul(&pn).mul(&w0);
            for (i, c) in b.window_coeffs().iter().enumerate() {
                if ws + i as i64 > gamma {
                    break;
                }
                osc = osc.add(&abs_qpow(&c.sub(&mu), q)?.mul(&sm));
                sm = sm.mul(&pn);
            }
        }
        if gamma >= we {
            let lump = ball_meas.sub(&req_pow::<T>(p, &(rat_i64(we - 1) * &n_rat))?);
            osc = osc.add(&abs_qpow(&c_out.sub(&mu), q)?.mul(&lump));
        }
        let osc = osc.div(&ball_meas);
        if best.cmp_total(&osc) == std::cmp::Ordering::Less {
            best = osc;
        }

        if gamma >= we {
            // decreasing certified bound past the window
            let r_const = {
                // mass below the outer region, relative to the outer constant
                let inner_mass = cumulative_mass(b, we - 1)?;
                inner_mass.sub(&c_out.mul(&req_pow::<T>(p, &(rat_i64(we - 1) * &n_rat))?))
            };
            let inv_ball = T::one().div(&ball_meas);
            let delta_q = abs_qpow(&r_const.mul(&inv_ball), q)?;
            let bound = kappa
                .mul(&w_b)
                .mul(&inv_ball)
                .add(&T::one().add(&kappa).mul(&delta_q));
            let threshold = best.mul(&near_one);
            if bound.cmp_total(&threshold) != std::cmp::Ordering::Greater {
                return Ok(best);
            }
        }
        gamma += 1;
        iter += 1;
        if iter > cap {
            return Err(Error::NonconvergedIteration(format!(
                "oscillation scan exceeded {cap} radii"
            )));
        }
    }
}

/// Central mean oscillation norm (inexact carrier).
pub fn cmo_norm(b: &RadialShellFunction<Real>, q: &Rat) -> Result<Real> {
    let pow = cmo_qpow(b, q)?;
    pow.pow_rat(&(rat_i64(1) / q))
        .ok_or_else(|| exact_unavailable("root"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::shell::Tail;

    type ShellQ = RadialShellFunction<Rat>;
    type ShellR = RadialShellFunction<Real>;

    fn term(c: Rat, e: Rat, d: u32) -> PowerTerm<Rat> {
        PowerTerm {
            coeff: c,
            exponent: e,
            degree: d,
        }
    }

    #[test]
    fn cum_particular_matches_brute_force() {
        for d in 0..5u32 {
            for y in [rat(1, 3), rat(2, 5), rat(5, 2), rat(-1, 2)] {
                let q_poly = cum_particular(&y, d);
                for m in [-3i64, 0, 1, 7] {
                    let lhs = poly_eval(&q_poly, m)
                        .sub(&y.mul(&poly_eval(&q_poly, m - 1)));
                    let rhs = <Rat as Coeff>::from_i64(m).powu(d);
                    assert_eq!(lhs, rhs, "d={d} m={m}");
                }
            }
        }
    }

    #[test]
    fn cosum_particular_matches_brute_force() {
        for d in 0..5u32 {
            for x in [rat(1, 3), rat(2, 5), rat(7, 3)] {
                let q_poly = cosum_particular(&x, d);
                for m in [-3i64, 0, 2, 9] {
                    let lhs = poly_eval(&q_poly, m)
                        .sub(&x.mul(&poly_eval(&q_poly, m + 1)));
                    let rhs = <Rat as Coeff>::from_i64(m).powu(d);
                    assert_eq!(lhs, rhs, "d={d} m={m}");
                }
            }
        }
    }

    #[test]
    fn faulhaber_matches_brute_force() {
        for d in 0..5u32 {
            let f = faulhaber::<Rat>(d);
            for (a, m) in [(-4i64, 3i64), (0, 6), (2, 2), (-7, -2)] {
                let closed = poly_eval(&f, m).sub(&poly_eval(&f, a - 1));
                let mut brute = rat_zero();
                for k in a..=m {
                    brute = brute.add(&<Rat as Coeff>::from_i64(k).powu(d));
                }
                assert_eq!(closed, brute, "d={d} range {a}..={m}");
            }
        }
    }

    #[test]
    fn infinite_cosum_equals_geometric_series() {
        // sum_{k>=m} k x^k at x = 1/2, m = 3: closed form vs high truncation
        let x = rat(1, 2);
        let q_poly = cosum_particular(&x, 1);
        let closed = poly_eval(&q_poly, 3).mul(&x.powu(3));
        let mut brute = rat_zero();
        let mut pw = x.powu(3);
        for k in 3i64..90 {
            brute = brute.add(&rat_i64(k).mul(&pw));
            pw = pw.mul(&x);
        }
        let diff = closed.sub(&brute).abs();
        assert!(diff < rat(1, 1_000_000_000_000_000));
    }

    #[test]
    fn sphere_indicator_weighted_norm() {
        let f = ShellQ::sphere_indicator(2, 1, 0).unwrap();
        let got = weighted_lq_qpow(&f, &rat_i64(2), &rat_zero()).unwrap();
        assert_eq!(got, rat(1, 2));
        let shifted = ShellQ::sphere_indicator(3, 2, -1).unwrap();
        // |c|^q p^{k(alpha+n)} (1-p^{-n}) = 3^{-2*1... } with alpha=1,n=2,k=-1
        let got = weighted_lq_qpow(&shifted, &rat_i64(3), &rat_i64(1)).unwrap();
        assert_eq!(got, ppow(3, -3) * measure_factor(3, 2));
    }

    #[test]
    fn ball_indicator_weighted_norm_sums_the_geometric_tail() {
        // q-th power over the ball: sum_{k<=0} p^{k(alpha+n)} (1-p^{-n})
        let f = ShellQ::ball_indicator(2, 1, 0).unwrap();
        let got = weighted_lq_qpow(&f, &rat_i64(2), &rat_zero()).unwrap();
        assert_eq!(got, rat_i64(1));
        let g = ShellQ::ball_indicator(5, 2, -1).unwrap();
        let got = weighted_lq_qpow(&g, &rat_i64(1), &rat_i64(3)).unwrap();
        // sum_{k<=-1} 5^{5k} (1 - 5^{-2}) = (24/25) * 5^{-5}/(1 - 5^{-5})
        let expect = measure_factor(5, 2) * ppow(5, -5) / (rat_i64(1) - ppow(5, -5));
        assert_eq!(got, expect);
    }

    #[test]
    fn near_extremal_norm_matches_the_closed_form() {
        // window coefficient one at zero plus outer decay p^{ks}:
        // q-th power = (1 - p^{-n}) / (1 - p^{-q*eps})
        for (p, n, q, eps) in [(2u32, 1u32, 2i64, rat(1, 2)), (3, 2, 3, rat(1, 4))] {
            let spec = crate::shell::ExtremizerSpec {
                prime: p,
                dim: n,
                q: rat_i64(q),
                alpha: rat_zero(),
                eps: eps.clone(),
            };
            let f: ShellQ = crate::shell::make_extremizer(&spec).unwrap();
            let got = weighted_lq_qpow(&f, &rat_i64(q), &rat_zero());
            let expect =
                measure_factor(p, n) / (rat_i64(1) - ppow(p, 1).pow_rat(&(-rat_i64(q) * &eps)).unwrap_or_default());
            match got {
                Ok(v) => assert_eq!(v, expect),
                Err(_) => {
                    // exact carrier cannot take fractional s; check in reals
                    let fr = f.to_real();
                    let v = weighted_lq_qpow(&fr, &rat_i64(q), &rat_zero()).unwrap();
                    assert!((v.to_f64() - rat_to_f64(&expect)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn real_and_exact_norms_agree() {
        let f = ShellQ::new(
            2,
            1,
            -2,
            vec![rat(1, 3), rat_i64(-2), rat(5, 7), rat_i64(0), rat_i64(4)],
            Tail::constant(rat(1, 2)),
            Tail::power(rat(3, 4), rat_i64(-2)),
        )
        .unwrap();
        let exact = weighted_lq_qpow(&f, &rat_i64(2), &rat_i64(1)).unwrap();
        let real = weighted_lq_qpow(&f.to_real(), &rat_i64(2), &rat_i64(1)).unwrap();
        assert!((exact.to_f64() - real.to_f64()).abs() < 1e-12);
    }

    #[test]
    fn numeric_fallback_agrees_with_closed_form() {
        // fractional q forces the truncation path on the real carrier
        let f = ShellQ::ball_indicator(2, 1, 0).unwrap().to_real();
        let got = weighted_lq_qpow(&f, &rat(5, 2), &rat_zero()).unwrap();
        // indicator values: |c|^q = 1, so the q-power equals the measure: 1
        assert!((got.to_f64() - 1.0).abs() < 1e-12);
        let g = ShellQ::sphere_indicator(2, 1, 0)
            .unwrap()
            .add(&ShellQ::ball_indicator(2, 1, -1).unwrap())
            .unwrap()
            .to_real();
        let got = weighted_lq_qpow(&g, &rat(5, 2), &rat_zero()).unwrap();
        assert!((got.to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_sign_tail_is_certified_and_summed() {
        // outer tail A p^{-k} - B p^{-2k} with A,B chosen to stay positive
        let tail = Tail::from_terms(vec![
            term(rat_i64(3), rat_i64(-1), 0),
            term(rat_i64(-1), rat_i64(-2), 0),
        ])
        .unwrap();
        let f = ShellQ::new(2, 1, 1, Vec::new(), Tail::zero(), tail).unwrap();
        let got = weighted_lq_qpow(&f, &rat_i64(2), &rat_zero()).unwrap();
        // brute force in rationals over a long range
        let mut brute = rat_zero();
        for k in 1i64..140 {
            let v = rat_i64(3) * ppow(2, -k) - ppow(2, -2 * k);
            brute = brute + v.clone() * v * ppow(2, k) * measure_factor(2, 1);
        }
        assert!((got.clone() - brute).abs() < ppow(2, -120));
    }

    #[test]
    fn divergent_series_is_rejected_exactly() {
        // outer tail p^{-k} in dimension 1 with alpha = 1: q(e) + alpha + n = 0
        let f = ShellQ::new(
            2,
            1,
            0,
            Vec::new(),
            Tail::zero(),
            Tail::power(rat_i64(1), rat_i64(-1)),
        )
        .unwrap();
        assert!(matches!(
            weighted_lq_qpow(&f, &rat_i64(1), &rat_zero()),
            Err(Error::Divergent(_))
        ));
        // and the real carrier rejects it too (no rounding of the boundary)
        assert!(matches!(
            weighted_lq_qpow(&f.to_real(), &rat_i64(1), &rat_zero()),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn herz_norm_examples() {
        let f = ShellQ::sphere_indicator(2, 1, 0).unwrap();
        // single block: p^{k alpha q} (|c|^r |S_k|)^{q/r} at k = 0
        let got = herz_qpow(&f, &rat_i64(1), &rat_i64(2), &rat_i64(2)).unwrap();
        assert_eq!(got, rat(1, 2));
        let b = ShellQ::ball_indicator(3, 1, 0).unwrap();
        let got = herz_qpow(&b, &rat_zero(), &rat_i64(2), &rat_i64(2)).unwrap();
        // sum_{k<=0} (3^k * 2/3)^{1} = (2/3) / (1 - 1/3)
        assert_eq!(got, rat_i64(1));
    }

    #[test]
    fn herz_at_matched_exponents_equals_weighted_lq() {
        // block exponent r = q with alpha scaled: identical summands
        let f = ShellQ::new(
            3,
            2,
            -1,
            vec![rat(2, 3), rat_i64(1), rat(-1, 2)],
            Tail::zero(),
            Tail::power(rat(1, 5), rat_i64(-3)),
        )
        .unwrap();
        let q = rat_i64(2);
        let alpha = rat_i64(1);
        let lhs = herz_qpow(&f, &(&alpha / &q), &q, &q).unwrap();
        let rhs = weighted_lq_qpow(&f, &q, &alpha).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn ball_means_and_integral() {
        let f = ShellQ::ball_indicator(2, 1, 0).unwrap();
        assert_eq!(ball_mean(&f, 0).unwrap(), rat_i64(1));
        assert_eq!(ball_mean(&f, 2).unwrap(), rat(1, 4));
        assert_eq!(integral(&f).unwrap(), rat_i64(1));
        let s = ShellQ::sphere_indicator(2, 1, 0).unwrap();
        assert_eq!(integral(&s).unwrap(), rat(1, 2));
        assert_eq!(ball_mean(&s, 3).unwrap(), rat(1, 16));
        // non-integrable inner tail
        let bad = ShellQ::new(
            2,
            1,
            0,
            Vec::new(),
            Tail::power(rat_i64(1), rat_i64(-1)),
            Tail::zero(),
        )
        .unwrap();
        assert!(matches!(integral(&bad), Err(Error::NonIntegrableAtZero)));
    }

    #[test]
    fn oscillation_of_ball_indicator() {
        let b = ShellQ::ball_indicator(2, 1, 0).unwrap();
        assert_eq!(cmo_qpow(&b, &rat_i64(1)).unwrap(), rat(1, 2));
        // constant functions oscillate not at all
        let c = ShellQ::new(3, 1, 0, Vec::new(), Tail::constant(rat(5, 7)), Tail::constant(rat(5, 7))).unwrap();
        assert_eq!(cmo_qpow(&c, &rat_i64(2)).unwrap(), rat_zero());
    }

    #[test]
    fn oscillation_scan_matches_direct_maximum() {
        let b = ShellQ::new(
            2,
            1,
            -1,
            vec![rat_i64(2), rat_i64(-1), rat(1, 2)],
            Tail::constant(rat_i64(1)),
            Tail::zero(),
        )
        .unwrap();
        let got = cmo_qpow(&b, &rat_i64(2)).unwrap();
        // direct scan over a wide range of radii
        let mut best = rat_zero();
        for gamma in -1..60i64 {
            let mu = ball_mean(&b, gamma).unwrap();
            let mut acc = (rat_i64(1) - mu.clone()).powu(2) * ppow(2, -2 - 1) * rat_i64(2);
            // inner region measure p^{(ws-1)n} = 2^{-2}; write it directly:
            acc = (rat_i64(1) - mu.clone()).powu(2) * ppow(2, -2);
            for k in -1..=gamma.min(1) {
                let c = b.value_at(k).unwrap();
                acc = acc + (c - mu.clone()).powu(2) * ppow(2, k) * measure_factor(2, 1);
            }
            if gamma >= 2 {
                let lump = ppow(2, gamma) - ppow(2, 1);
                acc = acc + mu.clone().powu(2) * lump;
            }
            let osc = acc / ppow(2, gamma);
            if osc > best {
                best = osc;
            }
        }
        assert_eq!(got, best);
    }

    #[test]
    fn oscillation_monotone_in_the_exponent() {
        let b = ShellQ::new(
            3,
            1,
            0,
            vec![rat_i64(1), rat(-1, 2), rat(3, 4)],
            Tail::constant(rat(1, 3)),
            Tail::constant(rat(-2, 5)),
        )
        .unwrap();
        let one = cmo_qpow(&b, &rat_i64(1)).unwrap();
        let two = cmo_qpow(&b, &rat_i64(2)).unwrap();
        let four = cmo_qpow(&b, &rat_i64(4)).unwrap();
        // cross-powered comparisons: (cmo_1)^2 <= cmo_2 pow 1, etc.
        assert!(one.clone().powu(2) <= two);
        assert!(two.clone().powu(2) <= four);
    }
}
