//! Exact scalar arithmetic for norm values.
//!
//! Every norm in the crate is a [`PowerValue`]: either an exact real of the
//! form `r^(1/k)` with `r` a nonnegative rational, or a rational interval
//! that is guaranteed to contain the true value. Exact values compare
//! exactly (by raising both sides to a common integer power); intervals
//! compare only when they are separated.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{is_positive_semidefinite, QMatrix};

pub type Rational = BigRational;

/// Relative width of intervals produced when exactness is lost.
pub const DEFAULT_PRECISION_BITS: u32 = 64;

// Keeps canonicalisation from materialising absurd integers.
const MAX_EXPONENT_PART: u64 = 1 << 12;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a"`, `"a/b"` or a finite decimal such as `"-0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = || Error::ParseRational(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !ip.bytes().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let n: BigInt = format!("{ip}{fp}").parse().map_err(|_| err())?;
        let r = Rational::new(n, BigInt::from(10u32).pow(fp.len() as u32));
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub(crate) fn rpow(r: &Rational, e: u32) -> Rational {
    // numerator and denominator stay coprime, so no reduction is needed
    Rational::new_raw(r.numer().pow(e), r.denom().pow(e))
}

fn exact_root(r: &Rational, k: u32) -> Option<Rational> {
    if k == 1 {
        return Some(r.clone());
    }
    let n = r.numer().nth_root(k);
    if &n.pow(k) != r.numer() {
        return None;
    }
    let d = r.denom().nth_root(k);
    if &d.pow(k) != r.denom() {
        return None;
    }
    Some(Rational::new_raw(n, d))
}

fn pow2(s: u64) -> BigInt {
    BigInt::one() << s
}

/// Rational bounds `lo ≤ x^(1/k) ≤ hi` with relative width about `2^-bits`.
pub fn root_bounds(x: &Rational, k: u32, bits: u32) -> (Rational, Rational) {
    assert!(!x.is_negative(), "root of a negative rational");
    if let Some(r) = exact_root(x, k) {
        return (r.clone(), r);
    }
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let extra = ((db - nb) / k as i64 + 2).max(0) as u64;
    let s = bits as u64 + extra;
    let scaled = (x.numer() << (s * k as u64)) / x.denom();
    let m = scaled.nth_root(k);
    let den = pow2(s);
    (
        Rational::new(m.clone(), den.clone()),
        Rational::new(m + 1, den),
    )
}

/// A nonnegative real that is either known exactly as a rational power or
/// bracketed by a rational interval.
///
/// Exact values are kept canonical: `base^(1/k)` where `base` is not a
/// perfect `d`-th power for any divisor `d > 1` of `k`. Canonical exact
/// values are equal iff they are structurally equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PowerValue {
    Exact { base: Rational, exp: Rational },
    Interval { lo: Rational, hi: Rational },
}

impl PowerValue {
    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn rational(r: Rational) -> Self {
        assert!(!r.is_negative(), "norm values are nonnegative");
        PowerValue::Exact {
            base: r,
            exp: Rational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(int(n))
    }

    /// `base^exp`, panicking on invalid input. See [`PowerValue::try_power`].
    pub fn power(base: Rational, exp: Rational) -> Self {
        Self::try_power(base, exp).expect("invalid power")
    }

    pub fn try_power(base: Rational, exp: Rational) -> Result<Self> {
        if base.is_negative() {
            return Err(Error::InvalidPower(format!("negative base {base}")));
        }
        if exp.is_zero() || base.is_one() {
            return Ok(Self::one());
        }
        if base.is_zero() {
            if exp.is_negative() {
                return Err(Error::InvalidPower("0 to a negative power".into()));
            }
            return Ok(Self::zero());
        }
        let (base, exp) = if exp.is_negative() {
            (base.recip(), -exp)
        } else {
            (base, exp)
        };
        let a = exp.numer().to_u64().filter(|&a| a <= MAX_EXPONENT_PART);
        let b = exp.denom().to_u64().filter(|&b| b <= MAX_EXPONENT_PART);
        let (Some(a), Some(mut b)) = (a, b) else {
            return Err(Error::InvalidPower(format!("exponent {exp} too large")));
        };
        let mut base = rpow(&base, a as u32);
        'reduce: loop {
            for d in (2..=b).rev() {
                if b % d == 0 {
                    if let Some(r) = exact_root(&base, d as u32) {
                        base = r;
                        b /= d;
                        continue 'reduce;
                    }
                }
            }
            break;
        }
        Ok(PowerValue::Exact {
            base,
            exp: Rational::new(BigInt::one(), BigInt::from(b)),
        })
    }

    /// An interval value; collapses to an exact rational when `lo == hi`.
    pub fn interval(lo: Rational, hi: Rational) -> Self {
        assert!(!lo.is_negative() && lo <= hi, "malformed interval [{lo}, {hi}]");
        if lo == hi {
            Self::rational(lo)
        } else {
            PowerValue::Interval { lo, hi }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PowerValue::Exact { .. })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PowerValue::Exact { base, .. } if base.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, PowerValue::Exact { base, .. } if base.is_one())
    }

    /// The value as a rational, when it is one.
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            PowerValue::Exact { base, exp } if exp.is_one() => Some(base),
            _ => None,
        }
    }

    fn root_index(&self) -> u32 {
        match self {
            PowerValue::Exact { exp, .. } => exp.denom().to_u32().unwrap(),
            PowerValue::Interval { .. } => panic!("root index of an interval"),
        }
    }

    /// Rational bounds on the value; tight for rationals.
    pub fn enclose(&self, bits: u32) -> (Rational, Rational) {
        match self {
            PowerValue::Exact { base, .. } => root_bounds(base, self.root_index(), bits),
            PowerValue::Interval { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    pub fn bounds(&self) -> (Rational, Rational) {
        self.enclose(DEFAULT_PRECISION_BITS)
    }

    /// Raises to the rational power `t`. Intervals require `t > 0`.
    pub fn pow(&self, t: &Rational) -> Self {
        match self {
            PowerValue::Exact { base, exp } => Self::power(base.clone(), exp * t),
            PowerValue::Interval { lo, hi } => {
                assert!(t.is_positive(), "interval raised to a non-positive power");
                let l = Self::power(lo.clone(), t.clone()).bounds().0;
                let h = Self::power(hi.clone(), t.clone()).bounds().1;
                Self::interval(l, h)
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        match (self, other) {
            (PowerValue::Exact { base: b1, .. }, PowerValue::Exact { base: b2, .. }) => {
                let k1 = self.root_index() as u64;
                let k2 = other.root_index() as u64;
                let k = k1.lcm(&k2);
                let base = rpow(b1, (k / k1) as u32) * rpow(b2, (k / k2) as u32);
                Self::power(base, Rational::new(BigInt::one(), BigInt::from(k)))
            }
            _ => {
                let (l1, h1) = self.bounds();
                let (l2, h2) = other.bounds();
                Self::interval(l1 * l2, h1 * h2)
            }
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.mul(&Self::rational(r.abs()))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::sum([self.clone(), other.clone()])
    }

    /// Exact when every term is rational or all terms are the same power;
    /// otherwise a certified interval.
    pub fn sum<I: IntoIterator<Item = PowerValue>>(terms: I) -> Self {
        let mut groups: Vec<(PowerValue, u64)> = Vec::new();
        for t in terms {
            if t.is_zero() {
                continue;
            }
            match groups.iter_mut().find(|(v, _)| v.is_exact() && *v == t) {
                Some(g) => g.1 += 1,
                None => groups.push((t, 1)),
            }
        }
        let scaled: Vec<PowerValue> = groups
            .into_iter()
            .map(|(v, n)| if n == 1 { v } else { v.scale(&Rational::from_integer(n.into())) })
            .collect();
        match scaled.len() {
            0 => return Self::zero(),
            1 => return scaled.into_iter().next().unwrap(),
            _ => {}
        }
        if scaled.iter().all(|v| v.as_rational().is_some()) {
            let s = scaled.iter().map(|v| v.as_rational().unwrap().clone()).sum();
            return Self::rational(s);
        }
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for v in &scaled {
            let (l, h) = v.bounds();
            lo += l;
            hi += h;
        }
        Self::interval(lo, hi)
    }

    /// The larger value; an interval hull when the order is undecided.
    pub fn max(&self, other: &Self) -> Self {
        match cmp_power(self, other) {
            Some(Ordering::Less) => other.clone(),
            Some(_) => self.clone(),
            None => {
                let (l1, h1) = self.bounds();
                let (l2, h2) = other.bounds();
                Self::interval(l1.max(l2), h1.max(h2))
            }
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        match cmp_power(self, other) {
            Some(Ordering::Greater) => other.clone(),
            Some(_) => self.clone(),
            None => {
                let (l1, h1) = self.bounds();
                let (l2, h2) = other.bounds();
                Self::interval(l1.min(l2), h1.min(h2))
            }
        }
    }

    pub fn max_of<'a, I: IntoIterator<Item = &'a PowerValue>>(values: I) -> Self {
        values
            .into_iter()
            .fold(Self::zero(), |acc, v| acc.max(v))
    }

    /// Approximate value for display only.
    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclose(60);
        ((lo + hi) / int(2)).to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_json(&self) -> Value {
        match self {
            PowerValue::Exact { base, exp } => json!({
                "base": format_rational(base),
                "exp": format_rational(exp),
            }),
            PowerValue::Interval { lo, hi } => json!({
                "lo": format_rational(lo),
                "hi": format_rational(hi),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| -> Result<Option<Rational>> {
            match v.get(k) {
                None => Ok(None),
                Some(Value::String(s)) => parse_rational(s).map(Some),
                Some(other) => Err(Error::ParseRational(other.to_string())),
            }
        };
        match (field("base")?, field("exp")?, field("lo")?, field("hi")?) {
            (Some(b), Some(e), None, None) => Self::try_power(b, e),
            (None, None, Some(lo), Some(hi)) if !lo.is_negative() && lo <= hi => {
                Ok(Self::interval(lo, hi))
            }
            _ => Err(Error::ParseRational(v.to_string())),
        }
    }
}

impl fmt::Display for PowerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerValue::Exact { base, exp } if exp.is_one() => write!(f, "{base}"),
            PowerValue::Exact { base, exp } => write!(f, "{base}^({exp})"),
            PowerValue::Interval { lo, hi } => write!(f, "[{lo}, {hi}]"),
        }
    }
}

/// Compares `b^(1/k)` with the rational `q` exactly.
fn cmp_exact_rational(v: &PowerValue, q: &Rational) -> Ordering {
    let PowerValue::Exact { base, .. } = v else {
        unreachable!()
    };
    if q.is_negative() {
        return Ordering::Greater;
    }
    base.cmp(&rpow(q, v.root_index()))
}

/// Orders two values, or returns `None` when certified intervals overlap.
pub fn cmp_power(a: &PowerValue, b: &PowerValue) -> Option<Ordering> {
    use PowerValue::*;
    match (a, b) {
        (Exact { base: b1, .. }, Exact { base: b2, .. }) => {
            let k1 = a.root_index() as u64;
            let k2 = b.root_index() as u64;
            if k1 == k2 {
                return Some(b1.cmp(b2));
            }
            let k = k1.lcm(&k2);
            Some(rpow(b1, (k / k1) as u32).cmp(&rpow(b2, (k / k2) as u32)))
        }
        (Exact { .. }, Interval { lo, hi }) => {
            if cmp_exact_rational(a, lo) == Ordering::Less {
                Some(Ordering::Less)
            } else if cmp_exact_rational(a, hi) == Ordering::Greater {
                Some(Ordering::Greater)
            } else {
                None
            }
        }
        (Interval { .. }, Exact { .. }) => cmp_power(b, a).map(Ordering::reverse),
        (Interval { lo: l1, hi: h1 }, Interval { lo: l2, hi: h2 }) => {
            if h1 < l2 {
                Some(Ordering::Less)
            } else if l1 > h2 {
                Some(Ordering::Greater)
            } else {
                None
            }
        }
    }
}

/// Decides `a ≤ b` when the available information allows it.
pub fn le(a: &PowerValue, b: &PowerValue) -> Option<bool> {
    use PowerValue::*;
    match (a, b) {
        (Exact { .. }, Exact { .. }) => cmp_power(a, b).map(|o| o != Ordering::Greater),
        (Exact { .. }, Interval { lo, hi }) => {
            if cmp_exact_rational(a, lo) != Ordering::Greater {
                Some(true)
            } else if cmp_exact_rational(a, hi) == Ordering::Greater {
                Some(false)
            } else {
                None
            }
        }
        (Interval { lo, hi }, Exact { .. }) => {
            if cmp_exact_rational(b, hi) != Ordering::Less {
                Some(true)
            } else if cmp_exact_rational(b, lo) == Ordering::Less {
                Some(false)
            } else {
                None
            }
        }
        (Interval { lo: l1, hi: h1 }, Interval { lo: l2, hi: h2 }) => {
            if h1 <= l2 {
                Some(true)
            } else if l1 > h2 {
                Some(false)
            } else {
                None
            }
        }
    }
}

/// A prime used for p-adic absolute values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicContext {
    p: u64,
    verified: bool,
}

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

impl PAdicContext {
    /// Trial division is complete below 10^6; larger `p` is only checked
    /// against small factors and flagged via [`Self::primality_verified`].
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::NotPrime(p));
        }
        let mut d = 2u64;
        while d < TRIAL_DIVISION_LIMIT && d.saturating_mul(d) <= p {
            if p % d == 0 {
                return Err(Error::NotPrime(p));
            }
            d += 1;
        }
        let verified = d.saturating_mul(d) > p;
        Ok(PAdicContext { p, verified })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn primality_verified(&self) -> bool {
        self.verified
    }

    /// `v_p(x)`, or `None` for zero.
    pub fn valuation(&self, x: &Rational) -> Option<i64> {
        if x.is_zero() {
            return None;
        }
        let p = BigInt::from(self.p);
        let count = |n: &BigInt| {
            let mut n = n.abs();
            let mut v = 0i64;
            loop {
                let (q, r) = n.div_rem(&p);
                if !r.is_zero() {
                    return v;
                }
                n = q;
                v += 1;
            }
        };
        Some(count(x.numer()) - count(x.denom()))
    }

    pub fn abs(&self, x: &Rational) -> PowerValue {
        match self.valuation(x) {
            None => PowerValue::zero(),
            Some(v) => PowerValue::power(int(self.p as i64), int(-v)),
        }
    }
}

/// `|x|_p = p^(-v_p(x))`, and `0` at zero.
pub fn padic_abs(x: &Rational, ctx: &PAdicContext) -> PowerValue {
    ctx.abs(x)
}

/// Whether every eigenvalue of the symmetric matrix `g` is at most 1,
/// decided exactly as positive semidefiniteness of `I - g`.
pub fn psd_leq_one(g: &QMatrix) -> Result<bool> {
    if !g.is_square() {
        return Err(Error::NotSquare(g.rows(), g.cols()));
    }
    if !g.is_symmetric() {
        return Err(Error::NonSymmetric);
    }
    is_positive_semidefinite(&QMatrix::identity(g.rows()).sub(g))
}
