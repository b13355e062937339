//! ℓ^p combinations of norm values, normed sets and the power flow.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, PowerValue, Rational};

/// An exponent `p ∈ (0, ∞]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PExponent {
    Finite(Rational),
    Infinite,
}

impl PExponent {
    pub fn finite(p: Rational) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::UnsupportedExponent(format!("p = {p} must be positive")));
        }
        Ok(PExponent::Finite(p))
    }

    pub fn one() -> Self {
        PExponent::Finite(Rational::one())
    }

    /// Accepts a positive rational or `inf`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(PExponent::Infinite),
            t => Self::finite(parse_rational(t)?),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PExponent::Infinite)
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            PExponent::Finite(p) => Some(p),
            PExponent::Infinite => None,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> Rational {
        match self {
            PExponent::Finite(p) => p.recip(),
            PExponent::Infinite => Rational::zero(),
        }
    }

    /// `p / t`; infinity is fixed.
    pub fn div(&self, t: &Rational) -> Self {
        match self {
            PExponent::Finite(p) => PExponent::Finite(p / t),
            PExponent::Infinite => PExponent::Infinite,
        }
    }

    /// The constant `2^(1/p)` of the Lipschitz triangle inequality implied
    /// by the p-triangle inequality.
    pub fn lipschitz_constant(&self) -> PowerValue {
        PowerValue::power(Rational::from_integer(2.into()), self.reciprocal())
    }
}

impl Ord for PExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PExponent::Finite(a), PExponent::Finite(b)) => a.cmp(b),
            (PExponent::Finite(_), PExponent::Infinite) => Ordering::Less,
            (PExponent::Infinite, PExponent::Finite(_)) => Ordering::Greater,
            (PExponent::Infinite, PExponent::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for PExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinite => write!(f, "inf"),
        }
    }
}

/// `(Σ xᵢ^p)^(1/p)`, or the maximum for `p = ∞`.
pub fn lp_norm(xs: &[PowerValue], p: &PExponent) -> PowerValue {
    let nonzero: Vec<&PowerValue> = xs.iter().filter(|x| !x.is_zero()).collect();
    match nonzero.len() {
        0 => return PowerValue::zero(),
        1 => return nonzero[0].clone(),
        _ => {}
    }
    match p {
        PExponent::Infinite => PowerValue::max_of(nonzero),
        PExponent::Finite(p) => {
            PowerValue::sum(nonzero.iter().map(|x| x.pow(p))).pow(&p.recip())
        }
    }
}

/// A finite set of labelled elements with norms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormedSet {
    entries: Vec<(String, PowerValue)>,
}

impl NormedSet {
    pub fn new<I: IntoIterator<Item = (String, PowerValue)>>(entries: I) -> Self {
        NormedSet {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(e, _)| e.as_str())
    }

    pub fn norm(&self, element: &str) -> Option<&PowerValue> {
        self.entries.iter().find(|(e, _)| e == element).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, PowerValue)] {
        &self.entries
    }
}

/// The flow `σ_t`: every norm raised to the power `t > 0`.
pub fn flow_normed_set(x: &NormedSet, t: &Rational) -> Result<NormedSet> {
    if !t.is_positive() {
        return Err(Error::UnsupportedExponent(format!("flow parameter {t} must be positive")));
    }
    Ok(NormedSet::new(
        x.entries.iter().map(|(e, v)| (e.clone(), v.pow(t))),
    ))
}
