//! Halo descriptors for the concrete scalar rings, sample-based axiom
//! checks, the Lip functor, the flow, and the re-normalization infimum.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{tree_norm, BoundsCertificate, LatticeNorm, NormedLattice, TreeBudget, Witness};
use crate::norms::{lp_norm, PExponent};
use crate::scalar::{cmp_power, format_rational, int, le, parse_rational, PAdicContext, PowerValue, Rational};

/// The scalars a matrix or vector computation is carried out over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ScalarContext {
    /// ℚ as a dense subfield of ℝ with the usual absolute value.
    Real,
    /// ℚ as a dense subfield of ℚ_p.
    PAdic(PAdicContext),
}

impl ScalarContext {
    pub fn abs(&self, x: &Rational) -> PowerValue {
        match self {
            ScalarContext::Real => PowerValue::rational(x.abs()),
            ScalarContext::PAdic(ctx) => ctx.abs(x),
        }
    }

    /// Accepts `real` or `padic:P`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "real" {
            return Ok(ScalarContext::Real);
        }
        if let Some(p) = s.strip_prefix("padic:") {
            let p: u64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad prime in context {s:?}")))?;
            return Ok(ScalarContext::PAdic(PAdicContext::new(p)?));
        }
        Err(Error::Config(format!("unknown context {s:?}; expected real or padic:P")))
    }
}

impl fmt::Display for ScalarContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarContext::Real => write!(f, "real"),
            ScalarContext::PAdic(c) => write!(f, "padic:{}", c.p()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Integers,
    Rationals,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    Archimedean,
    /// `|x| = 1` for `x ≠ 0`.
    Trivial,
    PAdic(PAdicContext),
}

/// The triangle-inequality constant of a halo.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HaloConstant {
    /// `|f − g| ≤ ‖(|f|, |g|)‖_p`.
    Short(PExponent),
    /// `|f − g| ≤ C·max(|f|, |g|)` and `|fg| ≤ D|f||g|`.
    Lipschitz { c: PowerValue, d: PowerValue },
}

impl HaloConstant {
    /// The Lipschitz pair `(C, D)`; a short constant `p` gives `(2^(1/p), 1)`.
    pub fn lipschitz_pair(&self) -> (PowerValue, PowerValue) {
        match self {
            HaloConstant::Short(p) => (p.lipschitz_constant(), PowerValue::one()),
            HaloConstant::Lipschitz { c, d } => (c.clone(), d.clone()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            HaloConstant::Short(p) => json!({"flavor": "short", "p": p.to_string()}),
            HaloConstant::Lipschitz { c, d } => {
                json!({"flavor": "lipschitz", "C": c.to_json(), "D": d.to_json()})
            }
        }
    }
}

impl fmt::Display for HaloConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaloConstant::Short(p) => write!(f, "{p}"),
            HaloConstant::Lipschitz { c, d } => write!(f, "({c}, {d})"),
        }
    }
}

/// A ring with a norm `|x|^power` and a triangle constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HaloDescriptor {
    pub ring: Ring,
    pub norm: NormKind,
    /// The norm is the base absolute value raised to this power.
    pub power: Rational,
    pub constant: HaloConstant,
}

impl HaloDescriptor {
    pub fn new(ring: Ring, norm: NormKind, power: Rational, constant: HaloConstant) -> Result<Self> {
        if !power.is_positive() {
            return Err(Error::Config(format!("norm power {power} must be positive")));
        }
        if let HaloConstant::Lipschitz { c, d } = &constant {
            if c.is_zero() || d.is_zero() {
                return Err(Error::Config("Lipschitz constants must be positive".into()));
            }
        }
        // a power of the trivial norm is the trivial norm
        let power = if norm == NormKind::Trivial { Rational::one() } else { power };
        Ok(HaloDescriptor { ring, norm, power, constant })
    }

    /// `(ℤ, |·|_∞, 1)`.
    pub fn integers() -> Self {
        Self::new(Ring::Integers, NormKind::Archimedean, int(1), HaloConstant::Short(PExponent::one())).unwrap()
    }

    /// `(ℤ, |·|_0, ∞)`.
    pub fn integers_trivial() -> Self {
        Self::new(Ring::Integers, NormKind::Trivial, int(1), HaloConstant::Short(PExponent::Infinite)).unwrap()
    }

    /// `(ℚ, |·|_∞, 1)`, standing in for ℝ.
    pub fn reals() -> Self {
        Self::new(Ring::Rationals, NormKind::Archimedean, int(1), HaloConstant::Short(PExponent::one())).unwrap()
    }

    /// `(ℚ, |·|_p, ∞)`, standing in for ℚ_p.
    pub fn padic(ctx: PAdicContext) -> Self {
        Self::new(Ring::Rationals, NormKind::PAdic(ctx), int(1), HaloConstant::Short(PExponent::Infinite)).unwrap()
    }

    pub fn is_short(&self) -> bool {
        matches!(self.constant, HaloConstant::Short(_))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self.ring {
            Ring::Integers => x.is_integer(),
            Ring::Rationals => true,
        }
    }

    pub fn norm(&self, x: &Rational) -> Result<PowerValue> {
        if !self.contains(x) {
            return Err(Error::NotInRing(format_rational(x)));
        }
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &Rational) -> PowerValue {
        let base = match &self.norm {
            NormKind::Archimedean => PowerValue::rational(x.abs()),
            NormKind::Trivial if x.is_zero() => PowerValue::zero(),
            NormKind::Trivial => PowerValue::one(),
            NormKind::PAdic(ctx) => ctx.abs(x),
        };
        base.pow(&self.power)
    }

    /// Smallest norm of a nonzero ring element, when positive and known.
    pub fn min_nonzero_norm(&self) -> PowerValue {
        match (&self.ring, &self.norm) {
            (Ring::Integers, NormKind::Archimedean) | (_, NormKind::Trivial) => PowerValue::one(),
            _ => PowerValue::zero(),
        }
    }

    /// A lower bound for `|x|` over ring elements with `|x|_∞ ≥ m + 1`.
    pub fn outside_box_bound(&self, m: u64) -> PowerValue {
        match (&self.ring, &self.norm) {
            (Ring::Integers, NormKind::Archimedean) => self.norm_unchecked(&Rational::from_integer((m + 1).into())),
            (_, NormKind::Trivial) => PowerValue::one(),
            _ => PowerValue::zero(),
        }
    }

    pub fn scalar_context(&self) -> Option<ScalarContext> {
        match (&self.norm, self.power.is_one()) {
            (NormKind::Archimedean, true) => Some(ScalarContext::Real),
            (NormKind::PAdic(c), true) => Some(ScalarContext::PAdic(c.clone())),
            _ => None,
        }
    }

    /// Loads `{"ring":"Z","norm":"arch","power":"2","flavor":"short","p":"1/2"}`.
    /// p-adic norms take `"prime"`; the Lipschitz flavor takes `"C"` and `"D"`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| v.get(k).map(json_text).transpose();
        let ring = match field("ring")?.as_deref().unwrap_or("Z") {
            "Z" => Ring::Integers,
            "Q" | "R" | "Qp" => Ring::Rationals,
            r => return Err(Error::Config(format!("unknown ring {r:?}"))),
        };
        let norm = match field("norm")?.as_deref().unwrap_or("arch") {
            "arch" | "archimedean" | "inf" => NormKind::Archimedean,
            "trivial" | "0" => NormKind::Trivial,
            "padic" => {
                let p = field("prime")?.ok_or_else(|| Error::Config("p-adic norm needs \"prime\"".into()))?;
                let p = p.parse().map_err(|_| Error::Config(format!("bad prime {p:?}")))?;
                NormKind::PAdic(PAdicContext::new(p)?)
            }
            n => return Err(Error::Config(format!("unknown norm {n:?}"))),
        };
        let power = match field("power")? {
            Some(s) => parse_rational(&s)?,
            None => Rational::one(),
        };
        let constant = match field("flavor")?.as_deref().unwrap_or("short") {
            "short" => {
                let p = match field("p")? {
                    Some(p) => PExponent::parse(&p)?,
                    None => return Err(Error::Config("short halo needs \"p\"".into())),
                };
                HaloConstant::Short(p)
            }
            "lipschitz" => {
                let c = v.get("C").ok_or_else(|| Error::Config("Lipschitz halo needs \"C\"".into()))?;
                let d = v.get("D").ok_or_else(|| Error::Config("Lipschitz halo needs \"D\"".into()))?;
                HaloConstant::Lipschitz {
                    c: power_from_json(c)?,
                    d: power_from_json(d)?,
                }
            }
            f => return Err(Error::Config(format!("unknown flavor {f:?}"))),
        };
        Self::new(ring, norm, power, constant)
    }

    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("ring".into(), json!(match self.ring { Ring::Integers => "Z", Ring::Rationals => "Q" }));
        match &self.norm {
            NormKind::Archimedean => m.insert("norm".into(), json!("arch")),
            NormKind::Trivial => m.insert("norm".into(), json!("trivial")),
            NormKind::PAdic(c) => {
                m.insert("prime".into(), json!(c.p().to_string()));
                m.insert("norm".into(), json!("padic"))
            }
        };
        m.insert("power".into(), json!(format_rational(&self.power)));
        if let Value::Object(c) = self.constant.to_json() {
            m.extend(c);
        }
        Value::Object(m)
    }
}

impl fmt::Display for HaloDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ring = match (&self.ring, &self.norm) {
            (Ring::Integers, _) => "Z".to_string(),
            (Ring::Rationals, NormKind::PAdic(c)) => format!("Q_{}", c.p()),
            (Ring::Rationals, _) => "Q".to_string(),
        };
        let norm = match &self.norm {
            NormKind::Archimedean => "|.|_inf".to_string(),
            NormKind::Trivial => "|.|_0".to_string(),
            NormKind::PAdic(c) => format!("|.|_{}", c.p()),
        };
        if self.power.is_one() {
            write!(f, "({ring}, {norm}, {})", self.constant)
        } else {
            write!(f, "({ring}, {norm}^{}, {})", self.power, self.constant)
        }
    }
}

fn json_text(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::Config(format!("expected a string or number, got {v}"))),
    }
}

/// A constant given as a rational string or as a PowerValue object.
fn power_from_json(v: &Value) -> Result<PowerValue> {
    match v {
        Value::Object(_) => PowerValue::from_json(v),
        _ => Ok(PowerValue::rational(parse_rational(&json_text(v)?)?)),
    }
}

/// Parses `a..b` (inclusive integer range) or a comma-separated list.
pub fn parse_samples(s: &str) -> Result<Vec<Rational>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| Error::Config(format!("bad range {s:?}")))?;
        let b: i64 = b.trim().parse().map_err(|_| Error::Config(format!("bad range {s:?}")))?;
        if b < a || b - a > 10_000 {
            return Err(Error::Config(format!("range {s:?} is empty or too large")));
        }
        return Ok((a..=b).map(int).collect());
    }
    s.split(',').map(parse_rational).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A comparison of certified intervals could not be decided.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: u8,
    pub name: &'static str,
    pub status: CheckStatus,
    pub cases: usize,
    pub witness: Option<(Rational, Rational)>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub halo: HaloDescriptor,
    pub samples: Vec<Rational>,
    pub checks: Vec<AxiomCheck>,
}

pub const COMPLETENESS_NOTE: &str =
    "completeness is not checkable on finite samples; only closure of sample sums and products is verified";

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    /// The first check that did not pass.
    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.status != CheckStatus::Pass)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "axiom": c.axiom,
                    "name": c.name,
                    "status": match c.status {
                        CheckStatus::Pass => "pass",
                        CheckStatus::Fail => "fail",
                        CheckStatus::Undecided => "undecided",
                    },
                    "cases": c.cases,
                    "witness": c.witness.as_ref().map(|(f, g)| json!([format_rational(f), format_rational(g)])),
                    "detail": c.detail,
                })
            })
            .collect();
        json!({
            "halo": self.halo.to_json(),
            "samples": self.samples.iter().map(format_rational).collect::<Vec<_>>(),
            "checks": checks,
            "completeness": COMPLETENESS_NOTE,
            "passed": self.passed(),
        })
    }
}

struct CheckBuilder {
    axiom: u8,
    name: &'static str,
    cases: usize,
    undecided: Option<((Rational, Rational), String)>,
    failure: Option<((Rational, Rational), String)>,
}

impl CheckBuilder {
    fn new(axiom: u8, name: &'static str) -> Self {
        CheckBuilder { axiom, name, cases: 0, undecided: None, failure: None }
    }

    /// Records `lhs ≤ rhs`; returns false once a violation is known.
    fn le(&mut self, lhs: &PowerValue, rhs: &PowerValue, f: &Rational, g: &Rational, what: impl Fn() -> String) -> bool {
        self.cases += 1;
        match le(lhs, rhs) {
            Some(true) => true,
            Some(false) => {
                self.failure = Some(((f.clone(), g.clone()), format!("{}: {lhs} > {rhs}", what())));
                false
            }
            None => {
                if self.undecided.is_none() {
                    self.undecided = Some(((f.clone(), g.clone()), format!("{}: {lhs} vs {rhs} undecided", what())));
                }
                true
            }
        }
    }

    fn fail(&mut self, f: &Rational, g: &Rational, detail: String) {
        self.failure = Some(((f.clone(), g.clone()), detail));
    }

    fn finish(self) -> AxiomCheck {
        let (status, hit) = match (self.failure, self.undecided) {
            (Some(w), _) => (CheckStatus::Fail, Some(w)),
            (None, Some(w)) => (CheckStatus::Undecided, Some(w)),
            (None, None) => (CheckStatus::Pass, None),
        };
        let (witness, detail) = match hit {
            Some((w, d)) => (Some(w), Some(d)),
            None => (None, None),
        };
        AxiomCheck { axiom: self.axiom, name: self.name, status, cases: self.cases, witness, detail }
    }
}

/// Sorts samples by size, positive before negative, so reported witnesses
/// are the smallest ones.
fn order_samples(mut samples: Vec<Rational>) -> Vec<Rational> {
    for x in [Rational::zero(), Rational::one()] {
        if !samples.contains(&x) {
            samples.push(x);
        }
    }
    samples.sort_by(|a, b| a.abs().cmp(&b.abs()).then_with(|| b.cmp(a)));
    samples.dedup();
    samples
}

/// Checks the halo axioms on all pairs drawn from `samples` (0 and 1 are
/// always added). Completeness is not checkable; see [`COMPLETENESS_NOTE`].
pub fn check_halo_axioms(h: &HaloDescriptor, samples: &[Rational]) -> Result<AxiomReport> {
    if let Some(x) = samples.iter().find(|x| !h.contains(x)) {
        return Err(Error::NotInRing(format_rational(x)));
    }
    let samples = order_samples(samples.to_vec());
    let norms: Vec<PowerValue> = samples.iter().map(|x| h.norm_unchecked(x)).collect();
    let zero = Rational::zero();
    let one = Rational::one();
    let mut checks = Vec::new();

    let mut unit = CheckBuilder::new(1, "unit has norm one");
    unit.cases += 1;
    let n1 = h.norm_unchecked(&one);
    if !n1.is_one() {
        unit.fail(&one, &one, format!("|1| = {n1}"));
    }
    checks.push(unit.finish());

    let mut definite = CheckBuilder::new(2, "norm vanishes only at zero");
    for (x, n) in samples.iter().zip(&norms) {
        definite.cases += 1;
        if n.is_zero() != x.is_zero() {
            definite.fail(x, &zero, format!("|{x}| = {n}"));
            break;
        }
    }
    checks.push(definite.finish());

    let (_, d) = h.constant.lipschitz_pair();
    let combine = |a: &PowerValue, b: &PowerValue| match &h.constant {
        HaloConstant::Short(p) => lp_norm(&[a.clone(), b.clone()], p),
        HaloConstant::Lipschitz { c, .. } => c.mul(&a.max(b)),
    };

    let mut triangle = CheckBuilder::new(3, "triangle inequality");
    'tri: for (f, nf) in samples.iter().zip(&norms) {
        for (g, ng) in samples.iter().zip(&norms) {
            let bound = combine(nf, ng);
            for (h_val, sym) in [(f + g, "+"), (f - g, "-")] {
                let lhs = h.norm_unchecked(&h_val);
                if !triangle.le(&lhs, &bound, f, g, || format!("|{f} {sym} {g}| = |{h_val}|")) {
                    break 'tri;
                }
            }
        }
    }
    checks.push(triangle.finish());

    let mut mult = CheckBuilder::new(4, "submultiplicativity");
    'mul: for (f, nf) in samples.iter().zip(&norms) {
        for (g, ng) in samples.iter().zip(&norms) {
            let lhs = h.norm_unchecked(&(f * g));
            let rhs = d.mul(&nf.mul(ng));
            if !mult.le(&lhs, &rhs, f, g, || format!("|{f} * {g}|")) {
                break 'mul;
            }
        }
    }
    checks.push(mult.finish());

    let mut closure = CheckBuilder::new(5, "closure (completeness not checkable)");
    'clo: for f in &samples {
        for g in &samples {
            closure.cases += 1;
            for v in [f + g, f * g, -f] {
                if !h.contains(&v) {
                    closure.fail(f, g, format!("{v} leaves the ring"));
                    break 'clo;
                }
            }
        }
    }
    checks.push(closure.finish());

    Ok(AxiomReport { halo: h.clone(), samples, checks })
}

/// `Lip(R, |·|, p) = (R, |·|, (2^(1/p), 1))`.
pub fn lip_functor(h: &HaloDescriptor) -> Result<HaloDescriptor> {
    match &h.constant {
        HaloConstant::Short(p) => Ok(HaloDescriptor {
            constant: HaloConstant::Lipschitz { c: p.lipschitz_constant(), d: PowerValue::one() },
            ..h.clone()
        }),
        HaloConstant::Lipschitz { .. } => Err(Error::Config("Lip applies to short halos only".into())),
    }
}

/// `σ_t`: norm ↦ norm^t, `p ↦ p/t`, `(C, D) ↦ (C^t, D^t)`.
pub fn flow_halo(h: &HaloDescriptor, t: &Rational) -> Result<HaloDescriptor> {
    if !t.is_positive() {
        return Err(Error::UnsupportedExponent(format!("flow parameter {t} must be positive")));
    }
    let constant = match &h.constant {
        HaloConstant::Short(p) => HaloConstant::Short(p.div(t)),
        HaloConstant::Lipschitz { c, d } => HaloConstant::Lipschitz { c: c.pow(t), d: d.pow(t) },
    };
    HaloDescriptor::new(h.ring.clone(), h.norm.clone(), &h.power * t, constant)
}

/// Search limits for [`renorm_infimum`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RenormBudget {
    /// Maximum number of parts; defaults to `2|f|`.
    pub max_parts: Option<usize>,
    /// Maximum `|part|_∞`; defaults to `|f|`.
    pub max_part: Option<u64>,
}

impl RenormBudget {
    pub fn resolve(&self, f: u64) -> (usize, u64) {
        let k = self.max_parts.unwrap_or((2 * f).max(1) as usize).max(1);
        let m = self.max_part.unwrap_or(f).max(1);
        (k, m)
    }
}

/// Bounds for `|f|_{H,p} = inf { ‖(|f_i|)‖_p : f = Σ f_i }`, or for the
/// tree-infimum analogue when `constant` is Lipschitz.
///
/// Parts range over `[-M, M]`, at most `K` of them. The lower bound is the
/// minimum of the best value found, `(K+1)^(1/p)` (decompositions with
/// more parts), and `|M+1|_H` (decompositions using a larger part).
pub fn renorm_infimum(
    h: &HaloDescriptor,
    constant: &HaloConstant,
    f: &Rational,
    budget: &RenormBudget,
) -> Result<BoundsCertificate> {
    if h.ring != Ring::Integers || !matches!(h.norm, NormKind::Archimedean | NormKind::Trivial) {
        return Err(Error::UnsupportedContext(format!(
            "re-normalization search needs ℤ with an archimedean or trivial norm, got {h}"
        )));
    }
    if !f.is_integer() {
        return Err(Error::NotInRing(format_rational(f)));
    }
    if f.is_zero() {
        return Ok(BoundsCertificate::exact(
            PowerValue::zero(),
            Some(Witness::Decomposition { target: f.clone(), parts: vec![] }),
        ));
    }
    let fa = f.abs().to_integer().to_u64().ok_or_else(|| Error::Budget("target too large".into()))?;
    let (k, m) = budget.resolve(fa);
    match constant {
        HaloConstant::Short(p) => Ok(short_renorm(h, p, f.to_integer().to_i64().unwrap(), k, m as i64)),
        HaloConstant::Lipschitz { c, .. } => {
            let lattice = NormedLattice::new(1, h.clone(), LatticeNorm::Lp(PExponent::Infinite))?;
            tree_norm(&[(&lattice, vec![f.clone()])], c, &TreeBudget { max_leaves: Some(k), radius: Some(m) })
        }
    }
}

fn short_renorm(h: &HaloDescriptor, p: &PExponent, f: i64, k: usize, m: i64) -> BoundsCertificate {
    let parts: Vec<i64> = (-m..=m).filter(|&x| x != 0).collect();
    let norms: Vec<PowerValue> = parts.iter().map(|&x| h.norm_unchecked(&int(x))).collect();
    // search costs in floating point: Σ|x|^p, or max for p = ∞
    let cost: Vec<f64> = norms
        .iter()
        .map(|n| match p {
            PExponent::Finite(p) => n.to_f64().powf(p.to_f64().unwrap()),
            PExponent::Infinite => n.to_f64(),
        })
        .collect();

    let trivial = vec![f];
    let mut search = RenormSearch {
        p,
        parts: &parts,
        norms: &norms,
        cost: &cost,
        k,
        m,
        best: None,
        stack: Vec::new(),
    };
    // seed with the trivial decomposition when it lies in the search space
    if f.abs() <= m {
        search.offer(&trivial);
    } else {
        let v = h.norm_unchecked(&int(f));
        search.best = Some((v.to_f64_cost(p), v, trivial));
    }
    search.dfs(0, f, 0.0);
    let (_, upper, witness) = search.best.unwrap();

    let kp1 = PowerValue::from_int(k as i64 + 1);
    let many_parts = match p {
        PExponent::Finite(p) => kp1.pow(&p.recip()).mul(&h.min_nonzero_norm()),
        PExponent::Infinite => h.min_nonzero_norm(),
    };
    let big_part = h.outside_box_bound(m as u64);
    let lower = upper.min(&many_parts).min(&big_part);
    BoundsCertificate {
        lower,
        upper,
        witness: Some(Witness::Decomposition {
            target: int(f),
            parts: witness.into_iter().map(int).collect(),
        }),
    }
}

trait CostF64 {
    fn to_f64_cost(&self, p: &PExponent) -> f64;
}

impl CostF64 for PowerValue {
    fn to_f64_cost(&self, p: &PExponent) -> f64 {
        match p {
            PExponent::Finite(p) => self.to_f64().powf(p.to_f64().unwrap()),
            PExponent::Infinite => self.to_f64(),
        }
    }
}

struct RenormSearch<'a> {
    p: &'a PExponent,
    parts: &'a [i64],
    norms: &'a [PowerValue],
    cost: &'a [f64],
    k: usize,
    m: i64,
    best: Option<(f64, PowerValue, Vec<i64>)>,
    stack: Vec<usize>,
}

const SLACK: f64 = 1e-9;

impl RenormSearch<'_> {
    fn combine(&self, acc: f64, c: f64) -> f64 {
        match self.p {
            PExponent::Finite(_) => acc + c,
            PExponent::Infinite => acc.max(c),
        }
    }

    fn offer(&mut self, parts: &[i64]) {
        let idx: Vec<usize> = parts
            .iter()
            .map(|x| self.parts.iter().position(|y| y == x).unwrap())
            .collect();
        let values: Vec<PowerValue> = idx.iter().map(|&i| self.norms[i].clone()).collect();
        let c = idx.iter().fold(0.0, |a, &i| self.combine(a, self.cost[i]));
        let v = lp_norm(&values, self.p);
        let better = match &self.best {
            None => true,
            Some((_, b, _)) => match cmp_power(&v, b) {
                Some(o) => o == Ordering::Less,
                None => v.bounds().1 < b.bounds().1,
            },
        };
        if better {
            self.best = Some((c, v, parts.to_vec()));
        }
    }

    /// Extends a nondecreasing multiset of parts, starting at index `from`.
    fn dfs(&mut self, from: usize, rest: i64, acc: f64) {
        let used = self.stack.len();
        if used > 0 && rest == 0 {
            let parts: Vec<i64> = self.stack.iter().map(|&i| self.parts[i]).collect();
            self.offer(&parts);
        }
        if used == self.k {
            return;
        }
        let slots = (self.k - used) as i64;
        for i in from..self.parts.len() {
            let v = self.parts[i];
            // j more parts, each in [v, m], must be able to sum to rest
            if v > 0 && v > rest {
                break;
            }
            if !(1..=slots).any(|j| j * v <= rest && rest <= j * self.m) {
                continue;
            }
            let next = self.combine(acc, self.cost[i]);
            if let Some((b, _, _)) = &self.best {
                if next > b * (1.0 + SLACK) {
                    continue;
                }
            }
            self.stack.push(i);
            self.dfs(i, rest - v, next);
            self.stack.pop();
        }
    }
}
