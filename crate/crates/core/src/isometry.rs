//! The matrix monoid with involution `End(V) × End(V^∨)`, the dual-basis
//! norm on its dual, membership certificates for the short isometry groups
//! `K_n` and `K_n(φ)`, enumeration of `K_n(ℤ)`, and the defining relations.
//!
//! A pair `(U, W)` holds the matrix of an endomorphism of `V` and the
//! matrix, in the dual basis, of an endomorphism of `V^∨`. The involution is
//! `(U, W) ↦ (Wᵀ, Uᵀ)`, so `GL_n` embeds as `U ↦ (U, U^{-T})`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::halo::{HaloConstant, HaloDescriptor, ScalarContext};
use crate::lattice::{spectral_norm, sqrt_enclosure, BoundsCertificate, CustomNorm, NormedLattice};
use crate::linalg::{is_positive_semidefinite, QMatrix};
use crate::norms::{lp_norm, PExponent};
use crate::poly::{charpoly, real_roots};
use crate::scalar::{format_rational, int, le, PAdicContext, PowerValue, Rational};
use crate::tensor::{quotient_norm, QuotientBudget};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixPair {
    pub u: QMatrix,
    pub w: QMatrix,
}

impl MatrixPair {
    pub fn new(u: QMatrix, w: QMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare(u.rows(), u.cols()));
        }
        if !w.is_square() {
            return Err(Error::NotSquare(w.rows(), w.cols()));
        }
        if u.rows() != w.rows() {
            return Err(Error::Dimension(format!("pair of sizes {} and {}", u.rows(), w.rows())));
        }
        Ok(MatrixPair { u, w })
    }

    /// `U ↦ (U, U^{-T})`.
    pub fn from_invertible(u: &QMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare(u.rows(), u.cols()));
        }
        let inv = u.inverse().ok_or(Error::Singular)?;
        Ok(MatrixPair { u: u.clone(), w: inv.transpose() })
    }

    pub fn identity(n: usize) -> Self {
        MatrixPair { u: QMatrix::identity(n), w: QMatrix::identity(n) }
    }

    pub fn zero(n: usize) -> Self {
        MatrixPair { u: QMatrix::zeros(n, n), w: QMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    /// The componentwise product.
    pub fn mul(&self, o: &Self) -> Self {
        MatrixPair { u: self.u.mul(&o.u), w: self.w.mul(&o.w) }
    }

    pub fn add(&self, o: &Self) -> Self {
        MatrixPair { u: self.u.add(&o.u), w: self.w.add(&o.w) }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        MatrixPair { u: self.u.scale(s), w: self.w.scale(s) }
    }

    /// `a·σ(a) = σ(a)·a = 1`, i.e. `U·Wᵀ = Wᵀ·U = I`.
    pub fn is_inverse_pair(&self) -> bool {
        let wt = self.w.transpose();
        self.u.mul(&wt).is_identity() && wt.mul(&self.u).is_identity()
    }

    /// `B₀` entries then `B₁` entries, row-major.
    pub fn flatten(&self) -> Vec<Rational> {
        self.u.entries().iter().chain(self.w.entries()).cloned().collect()
    }

    pub fn unflatten(n: usize, v: &[Rational]) -> Result<Self> {
        if v.len() != 2 * n * n {
            return Err(Error::Dimension(format!("{} coordinates for n = {n}", v.len())));
        }
        Ok(MatrixPair {
            u: QMatrix::from_flat(n, n, v[..n * n].to_vec()),
            w: QMatrix::from_flat(n, n, v[n * n..].to_vec()),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({"U": self.u.to_json(), "W": self.w.to_json()})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::Config(format!("pair needs {k:?}")));
        Self::new(QMatrix::from_json(get("U")?)?, QMatrix::from_json(get("W")?)?)
    }
}

/// `(U, W) ↦ (Wᵀ, Uᵀ)`.
pub fn involution(pair: &MatrixPair) -> MatrixPair {
    MatrixPair { u: pair.w.transpose(), w: pair.u.transpose() }
}

/// The norm of `M(n, S, q)`: the larger of the operator norms of `U` on
/// `ℓ^q` and of `W` on the dual space. Over ℝ the dual of `ℓ^q` is
/// `ℓ^{q*}`, and `‖W‖_{q*} = ‖Wᵀ‖_q`; over ℚ_p only `q = ∞` is supported
/// and both norms are the largest entry.
pub fn pair_norm(pair: &MatrixPair, ctx: &ScalarContext, q: &PExponent) -> Result<PowerValue> {
    let op = |a: &QMatrix| crate::lattice::operator_norm(a, q, ctx).map(|c| c.upper);
    let wn = match ctx {
        ScalarContext::Real => op(&pair.w.transpose())?,
        ScalarContext::PAdic(_) => op(&pair.w)?,
    };
    Ok(op(&pair.u)?.max(&wn))
}

/// A dual basis vector `e_{i,j,b}` (1-based indices), reading entry `(i, j)`
/// of `B_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DualBasisElement {
    pub i: usize,
    pub j: usize,
    pub b: u8,
}

impl DualBasisElement {
    pub fn new(i: usize, j: usize, b: u8, n: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > n || j > n || b > 1 {
            return Err(Error::Dimension(format!("e_{{{i},{j},{b}}} for n = {n}")));
        }
        Ok(DualBasisElement { i, j, b })
    }

    pub fn all(n: usize) -> Vec<Self> {
        let mut v = Vec::with_capacity(2 * n * n);
        for b in 0..2 {
            for i in 1..=n {
                for j in 1..=n {
                    v.push(DualBasisElement { i, j, b });
                }
            }
        }
        v
    }

    pub fn evaluate(&self, pair: &MatrixPair) -> Rational {
        let m = if self.b == 0 { &pair.u } else { &pair.w };
        m.get(self.i - 1, self.j - 1).clone()
    }

    /// The basis pair `E_{i,j,b}` this functional is dual to.
    pub fn dual_vector(&self, n: usize) -> MatrixPair {
        let mut p = MatrixPair::zero(n);
        let unit = QMatrix::unit(n, self.i - 1, self.j - 1);
        if self.b == 0 {
            p.u = unit;
        } else {
            p.w = unit;
        }
        p
    }
}

impl fmt::Display for DualBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x_{{{},{},{}}}", self.i, self.j, self.b)
    }
}

/// `⟨C, (U, W)⟩ = Σ C₀[i,j]·U[i,j] + Σ C₁[i,j]·W[i,j]`.
pub fn pairing(c: &MatrixPair, a: &MatrixPair) -> Rational {
    c.flatten().iter().zip(a.flatten()).map(|(x, y)| x * y).sum()
}

/// Sum of singular values.
pub fn nuclear_norm(a: &QMatrix) -> PowerValue {
    if a.is_zero() {
        return PowerValue::zero();
    }
    let roots = real_roots(&charpoly(&a.gram()), crate::scalar::DEFAULT_PRECISION_BITS + 4);
    PowerValue::sum(roots.into_iter().flat_map(|(r, mult)| {
        let s = sqrt_enclosure(&r);
        std::iter::repeat(s).take(mult)
    }))
}

/// The norm of `c = Σ C_b[i,j]·e_{i,j,b}` as a functional on
/// `M(n, ℝ, 2)`: the dual of the max of two spectral norms is the sum of
/// the two nuclear norms.
pub fn ckn_norm(c: &MatrixPair) -> PowerValue {
    nuclear_norm(&c.u).add(&nuclear_norm(&c.w))
}

/// The norm of a functional `f` on `C(K_n)`, given by its values
/// `F_b[i,j] = f(e_{i,j,b})`: the real `M(n, ℝ, 2)` norm of `(F₀, F₁)`.
pub fn ckn_dual_norm(f: &MatrixPair) -> PowerValue {
    spectral_norm(&f.u).max(&spectral_norm(&f.w))
}

/// `C(K_n)` as a normed ℤ-lattice of rank `2n²` with constants `(2, 1)`.
pub fn ckn_lattice(n: usize) -> NormedLattice {
    let norm = CustomNorm {
        name: format!("C(K_{n})"),
        eval: Arc::new(move |x: &[Rational]| ckn_norm(&MatrixPair::unflatten(n, x).expect("rank checked"))),
        // a nuclear norm dominates the largest entry
        min_nonzero: PowerValue::one(),
        outside_box: Arc::new(|m| PowerValue::rational(Rational::from_integer((m + 1).into()))),
    };
    NormedLattice::custom(
        2 * n * n,
        HaloDescriptor::integers(),
        norm,
        HaloConstant::Lipschitz { c: PowerValue::from_int(2), d: PowerValue::one() },
    )
}

/// Bounds for `|e_{i,j,b}|_{C(K_n)}`: the upper bound from entry extraction
/// `|B[i,j]| = |⟨δᵢ, B δⱼ⟩| ≤ ‖δᵢ‖₂·‖B‖·‖δⱼ‖₂`, the lower bound from
/// evaluating at `E_{i,j,b}`.
pub fn dual_basis_norm(e: &DualBasisElement, n: usize) -> Result<BoundsCertificate> {
    DualBasisElement::new(e.i, e.j, e.b, n)?;
    let two = PExponent::Finite(int(2));
    let delta = |k: usize| -> Vec<PowerValue> {
        (1..=n).map(|l| if l == k { PowerValue::one() } else { PowerValue::zero() }).collect()
    };
    let upper = lp_norm(&delta(e.i), &two).mul(&lp_norm(&delta(e.j), &two));
    let probe = e.dual_vector(n);
    let value = PowerValue::rational(e.evaluate(&probe).abs());
    let probe_norm = pair_norm(&probe, &ScalarContext::Real, &two)?;
    let lower = match probe_norm.as_rational() {
        Some(r) if !r.is_zero() => value.scale(&r.recip()),
        _ => return Err(Error::Inexact(format!("probe norm {probe_norm}"))),
    };
    if le(&lower, &upper) != Some(true) {
        return Err(Error::Inexact(format!("bounds {lower} > {upper}")));
    }
    Ok(BoundsCertificate { lower, upper, witness: None })
}

/// `ι(f, s) = (s·F₀, s·F₁)` for `f` given by its dual-basis values.
pub fn iota(f: &MatrixPair, s: &Rational) -> MatrixPair {
    f.scale(s)
}

/// `n^(1 + 1/q)·‖f‖·|s|`.
pub fn iota_bound(f: &MatrixPair, s: &Rational, q: &PExponent) -> PowerValue {
    let n = PowerValue::from_int(f.n() as i64);
    n.pow(&(Rational::one() + q.reciprocal()))
        .mul(&ckn_dual_norm(f))
        .scale(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MembershipContext {
    Real,
    PAdic(PAdicContext),
    Int,
}

impl MembershipContext {
    /// Accepts `real`, `padic:P` or `int`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "int" => Ok(MembershipContext::Int),
            other => Ok(match ScalarContext::parse(other)? {
                ScalarContext::Real => MembershipContext::Real,
                ScalarContext::PAdic(c) => MembershipContext::PAdic(c),
            }),
        }
    }
}

impl fmt::Display for MembershipContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MembershipContext::Real => write!(f, "real"),
            MembershipContext::PAdic(c) => write!(f, "padic:{}", c.p()),
            MembershipContext::Int => write!(f, "int"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCheck {
    pub name: String,
    pub passed: bool,
    /// Decided by exact rational arithmetic.
    pub exact: bool,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub member: bool,
    pub context: String,
    pub checks: Vec<MembershipCheck>,
}

impl MembershipCertificate {
    fn from_checks(context: String, checks: Vec<MembershipCheck>) -> Self {
        MembershipCertificate { member: checks.iter().all(|c| c.passed), context, checks }
    }

    pub fn all_exact(&self) -> bool {
        self.checks.iter().all(|c| c.exact)
    }

    /// The first violated condition of a non-member.
    pub fn violation(&self) -> Option<&MembershipCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": if self.member { "member" } else { "non-member" },
            "context": self.context,
            "checks": self.checks.iter().map(|c| json!({
                "condition": c.name,
                "passed": c.passed,
                "exact": c.exact,
                "evidence": c.evidence,
            })).collect::<Vec<_>>(),
        })
    }
}

fn check(name: impl Into<String>, passed: bool, evidence: impl Into<String>) -> MembershipCheck {
    MembershipCheck { name: name.into(), passed, exact: true, evidence: evidence.into() }
}

fn flow_label(t: &Rational) -> String {
    if t.is_one() {
        String::new()
    } else {
        format!(" (flow t = {})", format_rational(t))
    }
}

/// Decides `‖A‖₂^t ≤ b` exactly as `b^(2/t)·I − AᵀA ⪰ 0`, when `b^(2/t)`
/// is rational.
pub fn spectral_norm_pow_le(a: &QMatrix, t: &Rational, b: &PowerValue) -> Option<bool> {
    let r = b.pow(&(int(2) / t));
    let r = r.as_rational()?;
    let n = a.cols();
    Some(is_positive_semidefinite(&QMatrix::identity(n).scale(r).sub(&a.gram())).expect("square"))
}

/// Norm conditions of the pair in `M(n, S, q)` for the context, with every
/// norm raised to the flow parameter `t` and compared with `1 = 1^t`.
fn norm_checks(pair: &MatrixPair, ctx: &MembershipContext, t: &Rational) -> Vec<MembershipCheck> {
    let one = PowerValue::one().pow(t);
    let label = flow_label(t);
    let mut out = Vec::new();
    for (slot, m) in [("U", &pair.u), ("W", &pair.w)] {
        match ctx {
            MembershipContext::Real | MembershipContext::Int => {
                let ok = spectral_norm_pow_le(m, t, &one).expect("1^(2/t) is rational");
                out.push(check(
                    format!("|{slot}|_l2^t <= 1{label}"),
                    ok,
                    format!("|{slot}|_l2 = {}; decided by PSD of I - {slot}^T {slot}", spectral_norm(m)),
                ));
            }
            MembershipContext::PAdic(p) => {
                let vals: Vec<String> = m
                    .entries()
                    .iter()
                    .map(|x| p.valuation(x).map_or("inf".to_string(), |v| v.to_string()))
                    .collect();
                let norm = PowerValue::max_of(m.entries().iter().map(|x| p.abs(x)).collect::<Vec<_>>().iter()).pow(t);
                let ok = le(&norm, &one).expect("exact p-adic norms");
                out.push(check(
                    format!("|{slot}|_p^t <= 1{label}"),
                    ok,
                    format!("entry valuations [{}], norm^t = {norm}", vals.join(", ")),
                ));
            }
        }
    }
    out
}

fn pair_checks(pair: &MatrixPair, ctx: &MembershipContext, t: &Rational) -> Vec<MembershipCheck> {
    let wt = pair.w.transpose();
    let res = pair.u.mul(&wt).sub(&QMatrix::identity(pair.n())).max_abs_entry();
    let res2 = wt.mul(&pair.u).sub(&QMatrix::identity(pair.n())).max_abs_entry();
    let mut v = vec![check(
        "a*sigma(a) = sigma(a)*a = 1",
        res.is_zero() && res2.is_zero(),
        format!("max |U W^T - I| = {}, max |W^T U - I| = {}", format_rational(&res), format_rational(&res2)),
    )];
    v.extend(norm_checks(pair, ctx, t));
    v
}

/// Whether the pair is a short isometry over the context, with every norm
/// taken in the flowed halo `σ_t`.
pub fn pair_membership(pair: &MatrixPair, ctx: &MembershipContext, t: &Rational) -> Result<MembershipCertificate> {
    if !t.is_positive() {
        return Err(Error::UnsupportedExponent(format!("flow parameter {t} must be positive")));
    }
    let mut checks = Vec::new();
    if *ctx == MembershipContext::Int {
        let integral = pair.u.is_integral() && pair.w.is_integral();
        checks.push(check("integral entries", integral, if integral { "yes" } else { "non-integral entry" }));
    }
    checks.extend(pair_checks(pair, ctx, t));
    Ok(MembershipCertificate::from_checks(ctx.to_string(), checks))
}

fn group_pair(u: &QMatrix) -> Result<std::result::Result<MatrixPair, MembershipCheck>> {
    if !u.is_square() {
        return Err(Error::NotSquare(u.rows(), u.cols()));
    }
    let det = u.det();
    Ok(if det.is_zero() {
        Err(check("invertible", false, "det = 0"))
    } else {
        Ok(MatrixPair::from_invertible(u)?)
    })
}

/// `K_n(ℝ) ≅ O_n(ℝ)`: `U` is a member iff `UᵀU = I`, certified by the norm
/// conditions on `(U, U^{-T})`.
pub fn siso_membership_real(u: &QMatrix, t: &Rational) -> Result<MembershipCertificate> {
    let pair = match group_pair(u)? {
        Ok(p) => p,
        Err(c) => return Ok(MembershipCertificate::from_checks("real".into(), vec![c])),
    };
    let mut cert = pair_membership(&pair, &MembershipContext::Real, t)?;
    let gram = u.gram().sub(&QMatrix::identity(u.rows())).max_abs_entry();
    cert.checks.insert(0, check("U^T U = I", gram.is_zero(), format!("max |U^T U - I| = {}", format_rational(&gram))));
    cert.member = cert.checks.iter().all(|c| c.passed);
    Ok(cert)
}

/// `K_n(ℚ_p) ≅ GL_n(ℤ_p)`: entries of valuation ≥ 0 and a unit determinant.
pub fn siso_membership_padic(u: &QMatrix, p: &PAdicContext, t: &Rational) -> Result<MembershipCertificate> {
    let ctx = MembershipContext::PAdic(p.clone());
    let pair = match group_pair(u)? {
        Ok(pair) => pair,
        Err(c) => return Ok(MembershipCertificate::from_checks(ctx.to_string(), vec![c])),
    };
    let mut cert = pair_membership(&pair, &ctx, t)?;
    let v = p.valuation(&u.det()).unwrap();
    cert.checks.insert(0, check("v_p(det U) = 0", v == 0, format!("v_{}(det U) = {v}", p.p())));
    cert.member = cert.checks.iter().all(|c| c.passed);
    Ok(cert)
}

/// `K_n(ℤ)`: integral `U` with `det U = ±1` and `UᵀU = I`.
pub fn siso_membership_int(u: &QMatrix, t: &Rational) -> Result<MembershipCertificate> {
    if !u.is_square() {
        return Err(Error::NotSquare(u.rows(), u.cols()));
    }
    let det = u.det();
    let mut checks = vec![
        check("integral entries", u.is_integral(), if u.is_integral() { "yes" } else { "non-integral entry" }),
        check("det U = +-1", det.abs().is_one(), format!("det U = {}", format_rational(&det))),
    ];
    if det.is_zero() {
        return Ok(MembershipCertificate::from_checks("int".into(), checks));
    }
    let gram = u.gram().sub(&QMatrix::identity(u.rows())).max_abs_entry();
    checks.push(check("U^T U = I", gram.is_zero(), format!("max |U^T U - I| = {}", format_rational(&gram))));
    let pair = MatrixPair::from_invertible(u)?;
    checks.extend(pair_membership(&pair, &MembershipContext::Int, t)?.checks.into_iter().skip(1));
    Ok(MembershipCertificate::from_checks("int".into(), checks))
}

pub fn siso_membership(u: &QMatrix, ctx: &MembershipContext, t: &Rational) -> Result<MembershipCertificate> {
    match ctx {
        MembershipContext::Real => siso_membership_real(u, t),
        MembershipContext::PAdic(p) => siso_membership_padic(u, p, t),
        MembershipContext::Int => siso_membership_int(u, t),
    }
}

/// All `U ∈ K_n(ℤ)`, i.e. integer matrices with `UᵀU = I`, in lexicographic
/// order of their entries. Orthonormal integer rows have entries in
/// `{-1, 0, 1}`, so rows are chosen from that cube, pruned by orthonormality.
pub fn enumerate_kn_z(n: usize) -> Result<Vec<QMatrix>> {
    if !(1..=4).contains(&n) {
        return Err(Error::Config(format!("enumeration supports 1 <= n <= 4, got {n}")));
    }
    let cube: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|mut k| {
            let mut v = vec![0i64; n];
            for x in v.iter_mut().rev() {
                *x = (k % 3) as i64 - 1;
                k /= 3;
            }
            v
        })
        .collect();
    let dot = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();
    let units: Vec<&Vec<i64>> = cube.iter().filter(|r| dot(r, r) == 1).collect();

    fn dfs<'a>(rows: &mut Vec<&'a Vec<i64>>, units: &[&'a Vec<i64>], n: usize, dot: &dyn Fn(&[i64], &[i64]) -> i64, out: &mut Vec<QMatrix>) {
        if rows.len() == n {
            let m: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            out.push(QMatrix::from_i64(&m));
            return;
        }
        for r in units {
            if rows.iter().all(|q| dot(q, r) == 0) {
                rows.push(r);
                dfs(rows, units, n, dot, out);
                rows.pop();
            }
        }
    }
    let mut out = Vec::new();
    dfs(&mut Vec::new(), &units, n, &dot, &mut out);
    out.sort_by(|a, b| a.entries().cmp(b.entries()));
    out.dedup();
    Ok(out)
}

/// An integer polynomial in the coordinate functions `x_{i,j,b}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    /// Monomials with sorted variables, sorted and merged.
    pub terms: Vec<(Vec<DualBasisElement>, i64)>,
}

impl Relation {
    fn normalize(mut terms: Vec<(Vec<DualBasisElement>, i64)>) -> Self {
        for (m, _) in terms.iter_mut() {
            m.sort();
        }
        terms.sort();
        let mut merged: Vec<(Vec<DualBasisElement>, i64)> = Vec::new();
        for (m, c) in terms {
            match merged.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => merged.push((m, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0);
        Relation { terms: merged }
    }

    pub fn evaluate(&self, pair: &MatrixPair) -> Rational {
        self.terms
            .iter()
            .map(|(m, c)| m.iter().fold(int(*c), |acc, e| acc * e.evaluate(pair)))
            .sum()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.len()).max().unwrap_or(0)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else { "+" };
            if k == 0 {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            if m.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            let vars: Vec<String> = m.iter().map(|e| e.to_string()).collect();
            write!(f, "{}", vars.join("*"))?;
        }
        Ok(())
    }
}

/// Comultiplication on the dual basis: `Δ(e_{i,j,b}) = Σ_k e_{i,k,b} ⊗ e_{k,j,b}`.
fn comultiply(e: &DualBasisElement, n: usize) -> Vec<(DualBasisElement, DualBasisElement)> {
    (1..=n)
        .map(|k| (DualBasisElement { i: e.i, j: k, b: e.b }, DualBasisElement { i: k, j: e.j, b: e.b }))
        .collect()
}

/// The dual involution: `σ(e_{i,j,b}) = e_{j,i,1-b}`.
fn sigma(e: &DualBasisElement) -> DualBasisElement {
    DualBasisElement { i: e.j, j: e.i, b: 1 - e.b }
}

/// The counit: evaluation at the identity pair.
fn counit(e: &DualBasisElement) -> i64 {
    (e.i == e.j) as i64
}

/// The relations `∇((1 ⊗ σ)Δc) − η(c)` and `∇((σ ⊗ 1)Δc) − η(c)` for
/// `c = e_{i,j,0}`, encoding `a·σ(a) = σ(a)·a = 1`; duplicates removed.
pub fn generate_relations(n: usize) -> Result<Vec<Relation>> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    let mut out: Vec<Relation> = Vec::new();
    let mut seen = BTreeSet::new();
    for side in [0, 1] {
        for i in 1..=n {
            for j in 1..=n {
                let c = DualBasisElement { i, j, b: 0 };
                let mut terms: Vec<(Vec<DualBasisElement>, i64)> = comultiply(&c, n)
                    .into_iter()
                    .map(|(x, y)| if side == 0 { (vec![x, sigma(&y)], 1) } else { (vec![sigma(&x), y], 1) })
                    .collect();
                terms.push((vec![], -counit(&c)));
                let r = Relation::normalize(terms);
                if seen.insert(r.clone()) {
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

/// A nondegenerate integer bilinear form `φ(x, y) = xᵀΦy`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    phi: QMatrix,
    phi_inv: QMatrix,
}

impl BilinearForm {
    pub fn new(phi: QMatrix) -> Result<Self> {
        if !phi.is_square() {
            return Err(Error::NotSquare(phi.rows(), phi.cols()));
        }
        if !phi.is_integral() {
            return Err(Error::Config("bilinear form must have integer entries".into()));
        }
        let phi_inv = phi.inverse().ok_or(Error::Singular)?;
        Ok(BilinearForm { phi, phi_inv })
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.phi
    }

    pub fn n(&self) -> usize {
        self.phi.rows()
    }

    /// `σ_φ(U) = Φ^{-1} Uᵀ Φ`.
    pub fn sigma(&self, u: &QMatrix) -> QMatrix {
        self.phi_inv.mul(&u.transpose()).mul(&self.phi)
    }

    /// `U ↦ (U, σ_φ(U)ᵀ)`.
    pub fn embed(&self, u: &QMatrix) -> MatrixPair {
        MatrixPair { u: u.clone(), w: self.sigma(u).transpose() }
    }

    /// The dual of [`Self::embed`]: `(B₀, B₁) ↦ B₀ + Φ B₁ Φ^{-1}`.
    pub fn project(&self, c: &MatrixPair) -> QMatrix {
        c.u.add(&self.phi.mul(&c.w).mul(&self.phi_inv))
    }

    /// The projection as an `n² × 2n²` matrix on flattened coordinates.
    pub fn projection_matrix(&self) -> QMatrix {
        let n = self.n();
        let mut m = QMatrix::zeros(n * n, 2 * n * n);
        for (col, e) in DualBasisElement::all(n).iter().enumerate() {
            let img = self.project(&e.dual_vector(n));
            for (row, x) in img.entries().iter().enumerate() {
                m.set(row, col, x.clone());
            }
        }
        m
    }
}

/// `K_n(φ)`: `U` preserves `φ` (`UᵀΦU = Φ`) and the embedded pair
/// `(U, σ_φ(U)ᵀ)` is a short isometry over the context.
pub fn siso_phi_membership(
    u: &QMatrix,
    phi: &BilinearForm,
    ctx: &MembershipContext,
    t: &Rational,
) -> Result<MembershipCertificate> {
    if u.rows() != phi.n() || !u.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix for a form of size {}", u.rows(), u.cols(), phi.n())));
    }
    let res = u.transpose().mul(phi.matrix()).mul(u).sub(phi.matrix()).max_abs_entry();
    let mut checks = vec![check(
        "U^T Phi U = Phi",
        res.is_zero(),
        format!("max |U^T Phi U - Phi| = {}", format_rational(&res)),
    )];
    let pair = phi.embed(u);
    let member = pair_membership(&pair, ctx, t)?;
    checks.extend(member.checks.into_iter().map(|mut c| {
        c.name = format!("embedded pair: {}", c.name);
        c
    }));
    Ok(MembershipCertificate::from_checks(format!("{ctx}, phi"), checks))
}

/// Bounds for `‖c‖_φ`, the quotient of the `C(K_n)` norm along the
/// projection dual to `U ↦ (U, σ_φ(U)ᵀ)`.
pub fn phi_quotient_norm(c: &QMatrix, phi: &BilinearForm, budget: &QuotientBudget) -> Result<BoundsCertificate> {
    let n = phi.n();
    if c.rows() != n || c.cols() != n {
        return Err(Error::Dimension("functional size does not match the form".into()));
    }
    quotient_norm(c.entries(), &phi.projection_matrix(), &ckn_lattice(n), budget)
}
