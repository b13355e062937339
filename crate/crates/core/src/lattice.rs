//! Finite-rank normed lattices over a halo: direct-sum norms (ℓ^p and the
//! binary-tree infimum), free-module norms, operator norms and the
//! boundedness criterion.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::halo::{HaloConstant, HaloDescriptor, Ring, ScalarContext};
use crate::linalg::{rational_from_json, QMatrix};
use crate::norms::{lp_norm, PExponent};
use crate::poly::{largest_eigenvalue, RootEnclosure};
use crate::scalar::{
    cmp_power, format_rational, int, le, psd_leq_one, root_bounds, PowerValue, Rational, DEFAULT_PRECISION_BITS,
};

/// A finite binary tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BinaryTree<T> {
    Leaf(T),
    Node(Box<BinaryTree<T>>, Box<BinaryTree<T>>),
}

impl<T> BinaryTree<T> {
    pub fn node(a: BinaryTree<T>, b: BinaryTree<T>) -> Self {
        BinaryTree::Node(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<&T> {
        match self {
            BinaryTree::Leaf(x) => vec![x],
            BinaryTree::Node(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BinaryTree::Leaf(_) => 0,
            BinaryTree::Node(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn map<U>(&self, f: &impl Fn(&T) -> U) -> BinaryTree<U> {
        match self {
            BinaryTree::Leaf(x) => BinaryTree::Leaf(f(x)),
            BinaryTree::Node(a, b) => BinaryTree::node(a.map(f), b.map(f)),
        }
    }

    pub fn to_json(&self, leaf: &impl Fn(&T) -> Value) -> Value {
        match self {
            BinaryTree::Leaf(x) => leaf(x),
            BinaryTree::Node(a, b) => json!([a.to_json(leaf), b.to_json(leaf)]),
        }
    }
}

/// `‖leaf‖ = s`, `‖(t₀, t₁)‖ = C·max(‖t₀‖, ‖t₁‖)`.
pub fn tree_valuation(t: &BinaryTree<PowerValue>, c: &PowerValue) -> PowerValue {
    match t {
        BinaryTree::Leaf(s) => s.clone(),
        BinaryTree::Node(a, b) => c.mul(&tree_valuation(a, c).max(&tree_valuation(b, c))),
    }
}

/// A leaf of a direct-sum tree: an element of one summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeLeaf {
    pub summand: usize,
    pub element: Vec<Rational>,
}

/// Evidence for the upper bound of a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `target = Σ parts`.
    Decomposition { target: Rational, parts: Vec<Rational> },
    Tree(BinaryTree<TreeLeaf>),
    /// `target = Σ element ⊗ scalar`.
    Presentation(Vec<(Vec<Rational>, Rational)>),
    /// A source vector mapping onto the target.
    Preimage(Vec<Rational>),
}

fn vec_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(format_rational(x))).collect())
}

impl Witness {
    pub fn to_json(&self) -> Value {
        match self {
            Witness::Decomposition { target, parts } => json!({
                "kind": "decomposition",
                "target": format_rational(target),
                "parts": vec_json(parts),
            }),
            Witness::Tree(t) => json!({
                "kind": "tree",
                "leaves": t.leaves().len(),
                "tree": t.to_json(&|l: &TreeLeaf| json!({"summand": l.summand, "element": vec_json(&l.element)})),
            }),
            Witness::Presentation(terms) => json!({
                "kind": "presentation",
                "terms": terms
                    .iter()
                    .map(|(f, s)| json!({"element": vec_json(f), "scalar": format_rational(s)}))
                    .collect::<Vec<_>>(),
            }),
            Witness::Preimage(x) => json!({"kind": "preimage", "vector": vec_json(x)}),
        }
    }
}

/// Lower and upper bounds for an infimum, with the best witness found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsCertificate {
    pub lower: PowerValue,
    pub upper: PowerValue,
    pub witness: Option<Witness>,
}

impl BoundsCertificate {
    pub fn exact(v: PowerValue, witness: Option<Witness>) -> Self {
        BoundsCertificate { lower: v.clone(), upper: v, witness }
    }

    /// Whether the bounds provably coincide.
    pub fn meets(&self) -> bool {
        self.lower.is_exact() && self.lower == self.upper
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lower": self.lower.to_string(),
            "upper": self.upper.to_string(),
            "meets": self.meets(),
            "bounds": {"lower": self.lower.to_json(), "upper": self.upper.to_json()},
            "witness": self.witness.as_ref().map(Witness::to_json),
        })
    }
}

/// A norm given by a closure, with the facts the searches need.
#[derive(Clone)]
pub struct CustomNorm {
    pub name: String,
    pub eval: Arc<dyn Fn(&[Rational]) -> PowerValue + Send + Sync>,
    /// A positive lower bound on nonzero lattice points, or zero if unknown.
    pub min_nonzero: PowerValue,
    /// A lower bound on the norm of points with some `|xᵢ| ≥ M + 1`.
    pub outside_box: Arc<dyn Fn(u64) -> PowerValue + Send + Sync>,
}

impl fmt::Debug for CustomNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomNorm({})", self.name)
    }
}

#[derive(Clone, Debug)]
pub enum LatticeNorm {
    /// `‖(|xᵢ|_R)‖_q`.
    Lp(PExponent),
    /// `‖(wᵢ·|xᵢ|_R)‖_q`.
    Weighted { weights: Vec<PowerValue>, q: PExponent },
    Custom(CustomNorm),
}

/// A free module of finite rank over a halo, in coordinates.
#[derive(Clone, Debug)]
pub struct NormedLattice {
    rank: usize,
    base: HaloDescriptor,
    norm: LatticeNorm,
    constant: HaloConstant,
}

impl NormedLattice {
    /// The constant defaults to `p_M = min(q, p_R)` over a short base and
    /// to `(C_R·2^(1/q), D_R)` over a Lipschitz base.
    pub fn new(rank: usize, base: HaloDescriptor, norm: LatticeNorm) -> Result<Self> {
        let q = match &norm {
            LatticeNorm::Lp(q) => q.clone(),
            LatticeNorm::Weighted { weights, q } => {
                if weights.len() != rank {
                    return Err(Error::Dimension(format!("{} weights for rank {rank}", weights.len())));
                }
                if weights.iter().any(PowerValue::is_zero) {
                    return Err(Error::Config("weights must be positive".into()));
                }
                q.clone()
            }
            LatticeNorm::Custom(c) => {
                return Err(Error::Config(format!("custom norm {} needs an explicit constant", c.name)))
            }
        };
        let constant = match &base.constant {
            HaloConstant::Short(p) => HaloConstant::Short(p.clone().min(q)),
            HaloConstant::Lipschitz { c, d } => HaloConstant::Lipschitz {
                c: c.mul(&q.lipschitz_constant()),
                d: d.clone(),
            },
        };
        Ok(NormedLattice { rank, base, norm, constant })
    }

    pub fn custom(rank: usize, base: HaloDescriptor, norm: CustomNorm, constant: HaloConstant) -> Self {
        NormedLattice { rank, base, norm: LatticeNorm::Custom(norm), constant }
    }

    /// `(ℤⁿ, ℓ^q)` over `(ℤ, |·|_∞, 1)`.
    pub fn integer_lp(rank: usize, q: PExponent) -> Self {
        Self::new(rank, HaloDescriptor::integers(), LatticeNorm::Lp(q)).unwrap()
    }

    pub fn with_constant(mut self, constant: HaloConstant) -> Self {
        self.constant = constant;
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base(&self) -> &HaloDescriptor {
        &self.base
    }

    pub fn norm_kind(&self) -> &LatticeNorm {
        &self.norm
    }

    pub fn constant(&self) -> &HaloConstant {
        &self.constant
    }

    /// The Lipschitz triangle constant `C_M`.
    pub fn lipschitz_constant(&self) -> PowerValue {
        self.constant.lipschitz_pair().0
    }

    pub fn norm(&self, x: &[Rational]) -> Result<PowerValue> {
        if x.len() != self.rank {
            return Err(Error::Dimension(format!("vector of length {} in rank {}", x.len(), self.rank)));
        }
        if let Some(bad) = x.iter().find(|v| !self.base.contains(v)) {
            return Err(Error::NotInRing(format_rational(bad)));
        }
        Ok(self.norm_unchecked(x))
    }

    fn norm_unchecked(&self, x: &[Rational]) -> PowerValue {
        match &self.norm {
            LatticeNorm::Lp(q) => {
                let v: Vec<PowerValue> = x.iter().map(|a| self.base.norm_unchecked(a)).collect();
                lp_norm(&v, q)
            }
            LatticeNorm::Weighted { weights, q } => {
                let v: Vec<PowerValue> = x
                    .iter()
                    .zip(weights)
                    .map(|(a, w)| self.base.norm_unchecked(a).mul(w))
                    .collect();
                lp_norm(&v, q)
            }
            LatticeNorm::Custom(c) => (c.eval)(x),
        }
    }

    /// A lower bound on the norm of nonzero lattice points (zero if none known).
    pub fn min_nonzero_norm(&self) -> PowerValue {
        match &self.norm {
            LatticeNorm::Lp(_) => self.base.min_nonzero_norm(),
            LatticeNorm::Weighted { weights, .. } => {
                min_of(weights.iter()).mul(&self.base.min_nonzero_norm())
            }
            LatticeNorm::Custom(c) => c.min_nonzero.clone(),
        }
    }

    /// A lower bound on the norm of points with some coordinate `|xᵢ| ≥ M + 1`.
    pub fn outside_box_bound(&self, m: u64) -> PowerValue {
        match &self.norm {
            LatticeNorm::Lp(_) => self.base.outside_box_bound(m),
            LatticeNorm::Weighted { weights, .. } => min_of(weights.iter()).mul(&self.base.outside_box_bound(m)),
            LatticeNorm::Custom(c) => (c.outside_box)(m),
        }
    }

    /// Loads `{"rank": 2, "halo": {...}, "norm": "l1" | "l2" | "linf" | "lp", "q": "3", "weights": [...]}`.
    /// The halo defaults to `(ℤ, |·|_∞, 1)` and the norm to `linf`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let rank = v
            .get("rank")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Config("lattice needs an integer \"rank\"".into()))? as usize;
        let base = match v.get("halo") {
            Some(h) => HaloDescriptor::from_json(h)?,
            None => HaloDescriptor::integers(),
        };
        let q = match v.get("norm").and_then(Value::as_str).unwrap_or("linf") {
            "l1" => PExponent::one(),
            "l2" => PExponent::Finite(int(2)),
            "linf" => PExponent::Infinite,
            "lp" => {
                let q = v.get("q").and_then(Value::as_str).ok_or_else(|| Error::Config("lp norm needs \"q\"".into()))?;
                PExponent::parse(q)?
            }
            n => return Err(Error::Config(format!("unknown lattice norm {n:?}"))),
        };
        let norm = match v.get("weights") {
            Some(Value::Array(ws)) => LatticeNorm::Weighted {
                weights: ws
                    .iter()
                    .map(|w| rational_from_json(w).map(|r| PowerValue::rational(r.abs())))
                    .collect::<Result<_>>()?,
                q,
            },
            Some(_) => return Err(Error::Config("weights must be an array".into())),
            None => LatticeNorm::Lp(q),
        };
        Self::new(rank, base, norm)
    }

    pub fn to_json(&self) -> Value {
        let norm = match &self.norm {
            LatticeNorm::Lp(q) => json!({"norm": "lp", "q": q.to_string()}),
            LatticeNorm::Weighted { weights, q } => json!({
                "norm": "lp",
                "q": q.to_string(),
                "weights": weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            }),
            LatticeNorm::Custom(c) => json!({"norm": c.name}),
        };
        json!({"rank": self.rank, "halo": self.base.to_json(), "norm": norm, "constant": self.constant.to_json()})
    }
}

fn min_of<'a>(values: impl Iterator<Item = &'a PowerValue>) -> PowerValue {
    values.fold(None::<PowerValue>, |acc, v| Some(match acc {
        None => v.clone(),
        Some(a) => a.min(v),
    }))
    .unwrap_or_else(PowerValue::zero)
}

/// `‖m‖_{I,p} = (Σ |mᵢ|^p)^(1/p)` over short summands with `p ≥ p_{Mᵢ}`.
pub fn direct_sum_short_norm(parts: &[(&NormedLattice, Vec<Rational>)], p: &PExponent) -> Result<PowerValue> {
    let mut norms = Vec::with_capacity(parts.len());
    for (lat, x) in parts {
        match lat.constant() {
            HaloConstant::Short(pm) if pm <= p => {}
            HaloConstant::Short(pm) => {
                return Err(Error::Config(format!("direct sum exponent {p} is below a summand constant {pm}")))
            }
            HaloConstant::Lipschitz { .. } => {
                return Err(Error::Config("short direct sum of a Lipschitz summand".into()))
            }
        }
        norms.push(lat.norm(x)?);
    }
    Ok(lp_norm(&norms, p))
}

/// `|Σ a_x {x}| = ‖(|a_x|_R · w_x)‖_p`.
pub fn free_module_norm(coeffs: &[(Rational, PowerValue)], base: &HaloDescriptor, p: &PExponent) -> Result<PowerValue> {
    let terms = coeffs
        .iter()
        .map(|(a, w)| base.norm(a).map(|n| n.mul(w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(lp_norm(&terms, p))
}

/// Search limits for [`tree_norm`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeBudget {
    /// Maximum number of leaves; defaults to 8.
    pub max_leaves: Option<usize>,
    /// Box radius for leaves and subtree sums; defaults to twice the
    /// largest target entry.
    pub radius: Option<u64>,
}

pub const DEFAULT_MAX_LEAVES: usize = 8;
const MAX_BOX_STATES: usize = 6_000;
const INF: u32 = u32::MAX;

impl TreeBudget {
    pub fn resolve(&self, max_entry: u64) -> (usize, u64) {
        let l = self.max_leaves.unwrap_or(DEFAULT_MAX_LEAVES).max(1);
        let m = self.radius.unwrap_or(2 * max_entry).max(max_entry).max(1);
        (l, m)
    }
}

#[derive(Clone, Copy)]
enum Choice {
    None,
    Leaf,
    Inherit,
    Split { a: u32, la: u8 },
}

/// Bounds for the tree-infimum norm `‖m‖_{I,C}` of a direct sum of
/// ℤ-lattices.
///
/// All trees with at most `L` leaves whose subtree sums stay in the box
/// `[-M, M]^D` are searched exactly by dynamic programming. Any other tree
/// has a leaf at depth `⌈log₂(L+1)⌉`, or a proper subtree leaving the box;
/// these give the lower bounds `C^⌈log₂(L+1)⌉·m_min` and `C·|out of box|`
/// (the latter needs `C ≥ C_{Mᵢ}`, else `C·m_min`).
pub fn tree_norm(parts: &[(&NormedLattice, Vec<Rational>)], c: &PowerValue, budget: &TreeBudget) -> Result<BoundsCertificate> {
    if !c.is_exact() || cmp_power(c, &PowerValue::one()) == Some(std::cmp::Ordering::Less) {
        return Err(Error::Config(format!("tree constant C = {c} must be exact and at least 1")));
    }
    let mut target: Vec<i64> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for (i, (lat, x)) in parts.iter().enumerate() {
        if lat.base().ring != Ring::Integers {
            return Err(Error::UnsupportedContext("tree search needs ℤ-lattices".into()));
        }
        lat.norm(x)?;
        for v in x {
            target.push(v.to_integer().to_i64().ok_or_else(|| Error::Budget("entry too large".into()))?);
            owner.push(i);
        }
    }
    if target.iter().all(|&v| v == 0) {
        return Ok(BoundsCertificate::exact(PowerValue::zero(), None));
    }
    let max_entry = target.iter().map(|v| v.unsigned_abs()).max().unwrap();
    let (max_leaves, radius) = budget.resolve(max_entry);
    let dims = target.len();
    let side = 2 * radius as usize + 1;
    let states = side
        .checked_pow(dims as u32)
        .filter(|&s| s <= MAX_BOX_STATES)
        .ok_or_else(|| Error::Budget(format!("box of radius {radius} in dimension {dims} is too large")))?;
    if max_leaves > 64 {
        return Err(Error::Budget("at most 64 leaves".into()));
    }
    let m = radius as i64;
    let coords = |mut idx: usize| -> Vec<i64> {
        let mut v = vec![0i64; dims];
        for c in v.iter_mut() {
            *c = (idx % side) as i64 - m;
            idx /= side;
        }
        v
    };
    let index = |v: &[i64]| -> Option<usize> {
        let mut idx = 0usize;
        for &c in v.iter().rev() {
            if c.abs() > m {
                return None;
            }
            idx = idx * side + (c + m) as usize;
        }
        Some(idx)
    };
    let all: Vec<Vec<i64>> = (0..states).map(coords).collect();
    let zero_idx = index(&vec![0; dims]).unwrap();

    // leaf norms of box points supported in a single summand
    let mut leaf_val: Vec<Option<PowerValue>> = vec![None; states];
    for (idx, v) in all.iter().enumerate() {
        let support: Vec<usize> = (0..dims).filter(|&d| v[d] != 0).map(|d| owner[d]).collect();
        let Some(&i) = support.first() else { continue };
        if support.iter().any(|&j| j != i) {
            continue;
        }
        let comp: Vec<Rational> = (0..dims).filter(|&d| owner[d] == i).map(|d| int(v[d])).collect();
        let n = parts[i].0.norm_unchecked(&comp);
        if !n.is_exact() {
            return Err(Error::Inexact(format!("leaf norm {n}")));
        }
        leaf_val[idx] = Some(n);
    }

    // every tree value is C^d times a leaf norm with d < L; rank them once
    let mut values: Vec<PowerValue> = Vec::new();
    let mut seen: HashMap<PowerValue, ()> = HashMap::new();
    for v in leaf_val.iter().flatten() {
        let mut x = v.clone();
        for _ in 0..max_leaves {
            if seen.insert(x.clone(), ()).is_none() {
                values.push(x.clone());
            }
            x = c.mul(&x);
        }
    }
    values.sort_by(|a, b| cmp_power(a, b).expect("exact values are comparable"));
    let rank_of: HashMap<PowerValue, u32> = values.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
    let times_c: Vec<u32> = values
        .iter()
        .map(|v| rank_of.get(&c.mul(v)).copied().unwrap_or(INF))
        .collect();

    let mut best: Vec<Vec<u32>> = vec![vec![INF; states]; max_leaves + 1];
    let mut choice: Vec<Vec<Choice>> = vec![vec![Choice::None; states]; max_leaves + 1];
    for idx in 0..states {
        if let Some(v) = &leaf_val[idx] {
            best[1][idx] = rank_of[v];
            choice[1][idx] = Choice::Leaf;
        }
    }
    let mut diff = vec![0i64; dims];
    for l in 2..=max_leaves {
        let (done, rest) = best.split_at_mut(l);
        let cur = &mut rest[0];
        let ch = &mut choice[l];
        for v in 0..states {
            cur[v] = done[l - 1][v];
            ch[v] = Choice::Inherit;
            if v == zero_idx {
                continue;
            }
            for a in 0..states {
                if a == zero_idx || a == v {
                    continue;
                }
                for d in 0..dims {
                    diff[d] = all[v][d] - all[a][d];
                }
                let Some(b) = index(&diff) else { continue };
                for la in 1..=l / 2 {
                    let (ra, rb) = (done[la][a], done[l - la][b]);
                    if ra == INF || rb == INF {
                        continue;
                    }
                    let r = times_c[ra.max(rb) as usize];
                    if r < cur[v] {
                        cur[v] = r;
                        ch[v] = Choice::Split { a: a as u32, la: la as u8 };
                    }
                }
            }
        }
    }

    let t_idx = index(&target).unwrap();
    let r = best[max_leaves][t_idx];
    if r == INF {
        return Err(Error::Budget("no tree found within the budget".into()));
    }
    let upper = values[r as usize].clone();

    fn build(
        v: usize,
        l: usize,
        choice: &[Vec<Choice>],
        all: &[Vec<i64>],
        index: &dyn Fn(&[i64]) -> Option<usize>,
        owner: &[usize],
    ) -> BinaryTree<TreeLeaf> {
        match choice[l][v] {
            Choice::Leaf => {
                let i = owner[(0..all[v].len()).find(|&d| all[v][d] != 0).unwrap()];
                let element = (0..all[v].len()).filter(|&d| owner[d] == i).map(|d| int(all[v][d])).collect();
                BinaryTree::Leaf(TreeLeaf { summand: i, element })
            }
            Choice::Inherit => build(v, l - 1, choice, all, index, owner),
            Choice::Split { a, la } => {
                let a = a as usize;
                let b: Vec<i64> = all[v].iter().zip(&all[a]).map(|(x, y)| x - y).collect();
                let b = index(&b).unwrap();
                BinaryTree::node(
                    build(a, la as usize, choice, all, index, owner),
                    build(b, l - la as usize, choice, all, index, owner),
                )
            }
            Choice::None => unreachable!("tree reconstruction hit an empty state"),
        }
    }
    let tree = build(t_idx, max_leaves, &choice, &all, &index, &owner);

    let m_min = min_of(parts.iter().map(|(l, _)| l.min_nonzero_norm()).collect::<Vec<_>>().iter());
    let depth = usize::BITS - max_leaves.leading_zeros(); // ⌈log₂(L+1)⌉
    let deep = c.pow(&int(depth as i64)).mul(&m_min);
    let c_dominates = parts
        .iter()
        .all(|(l, _)| le(&l.lipschitz_constant(), c) == Some(true));
    let wide = if c_dominates {
        c.mul(&min_of(parts.iter().map(|(l, _)| l.outside_box_bound(radius)).collect::<Vec<_>>().iter()))
    } else {
        c.mul(&m_min)
    };
    Ok(BoundsCertificate {
        lower: upper.min(&deep).min(&wide),
        upper,
        witness: Some(Witness::Tree(tree)),
    })
}

/// Operator norm of `A : ℓ^q → ℓ^q` over the given scalars.
///
/// Real `q ∈ {1, ∞}` and p-adic `q = ∞` are exact; real `q = 2` is
/// `√λ_max(AᵀA)`, exact when the eigenvalue is rational and otherwise a
/// certified interval.
pub fn operator_norm(a: &QMatrix, q: &PExponent, ctx: &ScalarContext) -> Result<BoundsCertificate> {
    let v = match (ctx, q) {
        (ScalarContext::Real, PExponent::Infinite) => PowerValue::rational(a.max_row_abs_sum()),
        (ScalarContext::Real, PExponent::Finite(r)) if r.is_one() => PowerValue::rational(a.max_col_abs_sum()),
        (ScalarContext::Real, PExponent::Finite(r)) if *r == int(2) => spectral_norm(a),
        (ScalarContext::PAdic(_), PExponent::Infinite) => {
            PowerValue::max_of(a.entries().iter().map(|x| ctx.abs(x)).collect::<Vec<_>>().iter())
        }
        _ => {
            return Err(Error::UnsupportedExponent(format!("operator norm for q = {q} over {ctx}")))
        }
    };
    Ok(BoundsCertificate { lower: v.clone(), upper: v, witness: None })
}

/// `‖A‖_{ℓ²→ℓ²}` as an exact value or certified interval.
pub fn spectral_norm(a: &QMatrix) -> PowerValue {
    if a.is_zero() {
        return PowerValue::zero();
    }
    sqrt_enclosure(&largest_eigenvalue(&a.gram(), DEFAULT_PRECISION_BITS + 4))
}

pub(crate) fn sqrt_enclosure(e: &RootEnclosure) -> PowerValue {
    match e {
        RootEnclosure::Exact(r) => PowerValue::power(r.clone().max(Rational::zero()), Rational::new(1.into(), 2.into())),
        RootEnclosure::Between(lo, hi) => {
            let lo = root_bounds(&lo.clone().max(Rational::zero()), 2, DEFAULT_PRECISION_BITS).0;
            let hi = root_bounds(hi, 2, DEFAULT_PRECISION_BITS).1;
            PowerValue::interval(lo, hi)
        }
    }
}

/// Exact decision of `‖A‖_{ℓ²→ℓ²} ≤ 1`.
pub fn spectral_norm_at_most_one(a: &QMatrix) -> bool {
    psd_leq_one(&a.gram()).expect("Gram matrices are symmetric")
}

/// `C_N^(n-1) · D_N · C_f · C`, with `C_f` the largest image norm.
pub fn boundedness_bound(
    basis_norms: &[PowerValue],
    c: &PowerValue,
    c_n: &PowerValue,
    d_n: &PowerValue,
    image_norms: &[PowerValue],
) -> Result<PowerValue> {
    let n = basis_norms.len();
    if n == 0 || image_norms.len() != n {
        return Err(Error::Dimension(format!("{n} basis norms and {} image norms", image_norms.len())));
    }
    let c_f = PowerValue::max_of(image_norms);
    Ok(c_n.pow(&int(n as i64 - 1)).mul(d_n).mul(&c_f).mul(c))
}

/// Outcome of sampling the hypothesis `‖(sⱼ)‖_∞ ≤ C·|Σ sⱼ eⱼ|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisCheck {
    pub cases: usize,
    pub undecided: usize,
    pub violation: Option<Vec<Rational>>,
}

impl HypothesisCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none() && self.undecided == 0
    }
}

pub fn check_boundedness_hypothesis(
    lattice: &NormedLattice,
    basis: &[Vec<Rational>],
    c: &PowerValue,
    samples: &[Vec<Rational>],
) -> Result<HypothesisCheck> {
    let mut out = HypothesisCheck { cases: 0, undecided: 0, violation: None };
    for s in samples {
        if s.len() != basis.len() {
            return Err(Error::Dimension("coefficient tuple length".into()));
        }
        let mut x = vec![Rational::zero(); lattice.rank()];
        for (sj, e) in s.iter().zip(basis) {
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += sj * ei;
            }
        }
        let lhs = PowerValue::max_of(
            s.iter().map(|v| lattice.base().norm(v)).collect::<Result<Vec<_>>>()?.iter(),
        );
        let rhs = c.mul(&lattice.norm(&x)?);
        out.cases += 1;
        match le(&lhs, &rhs) {
            Some(true) => {}
            Some(false) => {
                out.violation = Some(s.clone());
                break;
            }
            None => out.undecided += 1,
        }
    }
    Ok(out)
}
