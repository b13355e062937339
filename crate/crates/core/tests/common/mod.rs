//! Brute-force reference implementations shared by the integration tests.
//! They deliberately avoid the library's search code: plain recursion over
//! all trees or all multisets of parts, exact rationals throughout.
#![allow(dead_code)]

use std::collections::HashMap;

use halo_core::lattice::{tree_norm, NormedLattice, TreeBudget};
use halo_core::norms::PExponent;
use halo_core::scalar::{cmp_power, int, PowerValue, Rational};
use num_traits::{Signed, Zero};
use rand::Rng;

/// A direct summand for the tree oracle: its rank and its norm on
/// integer vectors.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Linf,
    L1,
}

#[derive(Clone, Copy)]
pub struct Summand {
    pub rank: usize,
    pub norm: Norm,
}

impl Summand {
    pub fn linf(rank: usize) -> Self {
        Summand { rank, norm: Norm::Linf }
    }

    pub fn l1(rank: usize) -> Self {
        Summand { rank, norm: Norm::L1 }
    }

    pub fn eval(&self, x: &[i64]) -> Rational {
        match self.norm {
            Norm::Linf => linf(x),
            Norm::L1 => l1(x),
        }
    }
}

pub fn linf(x: &[i64]) -> Rational {
    int(x.iter().map(|v| v.abs()).max().unwrap_or(0))
}

pub fn l1(x: &[i64]) -> Rational {
    int(x.iter().map(|v| v.abs()).sum())
}

/// The library lattice matching a summand used in the oracle tests.
pub fn lattice_for(s: &Summand) -> NormedLattice {
    let q = match s.norm {
        Norm::L1 => PExponent::one(),
        Norm::Linf => PExponent::Infinite,
    };
    NormedLattice::integer_lp(s.rank, q)
}

/// Minimum over all binary trees on the given leaf values of the
/// recursive value `C·max(left, right)`, by splitting the leaf set.
pub fn best_tree_over(values: &[Rational], c: &Rational) -> Rational {
    fn rec(mask: u32, values: &[Rational], c: &Rational, memo: &mut HashMap<u32, Rational>) -> Rational {
        if mask.count_ones() == 1 {
            return values[mask.trailing_zeros() as usize].clone();
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let mut best: Option<Rational> = None;
        // proper nonempty subsets containing the lowest leaf
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let a = low | sub;
            if a != mask {
                let b = mask ^ a;
                let va = rec(a, values, c, memo);
                let vb = rec(b, values, c, memo);
                let v = c * va.max(vb);
                if best.as_ref().map_or(true, |x| v < *x) {
                    best = Some(v);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        let best = best.unwrap();
        memo.insert(mask, best.clone());
        best
    }
    assert!(!values.is_empty() && values.len() <= 16);
    rec((1u32 << values.len()) - 1, values, c, &mut HashMap::new())
}

/// Exact infimum of the tree value over all trees with at most
/// `max_leaves` nonzero leaves, each leaf lying in one summand. Leaf
/// entries are bounded by `entry_bound`, which must be at least the entries
/// of any leaf of an optimal multi-leaf tree.
pub struct TreeOracle {
    summands: Vec<Summand>,
    offsets: Vec<usize>,
    dim: usize,
    c: Rational,
    e: i64,
    memo: HashMap<(Vec<i64>, usize), Option<Rational>>,
}

impl TreeOracle {
    pub fn new(summands: &[Summand], c: Rational, entry_bound: i64) -> Self {
        let mut offsets = vec![0];
        for s in summands {
            offsets.push(offsets.last().unwrap() + s.rank);
        }
        let dim = *offsets.last().unwrap();
        TreeOracle { summands: summands.to_vec(), offsets, dim, c, e: entry_bound, memo: HashMap::new() }
    }

    /// The norm of `v` as a single leaf, if it lies in one summand.
    fn leaf(&self, v: &[i64]) -> Option<Rational> {
        if v.iter().all(|x| *x == 0) {
            return None;
        }
        for (k, s) in self.summands.iter().enumerate() {
            let (a, b) = (self.offsets[k], self.offsets[k + 1]);
            if v[..a].iter().chain(&v[b..]).all(|x| *x == 0) {
                return Some(s.eval(&v[a..b]));
            }
        }
        None
    }

    fn boxed(&self, r: i64) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for _ in 0..self.dim {
            out = out
                .into_iter()
                .flat_map(|p| (-r..=r).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                }))
                .collect();
        }
        out
    }

    fn sub(&mut self, v: &[i64], l: usize) -> Option<Rational> {
        if let Some(x) = self.memo.get(&(v.to_vec(), l)) {
            return x.clone();
        }
        let mut best = if v.iter().all(|x| x.abs() <= self.e) { self.leaf(v) } else { None };
        if l > 1 {
            if let Some(x) = self.sub(v, l - 1) {
                best = Some(best.map_or(x.clone(), |b: Rational| b.min(x)));
            }
            for l1 in 1..=l / 2 {
                let l2 = l - l1;
                for a in self.boxed(l1 as i64 * self.e) {
                    let b: Vec<i64> = v.iter().zip(&a).map(|(x, y)| x - y).collect();
                    if b.iter().any(|x| x.abs() > l2 as i64 * self.e) {
                        continue;
                    }
                    let (Some(va), Some(vb)) = (self.sub(&a, l1), self.sub(&b, l2)) else { continue };
                    let val = &self.c * va.max(vb);
                    if best.as_ref().map_or(true, |x| val < *x) {
                        best = Some(val);
                    }
                }
            }
        }
        self.memo.insert((v.to_vec(), l), best.clone());
        best
    }

    pub fn infimum(&mut self, target: &[i64], max_leaves: usize) -> Rational {
        if target.iter().all(|x| *x == 0) {
            return Rational::zero();
        }
        let single = self.leaf(target);
        let multi = if max_leaves > 1 { self.sub(target, max_leaves) } else { None };
        match (single, multi) {
            (Some(a), Some(b)) => a.min(b),
            (a, b) => a.or(b).expect("some tree exists"),
        }
    }
}

/// Minimum of `Σ cost(xᵢ)` over multisets of at most `max_parts` nonzero
/// integers in `[-bound, bound]` summing to `f` (`None` if there is none).
pub fn min_decomposition_cost(f: i64, max_parts: usize, bound: i64, cost: &dyn Fn(i64) -> Rational) -> Option<Rational> {
    fn rec(rem: i64, left: usize, min_part: i64, bound: i64, cost: &dyn Fn(i64) -> Rational, acc: Rational, best: &mut Option<Rational>) {
        if rem == 0 && best.as_ref().map_or(true, |b| acc < *b) {
            *best = Some(acc.clone());
        }
        if left == 0 {
            return;
        }
        for x in min_part..=bound {
            if x == 0 {
                continue;
            }
            rec(rem - x, left - 1, x, bound, cost, &acc + cost(x), best);
        }
    }
    if f == 0 {
        return Some(Rational::zero());
    }
    let mut best = None;
    rec(f, max_parts, -bound, bound, cost, Rational::zero(), &mut best);
    best
}

pub fn power_eq(a: &PowerValue, b: &PowerValue) -> bool {
    cmp_power(a, b) == Some(std::cmp::Ordering::Equal)
}

/// One tree-norm comparison: `(oracle, library lower, library upper)`.
pub fn compare_tree(summands: &[Summand], target: &[i64], c: &Rational, leaves: usize, radius: u64, oracle: &mut TreeOracle) -> (Rational, PowerValue, PowerValue) {
    let lattices: Vec<NormedLattice> = summands.iter().map(lattice_for).collect();
    let mut parts = Vec::new();
    let mut at = 0;
    for (s, l) in summands.iter().zip(&lattices) {
        parts.push((l, target[at..at + s.rank].iter().map(|x| int(*x)).collect::<Vec<_>>()));
        at += s.rank;
    }
    let cert = tree_norm(&parts, &PowerValue::rational(c.clone()), &TreeBudget { max_leaves: Some(leaves), radius: Some(radius) })
        .expect("tree norm");
    (oracle.infimum(target, leaves), cert.lower, cert.upper)
}

/// Cartesian power `[-r, r]^d`.
pub fn grid(d: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| (-r..=r).map(move |x| [p.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

pub fn random_rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(-num..=num).into(), rng.gen_range(1..=den).into())
}

pub fn abs_max(xs: &[i64]) -> i64 {
    xs.iter().map(|x| x.abs()).max().unwrap_or(0)
}

pub fn is_nonneg(r: &Rational) -> bool {
    !r.is_negative()
}

#[derive(Debug, Default)]
pub struct SweepReport {
    pub cases: usize,
    pub meets: usize,
    pub mismatches: Vec<String>,
}

/// Largest leaf entry an optimal multi-leaf tree can use, over a set of
/// targets: every leaf of a tree of value `v` has norm at most `v / C`, and
/// in these lattices entries are bounded by the norm.
fn entry_bound(summands: &[Summand], targets: &[Vec<i64>], c: &Rational) -> i64 {
    let mut e = 1;
    for t in targets {
        let mut blocks = Vec::new();
        let mut at = 0;
        for s in summands {
            let b = &t[at..at + s.rank];
            if b.iter().any(|x| *x != 0) {
                blocks.push(s.eval(b));
            }
            at += s.rank;
        }
        if blocks.is_empty() {
            continue;
        }
        // coordinate leaves also form a valid tree; in both norms a
        // single-coordinate vector has norm |x|
        let coords: Vec<Rational> = t.iter().filter(|x| **x != 0).map(|x| int(x.abs())).collect();
        let ub = best_tree_over(&blocks, c).min(best_tree_over(&coords, c));
        e = e.max((ub / c).floor().to_integer().try_into().unwrap());
    }
    e
}

/// Library tree norms with six leaves, searched in a box of radius `2E`,
/// against the unrestricted [`TreeOracle`] on every
/// target with entries up to 3 (up to 4 in rank one).
pub fn tree_sweep(report: &mut SweepReport) {
    let configs: Vec<(Vec<Summand>, i64, Vec<Rational>)> = vec![
        (vec![Summand::linf(1)], 4, vec![int(1), Rational::new(3.into(), 2.into()), int(2), int(3)]),
        (vec![Summand::linf(1), Summand::linf(1)], 3, vec![int(1), Rational::new(3.into(), 2.into()), int(2)]),
        (vec![Summand::l1(2)], 3, vec![int(1), Rational::new(3.into(), 2.into()), int(2)]),
        (vec![Summand::l1(1), Summand::linf(1)], 3, vec![Rational::new(5.into(), 4.into()), int(3)]),
    ];
    for (summands, r, cs) in configs {
        let dim: usize = summands.iter().map(|s| s.rank).sum();
        let targets = grid(dim, r);
        for c in cs {
            let e = entry_bound(&summands, &targets, &c);
            let mut oracle = TreeOracle::new(&summands, c.clone(), e);
            let radius = (2 * e).max(r) as u64;
            for t in &targets {
                let (want, lower, upper) = compare_tree(&summands, t, &c, 6, radius, &mut oracle);
                report.cases += 1;
                let up_ok = upper.as_rational() == Some(&want);
                let low_ok = halo_core::scalar::le(&lower, &PowerValue::rational(want.clone())) == Some(true);
                if !(up_ok && low_ok) {
                    report.mismatches.push(format!("tree {t:?} C={c}: oracle {want}, library [{lower}, {upper}]"));
                }
                if lower == upper {
                    report.meets += 1;
                }
            }
        }
    }
}

/// Library re-normalizations against [`min_decomposition_cost`] for
/// `|f| ≤ 4`, with at most six parts.
pub fn renorm_sweep(report: &mut SweepReport) {
    use halo_core::halo::{renorm_infimum, HaloConstant, HaloDescriptor, NormKind, RenormBudget, Ring};
    let half = Rational::new(1.into(), 2.into());
    let third = Rational::new(1.into(), 3.into());
    // (halo norm power or trivial, p, cost of a part, outer exponent 1/p)
    type Cost = fn(i64) -> Rational;
    let cases: Vec<(Option<i64>, PExponent, Cost, Rational)> = vec![
        (Some(1), PExponent::one(), |x| int(x.abs()), int(1)),
        (Some(1), PExponent::Finite(int(2)), |x| int(x * x), half.clone()),
        (Some(2), PExponent::one(), |x| int(x * x), int(1)),
        (Some(2), PExponent::Finite(half.clone()), |x| int(x.abs()), int(2)),
        (Some(3), PExponent::Finite(third.clone()), |x| int(x.abs()), int(3)),
        (None, PExponent::one(), |_| int(1), int(1)),
        (None, PExponent::Finite(int(2)), |_| int(1), half.clone()),
    ];
    for (power, p, cost, outer) in cases {
        let h = match power {
            Some(k) => HaloDescriptor::new(
                Ring::Integers,
                NormKind::Archimedean,
                int(k),
                HaloConstant::Short(PExponent::Finite(Rational::new(1.into(), k.into()))),
            )
            .unwrap(),
            None => HaloDescriptor::integers_trivial(),
        };
        for f in -4..=4i64 {
            let budget = RenormBudget { max_parts: Some(6), max_part: None };
            let cert = renorm_infimum(&h, &HaloConstant::Short(p.clone()), &int(f), &budget).unwrap();
            let s = min_decomposition_cost(f, 6, 8, &cost).unwrap();
            let want = PowerValue::power(s, outer.clone());
            report.cases += 1;
            let up_ok = power_eq(&cert.upper, &want);
            let low_ok = halo_core::scalar::le(&cert.lower, &want) == Some(true);
            if !(up_ok && low_ok) {
                report.mismatches.push(format!("renorm {h} p={p} f={f}: oracle {want}, library [{}, {}]", cert.lower, cert.upper));
            }
            if cert.meets() {
                report.meets += 1;
            }
        }
    }
    // the Lipschitz flavor is a rank-one tree norm
    for c in [int(2), int(3)] {
        let mut oracle = TreeOracle::new(&[Summand::linf(1)], c.clone(), 4);
        for f in -4..=4i64 {
            let cert = renorm_infimum(
                &HaloDescriptor::integers(),
                &HaloConstant::Lipschitz { c: PowerValue::rational(c.clone()), d: PowerValue::one() },
                &int(f),
                &RenormBudget { max_parts: Some(6), max_part: Some(20) },
            )
            .unwrap();
            let want = oracle.infimum(&[f], 6);
            report.cases += 1;
            if cert.upper.as_rational() != Some(&want) {
                report.mismatches.push(format!("Lipschitz renorm f={f} C={c}: oracle {want}, library {}", cert.upper));
            }
            if cert.meets() {
                report.meets += 1;
            }
        }
    }
}
