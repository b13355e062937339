//! Scalar-extension norms as infima over presentations, and quotient norms
//! along integer projections.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::halo::{Ring, ScalarContext};
use crate::lattice::{BoundsCertificate, LatticeNorm, NormedLattice, Witness};
use crate::linalg::{solve_integer, QMatrix};
use crate::norms::PExponent;
use crate::scalar::{cmp_power, int, PowerValue, Rational};

/// One term `f ⊗ s` of a presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationTerm {
    pub element: Vec<Rational>,
    pub scalar: Rational,
}

/// `Σ fₖ ⊗ sₖ`, identified with the vector `Σ sₖ fₖ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub terms: Vec<PresentationTerm>,
}

impl Presentation {
    pub fn evaluate(&self, n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n];
        for t in &self.terms {
            for (o, f) in out.iter_mut().zip(&t.element) {
                *o += f * &t.scalar;
            }
        }
        out
    }
}

/// The Lipschitz constant of the scalar halo: 2 for ℝ, 1 for ℚ_p.
pub fn context_constant(ctx: &ScalarContext) -> PowerValue {
    match ctx {
        ScalarContext::Real => PExponent::one().lipschitz_constant(),
        ScalarContext::PAdic(_) => PExponent::Infinite.lipschitz_constant(),
    }
}

/// Value of the cheapest binary tree on the given leaf values under
/// `C·max`, obtained by repeatedly merging the two smallest values.
pub fn best_tree_value(values: &[PowerValue], c: &PowerValue) -> PowerValue {
    let mut pool: Vec<PowerValue> = values.to_vec();
    if pool.is_empty() {
        return PowerValue::zero();
    }
    let order = |a: &PowerValue, b: &PowerValue| {
        cmp_power(a, b).unwrap_or_else(|| a.bounds().1.cmp(&b.bounds().1))
    };
    while pool.len() > 1 {
        pool.sort_by(|a, b| order(b, a));
        let x = pool.pop().unwrap();
        let y = pool.pop().unwrap();
        pool.push(c.mul(&x.max(&y)));
    }
    pool.pop().unwrap()
}

/// Search limits for [`presentation_norm`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PresentationBudget {
    /// Maximum number of terms; defaults to the support size.
    pub max_terms: Option<usize>,
    /// Each term `f ⊗ s` is also tried as `kf ⊗ s/k` for `k ≤ multiplier`;
    /// defaults to 2.
    pub multiplier: Option<u64>,
}

const MAX_SUPPORT: usize = 8;

/// The rational content: `a = s·f` with `s > 0` and `f` a primitive
/// integer vector.
fn content(a: &[Rational]) -> (Rational, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut l = BigInt::one();
    for x in a.iter().filter(|x| !x.is_zero()) {
        g = g.gcd(x.numer());
        l = l.lcm(x.denom());
    }
    let s = Rational::new(g, l);
    let f = a.iter().map(|x| (x / &s).to_integer()).collect();
    (s, f)
}

/// Calls `visit` with every set partition of `0..n` as block labels.
fn set_partitions(n: usize, max_blocks: usize, visit: &mut impl FnMut(&[usize], usize)) {
    fn rec(i: usize, labels: &mut Vec<usize>, blocks: usize, max: usize, n: usize, visit: &mut impl FnMut(&[usize], usize)) {
        if i == n {
            visit(labels, blocks);
            return;
        }
        for b in 0..=blocks.min(max.saturating_sub(1)) {
            labels.push(b);
            rec(i + 1, labels, blocks.max(b + 1), max, n, visit);
            labels.pop();
        }
    }
    rec(0, &mut Vec::with_capacity(n), 0, max_blocks, n, visit);
}

/// Bounds for the norm of `target ∈ Sⁿ` in the scalar extension of the
/// ℤ-lattice `base`, as an infimum over presentations `Σ fₖ ⊗ sₖ` valued
/// by the tree norm of `(|fₖ|·|sₖ|_S)` with the context constant.
///
/// Upper bounds come from presentations grouping the support of `target`.
/// Lower bounds: over ℚ_p, `max wᵢ·|aᵢ|_p` (each nonzero integer vector has
/// norm at least its weight); over ℝ, the weighted `ℓ^q` norm of `target`.
pub fn presentation_norm(
    target: &[Rational],
    base: &NormedLattice,
    ctx: &ScalarContext,
    budget: &PresentationBudget,
) -> Result<BoundsCertificate> {
    if target.len() != base.rank() {
        return Err(Error::Dimension(format!("target of length {} for rank {}", target.len(), base.rank())));
    }
    if base.base().ring != Ring::Integers {
        return Err(Error::UnsupportedContext("presentations need a ℤ-lattice".into()));
    }
    let support: Vec<usize> = (0..target.len()).filter(|&i| !target[i].is_zero()).collect();
    if support.is_empty() {
        return Ok(BoundsCertificate::exact(PowerValue::zero(), Some(Witness::Presentation(vec![]))));
    }
    if support.len() > MAX_SUPPORT {
        return Err(Error::Budget(format!("support of size {} exceeds {MAX_SUPPORT}", support.len())));
    }
    let c = context_constant(ctx);
    let max_terms = budget.max_terms.unwrap_or(support.len()).max(1);
    let mult = budget.multiplier.unwrap_or(2).max(1);

    let mut best: Option<(PowerValue, Vec<PresentationTerm>)> = None;
    let mut err = None;
    set_partitions(support.len(), max_terms, &mut |labels, blocks| {
        if err.is_some() {
            return;
        }
        let mut terms = Vec::with_capacity(blocks);
        let mut values = Vec::with_capacity(blocks);
        for b in 0..blocks {
            let mut a = vec![Rational::zero(); target.len()];
            for (k, &i) in support.iter().enumerate() {
                if labels[k] == b {
                    a[i] = target[i].clone();
                }
            }
            let (s, f) = content(&a);
            let mut group: Option<(PowerValue, PresentationTerm)> = None;
            for k in 1..=mult {
                let kb = BigInt::from(k);
                let element: Vec<Rational> = f.iter().map(|x| Rational::from_integer(x * &kb)).collect();
                let scalar = &s / Rational::from_integer(kb);
                let v = match base.norm(&element) {
                    Ok(n) => n.mul(&ctx.abs(&scalar)),
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                };
                if group.as_ref().map_or(true, |(g, _)| precedes(&v, g)) {
                    group = Some((v, PresentationTerm { element, scalar }));
                }
            }
            let (v, t) = group.unwrap();
            values.push(v);
            terms.push(t);
        }
        let v = best_tree_value(&values, &c);
        if best.as_ref().map_or(true, |(b, _)| precedes(&v, b)) {
            best = Some((v, terms));
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let (upper, terms) = best.unwrap();

    let lower = presentation_lower_bound(target, base, ctx);
    let lower = match cmp_power(&lower, &upper) {
        Some(Ordering::Greater) => unreachable!("lower bound {lower} exceeds presentation value {upper}"),
        _ => lower.min(&upper),
    };
    Ok(BoundsCertificate {
        lower,
        upper,
        witness: Some(Witness::Presentation(terms.into_iter().map(|t| (t.element, t.scalar)).collect())),
    })
}

fn precedes(a: &PowerValue, b: &PowerValue) -> bool {
    match cmp_power(a, b) {
        Some(o) => o == Ordering::Less,
        None => a.bounds().1 < b.bounds().1,
    }
}

fn presentation_lower_bound(target: &[Rational], base: &NormedLattice, ctx: &ScalarContext) -> PowerValue {
    let halo = base.base();
    let (weights, q) = match base.norm_kind() {
        LatticeNorm::Lp(q) => (vec![PowerValue::one(); target.len()], q.clone()),
        LatticeNorm::Weighted { weights, q } => (weights.clone(), q.clone()),
        LatticeNorm::Custom(_) => return PowerValue::zero(),
    };
    match ctx {
        ScalarContext::PAdic(_) => {
            // |aᵢ|_p ≤ max over terms using coordinate i of |sₖ|_p ≤ |fₖ|·|sₖ|_p / wᵢ
            if cmp_power(&halo.min_nonzero_norm(), &PowerValue::one()) == Some(Ordering::Less) {
                return PowerValue::zero();
            }
            PowerValue::max_of(
                target
                    .iter()
                    .zip(&weights)
                    .map(|(a, w)| ctx.abs(a).mul(w))
                    .collect::<Vec<_>>()
                    .iter(),
            )
        }
        ScalarContext::Real => {
            // a weighted ℓ^q norm (q ≥ 1) is homogeneous and subadditive, and
            // the tree value with C ≥ 2 dominates the sum of its leaves
            let homogeneous = halo.scalar_context().is_some() && q >= PExponent::one();
            let c_ok = cmp_power(&context_constant(ctx), &PowerValue::from_int(2)) != Some(Ordering::Less);
            if !homogeneous || !c_ok {
                return PowerValue::zero();
            }
            let v: Vec<PowerValue> = target.iter().zip(&weights).map(|(a, w)| ctx.abs(a).mul(w)).collect();
            crate::norms::lp_norm(&v, &q)
        }
    }
}

/// Search limits for [`quotient_norm`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuotientBudget {
    /// Kernel coefficients range over `[-R, R]`; defaults to 4.
    pub radius: Option<u64>,
}

pub const DEFAULT_KERNEL_RADIUS: u64 = 4;
const MAX_KERNEL_POINTS: u64 = 400_000;

/// Bounds for `inf { |x| : P x = c, x integral }` in the fiber lattice.
///
/// The kernel of `P` is searched in a coefficient box of radius `R`, twice:
/// around a particular solution and then around the best point found. Any
/// preimage outside the second box has `‖x‖_∞ ≥ (R+1)/‖K⁺‖_∞ − ‖x*‖_∞`
/// where `K⁺` is the pseudo-inverse of the kernel basis, which bounds its
/// norm from below.
pub fn quotient_norm(
    c: &[Rational],
    projection: &QMatrix,
    fiber: &NormedLattice,
    budget: &QuotientBudget,
) -> Result<BoundsCertificate> {
    let (m, n) = (projection.rows(), projection.cols());
    if c.len() != m || fiber.rank() != n {
        return Err(Error::Dimension(format!("projection {m}x{n}, target {}, fiber rank {}", c.len(), fiber.rank())));
    }
    if fiber.base().ring != Ring::Integers {
        return Err(Error::UnsupportedContext("quotient norms need a ℤ-lattice fiber".into()));
    }
    if c.iter().all(Zero::is_zero) {
        return Ok(BoundsCertificate::exact(PowerValue::zero(), Some(Witness::Preimage(vec![int(0); n]))));
    }
    // clear denominators so the system is integral
    let d = projection
        .entries()
        .iter()
        .chain(c)
        .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let dr = Rational::from_integer(d);
    let p_int: Vec<Vec<BigInt>> = (0..m)
        .map(|i| projection.row(i).iter().map(|x| (x * &dr).to_integer()).collect())
        .collect();
    let c_int: Vec<BigInt> = c.iter().map(|x| (x * &dr).to_integer()).collect();
    let sol = solve_integer(&p_int, n, &c_int)?;
    let to_q = |v: &[BigInt]| -> Vec<Rational> { v.iter().cloned().map(Rational::from_integer).collect() };
    let x0 = to_q(&sol.particular);
    let kernel: Vec<Vec<Rational>> = sol.kernel.iter().map(|k| to_q(k)).collect();

    if kernel.is_empty() {
        let v = fiber.norm(&x0)?;
        return Ok(BoundsCertificate::exact(v, Some(Witness::Preimage(x0))));
    }
    let r = budget.radius.unwrap_or(DEFAULT_KERNEL_RADIUS);
    let side = 2 * r + 1;
    let points = side
        .checked_pow(kernel.len() as u32)
        .filter(|&p| p <= MAX_KERNEL_POINTS)
        .ok_or_else(|| Error::Budget(format!("kernel box of radius {r} in dimension {} is too large", kernel.len())))?;

    let search = |center: &[Rational], best: &mut Option<(PowerValue, Vec<Rational>)>| -> Result<()> {
        for idx in 0..points {
            let mut x = center.to_vec();
            let mut rest = idx;
            for k in &kernel {
                let z = Rational::from_integer(BigInt::from((rest % side) as i64 - r as i64));
                rest /= side;
                if z.is_zero() {
                    continue;
                }
                for (xi, ki) in x.iter_mut().zip(k) {
                    *xi += &z * ki;
                }
            }
            let v = fiber.norm(&x)?;
            if best.as_ref().map_or(true, |(b, _)| precedes(&v, b)) {
                *best = Some((v, x));
            }
        }
        Ok(())
    };
    let mut best = None;
    search(&x0, &mut best)?;
    let center = best.as_ref().unwrap().1.clone();
    search(&center, &mut best)?;
    let (upper, witness) = best.unwrap();

    // outside the second box: lower bound via the pseudo-inverse of K
    let kmat = QMatrix::from_rows(kernel.clone())?.transpose(); // n × r
    let pinv = kmat.gram().inverse().ok_or(Error::Singular)?.mul(&kmat.transpose());
    let center_inf = center.iter().map(|x| x.abs()).max().unwrap();
    let t = Rational::from_integer(BigInt::from(r + 1)) / pinv.max_row_abs_sum() - center_inf;
    let m_min = fiber.min_nonzero_norm();
    let outside = if t.is_positive() {
        let reach = t.ceil().to_integer().to_u64().unwrap_or(u64::MAX).saturating_sub(1);
        m_min.max(&fiber.outside_box_bound(reach))
    } else {
        m_min
    };
    Ok(BoundsCertificate {
        lower: upper.min(&outside),
        upper,
        witness: Some(Witness::Preimage(witness)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, PAdicContext};

    fn padic(p: u64) -> ScalarContext {
        ScalarContext::PAdic(PAdicContext::new(p).unwrap())
    }

    #[test]
    fn partitions_are_bell_numbers() {
        for (n, bell) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            let mut count = 0;
            set_partitions(n, n, &mut |_, _| count += 1);
            assert_eq!(count, bell);
        }
        let mut count = 0;
        set_partitions(4, 1, &mut |_, _| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn padic_presentations() {
        let l1 = NormedLattice::integer_lp(2, PExponent::one());
        let b = PresentationBudget::default();
        let cert = presentation_norm(&[int(1), int(0)], &l1, &padic(5), &b).unwrap();
        assert!(cert.meets() && cert.upper.is_one());
        let cert = presentation_norm(&[int(5), int(1)], &l1, &padic(5), &b).unwrap();
        assert!(cert.meets() && cert.upper.is_one());
        let cert = presentation_norm(&[frac(1, 5), int(0)], &l1, &padic(5), &b).unwrap();
        assert!(cert.meets());
        assert_eq!(cert.upper, PowerValue::from_int(5));
        let Some(Witness::Presentation(terms)) = &cert.witness else { panic!() };
        let p = Presentation {
            terms: terms.iter().map(|(f, s)| PresentationTerm { element: f.clone(), scalar: s.clone() }).collect(),
        };
        assert_eq!(p.evaluate(2), vec![frac(1, 5), int(0)]);
    }

    #[test]
    fn real_presentations() {
        let linf = NormedLattice::integer_lp(2, PExponent::Infinite);
        let b = PresentationBudget::default();
        let cert = presentation_norm(&[frac(3, 2), frac(1, 2)], &linf, &ScalarContext::Real, &b).unwrap();
        assert!(cert.meets());
        assert_eq!(cert.upper, PowerValue::rational(frac(3, 2)));
        let l1 = NormedLattice::integer_lp(2, PExponent::one());
        let cert = presentation_norm(&[int(1), int(-1)], &l1, &ScalarContext::Real, &b).unwrap();
        assert!(cert.meets());
        assert_eq!(cert.upper, PowerValue::from_int(2));
    }

    #[test]
    fn tree_merging() {
        let c = PowerValue::from_int(2);
        let v = |x: &[i64]| x.iter().map(|&y| PowerValue::from_int(y)).collect::<Vec<_>>();
        assert_eq!(best_tree_value(&v(&[1, 1, 1]), &c), PowerValue::from_int(4));
        assert_eq!(best_tree_value(&v(&[1, 1, 4]), &c), PowerValue::from_int(8));
        assert_eq!(best_tree_value(&v(&[1, 1, 1, 1]), &c), PowerValue::from_int(4));
        assert_eq!(best_tree_value(&v(&[3]), &c), PowerValue::from_int(3));
        assert_eq!(best_tree_value(&v(&[2, 5, 1]), &PowerValue::one()), PowerValue::from_int(5));
    }

    #[test]
    fn quotients() {
        let l1 = NormedLattice::integer_lp(2, PExponent::one());
        // x + y = 1: the best preimage has norm 1
        let p = QMatrix::from_i64(&[&[1, 1]]);
        let cert = quotient_norm(&[int(1)], &p, &l1, &QuotientBudget::default()).unwrap();
        assert!(cert.meets() && cert.upper.is_one(), "{cert:?}");
        let zero = quotient_norm(&[int(0)], &p, &l1, &QuotientBudget::default()).unwrap();
        assert!(zero.meets() && zero.upper.is_zero());
        // identity projection: the unique preimage
        let id = QMatrix::identity(2);
        let cert = quotient_norm(&[int(3), int(-4)], &id, &l1, &QuotientBudget::default()).unwrap();
        assert!(cert.meets());
        assert_eq!(cert.upper, PowerValue::from_int(7));
        // rational projection entries are cleared
        let half = QMatrix::from_rows(vec![vec![frac(1, 2), frac(1, 2)]]).unwrap();
        let cert = quotient_norm(&[int(1)], &half, &l1, &QuotientBudget::default()).unwrap();
        assert!(cert.meets());
        assert_eq!(cert.upper, PowerValue::from_int(2));
        // 2x + 4y = 1 has no integral preimage
        let q = QMatrix::from_i64(&[&[2, 4]]);
        assert_eq!(quotient_norm(&[int(1)], &q, &l1, &QuotientBudget::default()).unwrap_err(), Error::NoPreimage);
    }
}
