use std::cmp::Ordering;

use halo_core::halo::{check_halo_axioms, flow_halo, lip_functor, HaloDescriptor, ScalarContext};
use halo_core::isometry::{
    ckn_dual_norm, enumerate_kn_z, generate_relations, involution, iota, iota_bound, pair_norm, siso_membership_int,
    siso_membership_padic, siso_membership_real, MatrixPair,
};
use halo_core::lattice::{operator_norm, spectral_norm, tree_norm, NormedLattice, TreeBudget, Witness};
use halo_core::linalg::QMatrix;
use halo_core::norms::{lp_norm, PExponent};
use halo_core::scalar::{cmp_power, int, le, PAdicContext, PowerValue, Rational};
use halo_core::tensor::{presentation_norm, PresentationBudget};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=12).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

fn matrix(n: usize) -> impl Strategy<Value = QMatrix> {
    prop::collection::vec(rational(), n * n).prop_map(move |v| QMatrix::from_flat(n, n, v))
}

fn int_matrix(n: usize, r: i64) -> impl Strategy<Value = QMatrix> {
    prop::collection::vec(-r..=r, n * n).prop_map(move |v| QMatrix::from_flat(n, n, v.into_iter().map(int).collect()))
}

fn exponent() -> impl Strategy<Value = PExponent> {
    prop_oneof![
        Just(PExponent::Finite(Rational::new(1.into(), 2.into()))),
        Just(PExponent::one()),
        Just(PExponent::Finite(int(2))),
        Just(PExponent::Finite(int(3))),
        Just(PExponent::Infinite),
    ]
}

fn flow_parameter() -> impl Strategy<Value = Rational> {
    prop_oneof![
        Just(Rational::new(1.into(), 2.into())),
        Just(Rational::new(1.into(), 3.into())),
        Just(int(2)),
        Just(int(3)),
        Just(Rational::new(3.into(), 2.into())),
    ]
}

/// A rational orthogonal matrix: the Cayley transform `(I − A)(I + A)^{-1}`
/// of a skew-symmetric `A`.
fn cayley(n: usize, upper: &[Rational]) -> QMatrix {
    let mut a = QMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            a.set(i, j, upper[k].clone());
            a.set(j, i, -upper[k].clone());
            k += 1;
        }
    }
    let id = QMatrix::identity(n);
    id.sub(&a).mul(&id.add(&a).inverse().expect("I + A is invertible for skew A"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_norm_is_monotone_in_p(xs in prop::collection::vec(rational(), 0..6), p in exponent(), q in exponent()) {
        let (small, large) = if p <= q { (p, q) } else { (q, p) };
        let vals: Vec<PowerValue> = xs.iter().map(|x| PowerValue::rational(x.abs())).collect();
        // equal exponents give the same enclosure, which `le` cannot order
        prop_assume!(small != large);
        prop_assert_eq!(le(&lp_norm(&vals, &large), &lp_norm(&vals, &small)), Some(true));
    }

    #[test]
    fn power_values_compose(b in 1i64..50, e1 in flow_parameter(), e2 in flow_parameter()) {
        let v = PowerValue::rational(int(b));
        let lhs = v.pow(&e1).pow(&e2);
        let rhs = v.pow(&(&e1 * &e2));
        prop_assert_eq!(cmp_power(&lhs, &rhs), Some(Ordering::Equal));
        let prod = v.pow(&e1).mul(&v.pow(&e2));
        prop_assert_eq!(cmp_power(&prod, &v.pow(&(&e1 + &e2))), Some(Ordering::Equal));
    }

    #[test]
    fn comparison_is_antisymmetric(a in 1i64..40, b in 1i64..40, e in flow_parameter()) {
        let x = PowerValue::rational(int(a)).pow(&e);
        let y = PowerValue::rational(int(b)).pow(&e);
        prop_assert_eq!(cmp_power(&x, &y), Some(a.cmp(&b)));
        prop_assert_eq!(cmp_power(&y, &x), Some(b.cmp(&a)));
    }

    #[test]
    fn padic_norm_is_multiplicative_and_ultrametric(x in rational(), y in rational(), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let ctx = PAdicContext::new(p).unwrap();
        prop_assert_eq!(ctx.abs(&(&x * &y)), ctx.abs(&x).mul(&ctx.abs(&y)));
        prop_assert_eq!(le(&ctx.abs(&(&x + &y)), &ctx.abs(&x).max(&ctx.abs(&y))), Some(true));
    }

    #[test]
    fn flows_compose(s in flow_parameter(), t in flow_parameter()) {
        let h = HaloDescriptor::integers();
        let two = flow_halo(&flow_halo(&h, &s).unwrap(), &t).unwrap();
        prop_assert_eq!(two, flow_halo(&h, &(&s * &t)).unwrap());
        let back = flow_halo(&flow_halo(&h, &s).unwrap(), &s.recip()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn flowed_halos_satisfy_the_axioms(t in flow_parameter()) {
        let samples: Vec<Rational> = (-4..=4).map(int).collect();
        for h in [HaloDescriptor::integers(), lip_functor(&HaloDescriptor::integers()).unwrap()] {
            let r = check_halo_axioms(&flow_halo(&h, &t).unwrap(), &samples).unwrap();
            prop_assert!(r.passed(), "{:?}", r.first_failure());
        }
    }

    #[test]
    fn determinant_is_multiplicative(a in matrix(3), b in matrix(3)) {
        prop_assert_eq!(a.mul(&b).det(), a.det() * b.det());
        if let Some(inv) = a.inverse() {
            prop_assert!(a.mul(&inv).is_identity());
        }
    }

    #[test]
    fn spectral_norm_is_bracketed(a in matrix(3)) {
        // max column 2-norm ≤ ‖A‖₂ ≤ sqrt(‖A‖₁‖A‖_∞)
        let s = spectral_norm(&a);
        let g = a.gram();
        let col = (0..3).map(|j| g.get(j, j).clone()).max().unwrap();
        prop_assert_eq!(le(&PowerValue::power(col, Rational::new(1.into(), 2.into())), &s), Some(true));
        let top = a.max_row_abs_sum() * a.max_col_abs_sum();
        prop_assert_eq!(le(&s, &PowerValue::power(top, Rational::new(1.into(), 2.into()))), Some(true));
    }

    #[test]
    fn operator_norms_are_submultiplicative(a in int_matrix(2, 4), b in int_matrix(2, 4), q in prop::sample::select(vec![PExponent::one(), PExponent::Infinite, PExponent::Finite(int(2))])) {
        let ctx = ScalarContext::Real;
        let ab = operator_norm(&a.mul(&b), &q, &ctx).unwrap().upper;
        let na = operator_norm(&a, &q, &ctx).unwrap().upper;
        let nb = operator_norm(&b, &q, &ctx).unwrap().upper;
        // equality is common (e.g. b = I), so only rule out a certified violation
        prop_assert!(ab.bounds().0 <= na.mul(&nb).bounds().1);
    }

    #[test]
    fn rational_rotations_are_real_members(upper in prop::collection::vec(rational(), 3), t in flow_parameter()) {
        let u = cayley(3, &upper);
        prop_assert!(u.gram().is_identity());
        let c = siso_membership_real(&u, &t).unwrap();
        prop_assert!(c.member && c.all_exact());
        // scaling breaks orthogonality
        let c = siso_membership_real(&u.scale(&Rational::new(6.into(), 5.into())), &t).unwrap();
        prop_assert!(!c.member);
    }

    #[test]
    fn padic_membership_matches_definition(m in int_matrix(2, 9), p in prop::sample::select(vec![2u64, 3, 5, 7]), t in flow_parameter()) {
        let ctx = PAdicContext::new(p).unwrap();
        let det = m.det();
        let expected = !det.is_zero() && ctx.valuation(&det) == Some(0);
        prop_assert_eq!(siso_membership_padic(&m, &ctx, &t).unwrap().member, expected);
        // dividing by p creates a negative valuation
        if !m.is_zero() {
            let scaled = m.scale(&Rational::new(1.into(), (p as i64).into()));
            let content_divisible = m.entries().iter().all(|x| ctx.valuation(x).map_or(true, |v| v >= 1));
            if !content_divisible {
                prop_assert!(!siso_membership_padic(&scaled, &ctx, &t).unwrap().member);
            }
        }
    }

    #[test]
    fn relations_characterize_inverse_pairs(u in matrix(2), w in matrix(2)) {
        let rels = generate_relations(2).unwrap();
        if let Ok(pair) = MatrixPair::from_invertible(&u) {
            prop_assert!(rels.iter().all(|r| r.evaluate(&pair).is_zero()));
        }
        let pair = MatrixPair::new(u, w).unwrap();
        let all_zero = rels.iter().all(|r| r.evaluate(&pair).is_zero());
        prop_assert_eq!(all_zero, pair.is_inverse_pair());
    }

    #[test]
    fn involution_reverses_products(a in matrix(2), b in matrix(2), c in matrix(2), d in matrix(2)) {
        let x = MatrixPair::new(a, b).unwrap();
        let y = MatrixPair::new(c, d).unwrap();
        prop_assert_eq!(involution(&x.mul(&y)), involution(&y).mul(&involution(&x)));
        prop_assert_eq!(involution(&involution(&x)), x);
    }

    #[test]
    fn iota_is_bounded(f0 in matrix(2), f1 in matrix(2), s in rational(), q in prop::sample::select(vec![PExponent::Finite(int(2)), PExponent::Infinite])) {
        let f = MatrixPair::new(f0, f1).unwrap();
        let lhs = pair_norm(&iota(&f, &s), &ScalarContext::Real, &q).unwrap();
        prop_assert_eq!(le(&lhs, &iota_bound(&f, &s, &q)), Some(true));
        // homogeneity: the enclosures of |s|·‖f‖ and ‖ι(f, s)‖ overlap
        let (a_lo, a_hi) = ckn_dual_norm(&f).scale(&s.abs()).bounds();
        let (b_lo, b_hi) = ckn_dual_norm(&iota(&f, &s)).bounds();
        prop_assert!(a_lo <= b_hi && b_lo <= a_hi);
    }

    #[test]
    fn padic_presentation_norm_is_entrywise_max(a in nonzero_rational(), b in rational(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let ctx = PAdicContext::new(p).unwrap();
        let base = NormedLattice::integer_lp(2, PExponent::Infinite);
        let cert = presentation_norm(&[a.clone(), b.clone()], &base, &ScalarContext::PAdic(ctx.clone()), &PresentationBudget::default()).unwrap();
        prop_assert!(cert.meets());
        prop_assert_eq!(cert.upper, ctx.abs(&a).max(&ctx.abs(&b)));
    }

    #[test]
    fn tree_witnesses_are_valid(x in -4i64..=4, y in -4i64..=4, c in prop::sample::select(vec![int(1), int(2), Rational::new(3.into(), 2.into())])) {
        let l = NormedLattice::integer_lp(1, PExponent::Infinite);
        let parts = [(&l, vec![int(x)]), (&l, vec![int(y)])];
        let cert = tree_norm(&parts, &PowerValue::rational(c.clone()), &TreeBudget::default()).unwrap();
        prop_assert_eq!(le(&cert.lower, &cert.upper), Some(true));
        // never worse than the canonical two-leaf tree
        let canonical = if x == 0 || y == 0 { int(x.abs().max(y.abs())) } else { &c * int(x.abs().max(y.abs())) };
        prop_assert_eq!(le(&cert.upper, &PowerValue::rational(canonical)), Some(true));
        if let Some(Witness::Tree(tree)) = &cert.witness {
            let mut sums = [Rational::zero(), Rational::zero()];
            for leaf in tree.leaves() {
                sums[leaf.summand] += &leaf.element[0];
            }
            prop_assert_eq!(sums, [int(x), int(y)]);
        } else {
            prop_assert!(x == 0 && y == 0);
        }
    }
}

#[test]
fn kn_z_is_a_group() {
    let one = Rational::one();
    let k3 = enumerate_kn_z(3).unwrap();
    let set: std::collections::HashSet<Vec<Rational>> = k3.iter().map(|m| m.entries().to_vec()).collect();
    for a in &k3 {
        assert!(siso_membership_int(a, &one).unwrap().member);
        assert!(set.contains(a.inverse().unwrap().entries()));
        for b in k3.iter().step_by(5) {
            assert!(set.contains(a.mul(b).entries()));
        }
    }
}
