mod common;

use common::*;
use halo_core::scalar::{int, PowerValue, Rational};
use halo_core::tensor::best_tree_value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tree_norm_matches_exhaustive_trees() {
    let mut r = SweepReport::default();
    tree_sweep(&mut r);
    assert!(r.mismatches.is_empty(), "{:#?}", r.mismatches);
    assert!(r.cases > 300);
}

#[test]
fn renorm_matches_exhaustive_decompositions() {
    let mut r = SweepReport::default();
    renorm_sweep(&mut r);
    assert!(r.mismatches.is_empty(), "{:#?}", r.mismatches);
}

#[test]
fn greedy_merging_is_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let k = rng.gen_range(1..=7);
        let vals: Vec<Rational> = (0..k).map(|_| int(rng.gen_range(1..=9))).collect();
        let c = Rational::new(rng.gen_range(2..=6).into(), 2.into());
        let greedy = best_tree_value(&vals.iter().cloned().map(PowerValue::rational).collect::<Vec<_>>(), &PowerValue::rational(c.clone()));
        assert_eq!(greedy.as_rational(), Some(&best_tree_over(&vals, &c)), "{vals:?} C={c}");
    }
}

#[test]
fn worked_example_against_oracle() {
    let s = [Summand::linf(1), Summand::linf(1)];
    let mut o = TreeOracle::new(&s, int(2), 2);
    assert_eq!(o.infimum(&[2, 2], 6), int(4));
    assert_eq!(o.infimum(&[1, 1], 6), int(2));
    assert_eq!(o.infimum(&[3, 0], 6), int(3));
}
