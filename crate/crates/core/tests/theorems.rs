//! Constructed ordered pairs and the PoE inequalities they imply.

mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_suite(name: &str, seed: u64, trial: impl Fn(&mut ChaCha8Rng, usize) -> Option<TrialCheck>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (checks, skipped) = run_suite(&mut rng, 60, trial);
    assert_eq!(checks.len(), 60, "{name}: too few usable pairs ({skipped} skipped)");
    for c in &checks {
        assert!(c.certified, "{name}: order of the constructed pair not certified: {}", c.detail);
        assert!(c.poe_ok, "{name}: PoE inequality violated: {}", c.detail);
    }
}

#[test]
fn supermodular_pairs_increase_poe() {
    assert_suite("supermodular", 21, supermodular_trial);
}

#[test]
fn idcv_spreads_increase_poe() {
    assert_suite("idcv", 22, idcv_trial);
}

#[test]
fn icv_spreads_of_independent_laws_increase_poe() {
    assert_suite("icv", 23, icv_product_trial);
}

#[test]
fn laplace_ordered_children_decrease_poe() {
    assert_suite("laplace", 24, laplace_trial);
}
