mod common;

use cascade_lab::branching::{
    extinction_from_children, mean_matrix, spectral_radius, GeneratingFunctions, MeanMatrix, SolverOptions,
};
use cascade_lab::children::{children_distribution_fresh, children_distribution_infected, children_distributions};
use cascade_lab::io::load_model;
use cascade_lab::model::{marginal, mean_vector, Mode};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn children_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let model = random_micro_model(&mut rng);
        for i in 0..model.n_systems() {
            let fresh = children_distribution_fresh(&model, i).unwrap();
            let infected = children_distribution_infected(&model, i).unwrap();
            let g1 = children_gap(&fresh, &enumerated_children(&model, i, false));
            let g2 = children_gap(&infected, &enumerated_children(&model, i, true));
            assert!(g1 <= 1e-12 && g2 <= 1e-12, "case {case} CS {i}: {g1:e} {g2:e}");
        }
    }
}

#[test]
fn hand_worked_enumeration_example() {
    // p = {(1,1): .5, (2,0): .5}, q12 = .5, phi = 1: outcomes worked by hand
    let text = r#"{"n_systems": 2, "mode": "degree",
        "degree_dists": [[[[1, 1], 0.5], [[2, 0], 0.5]], [[[1, 0], 1.0]]],
        "infection": [[null, 0.5], [0.5, null]],
        "vulnerability": [{"kind": "power-law", "scale": 1, "exponent": 0},
                          {"kind": "power-law", "scale": 1, "exponent": 0}]}"#;
    let model = cascade_lab::io::parse_model(text).unwrap();
    let h = children_distribution_fresh(&model, 0).unwrap();
    assert_eq!(h.support_len(), 3);
    assert!((h.mass(&[0, 0, 1, 0]) - 0.25).abs() < 1e-15);
    assert!((h.mass(&[0, 1, 1, 0]) - 0.25).abs() < 1e-15);
    assert!((h.mass(&[0, 0, 2, 0]) - 0.5).abs() < 1e-15);
}

#[test]
fn mean_matrix_matches_thinning_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let model = random_micro_model(&mut rng);
        let n = model.n_systems();
        let m = mean_matrix(&children_distributions(&model).unwrap()).unwrap();
        for i in 0..n {
            let law = model.degree_dist(i);
            let mean = mean_vector(law);
            let internal = marginal(law, i).unwrap();
            let q_ii = match model.mode() {
                Mode::Children => 1.0,
                Mode::Degree => {
                    let phi = model.vulnerability(i);
                    internal.iter().map(|(d, p)| d as f64 * p * phi.phi(d).unwrap()).sum::<f64>() / internal.mean()
                }
            };
            let shifted: f64 = internal.iter().map(|(d, p)| d.saturating_sub(1) as f64 * p).sum();
            for j in 0..n {
                if j == i {
                    assert!((m.get(i, i + n) - q_ii * mean[i]).abs() < 1e-12);
                    assert!((m.get(i + n, i + n) - q_ii * shifted).abs() < 1e-12);
                } else {
                    let expect = model.infection(i, j) * mean[j];
                    assert!((m.get(i, j) - expect).abs() < 1e-12);
                    assert!((m.get(i + n, j) - expect).abs() < 1e-12);
                }
                if j != i {
                    assert_eq!(m.get(i, j + n), 0.0);
                    assert_eq!(m.get(i + n, j + n), 0.0);
                }
            }
            assert_eq!(m.get(i, i), 0.0);
            assert_eq!(m.get(i + n, i), 0.0);
            if model.internal_degree_floor() && model.mode() == Mode::Children {
                assert!((m.get(i + n, i + n) - (mean[i] - 1.0)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn spectral_radius_matches_characteristic_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..300 {
        let n = rng.random_range(1..=4);
        let a = random_nonnegative_matrix(&mut rng, n);
        let expect = spectral_radius_oracle(&a);
        let got = spectral_radius(&MeanMatrix::from_rows(&a).unwrap()).unwrap_or_else(|e| panic!("{a:?}: {e:?}")).value;
        assert!((got - expect).abs() <= 1e-8, "case {case}: {got} vs {expect} for {a:?}");
    }
}

#[test]
fn example_spectral_radius_matches_oracle() {
    let model = load_model("example1_p1").unwrap();
    let m = mean_matrix(&children_distributions(&model).unwrap()).unwrap();
    let expect = spectral_radius_oracle(&m.rows());
    assert!((spectral_radius(&m).unwrap().value - expect).abs() <= 1e-8);
    assert!((expect - 1.021).abs() < 1e-3);
}

#[test]
fn characteristic_polynomial_oracle_self_check() {
    // diag(1, 2, 3) has (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
    let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]];
    let c = characteristic_polynomial(&a);
    for (got, want) in c.iter().zip([-6.0, 11.0, -6.0, 1.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    assert!((spectral_radius_oracle(&a) - 3.0).abs() < 1e-12);
    // rotation by 90 degrees: eigenvalues +-i
    let r = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
    assert!((spectral_radius_oracle(&r) - 1.0).abs() < 1e-12);
}

/// If `f2(mu1) <= mu1` then the minimal fixed point of `f2` is below `mu1`.
#[test]
fn comparison_through_generating_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut checked = 0;
    for _ in 0..300 {
        let one = random_micro_model(&mut rng);
        let scale = rng.random_range(0.5..1.5);
        let Ok(two) = one.with_infection(|_, _, q| (q * scale).min(1.0)) else {
            continue;
        };
        let (h1, h2) = (children_distributions(&one).unwrap(), children_distributions(&two).unwrap());
        if near_critical(&h1) || near_critical(&h2) {
            continue;
        }
        let mu1 = extinction_from_children(&h1, &SolverOptions::default()).unwrap().mu;
        let mu2 = extinction_from_children(&h2, &SolverOptions::default()).unwrap().mu;
        let f2_at_mu1 = GeneratingFunctions::new(&h2).unwrap().eval(&mu1);
        if le_with_slack(&f2_at_mu1, &mu1, 0.0) {
            checked += 1;
            assert!(le_with_slack(&mu2, &mu1, 1e-9), "{mu2:?} > {mu1:?}");
        }
    }
    assert!(checked >= 50, "only {checked} comparable pairs");
}
