mod common;

use mfgmix::kernel::{
    bellman_residual, row_nash_minimize, row_nash_minimize_from, solve_hjb, CostSpec, SolverConfig,
};
use mfgmix::{solve_subsystem, SimplexVector, ValueVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn nash_minimizer_independent_of_starting_bracket() {
    let spec = CostSpec::with_epsilon(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for s in [2, 3, 6, 16] {
        let v = ValueVector::centered((0..s).map(|_| rng.random_range(-1.0..1.0)).collect());
        let reference = row_nash_minimize(&v, &spec, 1e-12).unwrap();
        for _ in 0..10 {
            let guess = rng.random_range(-5.0..5.0);
            let p = row_nash_minimize_from(&v, &spec, 1e-12, Some(guess)).unwrap();
            assert!(p.max_abs_diff(&reference) <= 1e-8);
        }
    }
}

#[test]
fn row_minimizers_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for s in [2, 3] {
        for eps in [0.0, 0.05] {
            let spec = CostSpec::with_epsilon(eps);
            for _ in 0..10 {
                let v = ValueVector::centered((0..s).map(|_| rng.random_range(-0.8..0.8)).collect());
                let p = row_nash_minimize(&v, &spec, 1e-12).unwrap();
                let grid = common::grid_row_minimizer(v.as_slice(), &spec, 1000);
                for (a, b) in p.row(0).iter().zip(&grid) {
                    assert!((a - b).abs() <= 2e-3, "s={s} eps={eps}");
                }
            }
        }
    }
}

#[test]
fn small_theta_perturbations_move_solution_little() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for eps in [0.0, 0.05] {
        let spec = CostSpec::with_epsilon(eps);
        for s in [2, 4, 7] {
            for _ in 0..10 {
                let theta = common::random_interior(&mut rng, s);
                let mut bumped = theta.as_slice().to_vec();
                let (i, j) = (rng.random_range(0..s), rng.random_range(0..s));
                let delta = 1e-6f64.min(bumped[j]);
                bumped[i] += delta;
                bumped[j] -= delta;
                let bumped = SimplexVector::new(bumped).unwrap();
                let a = solve_hjb(&theta, &spec, &SolverConfig::default()).unwrap();
                let b = solve_hjb(&bumped, &spec, &SolverConfig::default()).unwrap();
                let dv = a
                    .value
                    .as_slice()
                    .iter()
                    .zip(b.value.as_slice())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                assert!(dv <= 1e-4 && (a.ergodic_cost - b.ergodic_cost).abs() <= 1e-4);
            }
        }
    }
}

#[test]
fn entropic_two_state_matches_link_equation() {
    // for S = 2 the stationary mass of state 1 solves f_eps(mu) = theta_bar
    let spec = CostSpec::with_epsilon(0.05);
    for bar in [0.1, 0.3, 0.5, 0.8, 0.95] {
        let theta = SimplexVector::new(vec![1.0 - bar, bar]).unwrap();
        let sol = solve_subsystem(&theta, &spec, &SolverConfig::default()).unwrap();
        let mu = sol.distribution[1];
        assert!((mfgmix::mixture::entropy_link(mu, 0.05) - bar).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solutions_satisfy_their_equations(
        weights in proptest::collection::vec(0.0f64..1.0, 2..10),
        eps in prop_oneof![Just(0.0), 0.01f64..0.5],
    ) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-3);
        let theta = SimplexVector::from_weights(weights).unwrap();
        let spec = CostSpec::with_epsilon(eps);
        let sol = solve_subsystem(&theta, &spec, &SolverConfig::default()).unwrap();
        prop_assert!(sol.hjb_residual <= 1e-9);
        prop_assert!(sol.fp_residual <= 1e-12);
        prop_assert!(sol.value.sum().abs() <= 1e-10);
        let again = bellman_residual(&sol.value, sol.ergodic_cost, &theta, &spec, 1e-12).unwrap();
        prop_assert!(again <= 1e-9);
        if eps > 0.0 {
            prop_assert!(sol.distribution.min() > 0.0);
            prop_assert!(sol.transition.min_entry() > 0.0);
        } else {
            for i in 0..theta.len() {
                prop_assert!((sol.distribution[i] - theta[i]).abs() <= 1e-10);
            }
        }
    }
}
