mod common;

use mfgmix::ingest::synth_generate;
use mfgmix::mixture::{
    em_baseline_fit, fit, fit_from, modified_log_likelihood, random_init, responsibilities,
    update_theta, update_weights, FitConfig,
};
use mfgmix::{MixtureModel, SimplexVector};

fn separated_truth() -> MixtureModel {
    let mu: Vec<Vec<f64>> = (0..3)
        .map(|k| (0..12).map(|d| if d % 3 == k { 0.85 } else { 0.1 }).collect())
        .collect();
    MixtureModel::bernoulli(SimplexVector::new(vec![0.2, 0.3, 0.5]).unwrap(), &mu).unwrap()
}

#[test]
fn zero_entropy_fixed_point_satisfies_critical_point_equations() {
    let data = synth_generate(&separated_truth(), 600, 1);
    let res = fit(&data, &FitConfig::new(3).with_epsilon(0.0).with_seed(2)).unwrap();
    assert!(res.converged);
    let resp = responsibilities(&res.model, &data).unwrap();
    let alpha = update_weights(&resp);
    let theta = update_theta(&resp, &data, 0.0).unwrap();
    for k in 0..3 {
        assert!((alpha[k] - res.model.weights()[k]).abs() <= 1e-6);
        for d in 0..12 {
            assert!((theta.cell(k, d)[1] - res.model.mu(k, d)).abs() <= 1e-6);
        }
    }
}

#[test]
fn single_component_baseline_needs_one_pass() {
    let data = synth_generate(&separated_truth(), 300, 4);
    let res = em_baseline_fit(&data, &FitConfig::new(1).with_seed(9)).unwrap();
    for d in 0..12 {
        let freq = data.samples().filter(|x| x[d] == 1).count() as f64 / 300.0;
        assert!((res.model.mu(0, d) - freq).abs() < 1e-12);
    }
    // the second pass only confirms the fixed point
    assert_eq!(res.iterations, 2);
}

#[test]
fn permuting_the_initialization_permutes_the_fit() {
    let data = synth_generate(&separated_truth(), 450, 5);
    let cfg = FitConfig::new(3).with_seed(6);
    let init = random_init(3, 12, 2, 6);
    let order = [2, 0, 1];
    let a = fit_from(&data, &cfg, init.clone()).unwrap();
    let b = fit_from(&data, &cfg, init.permuted(&order)).unwrap();
    let expected = a.model.permuted(&order);
    assert_eq!(a.iterations, b.iterations);
    for (p, q) in expected.components().iter().zip(b.model.components()) {
        assert!(p.squared_distance(q.as_slice()).sqrt() < 1e-9);
    }
    for k in 0..3 {
        assert!((expected.weights()[k] - b.model.weights()[k]).abs() < 1e-9);
    }
}

#[test]
fn entropy_fit_recovers_separated_clusters() {
    let truth = separated_truth();
    let data = synth_generate(&truth, 900, 7);
    let res = fit(&data, &FitConfig::new(3).with_seed(8)).unwrap();
    assert!(res.converged);
    assert!(res.model.components().iter().all(|c| c.min() > 0.0));
    let report = mfgmix::report::ClusterReport::new(&res.responsibilities, &data).unwrap();
    assert!(report.diagonal_mean > 0.95, "{}", report.diagonal_mean);
    let l = modified_log_likelihood(&res.model, &data, 0.05).unwrap();
    assert!(l.is_finite());
}

#[test]
fn repeated_fits_are_bitwise_identical() {
    let data = synth_generate(&separated_truth(), 300, 10);
    let cfg = FitConfig::new(3).with_seed(11);
    let a = fit(&data, &cfg).unwrap();
    let b = fit(&data, &cfg).unwrap();
    assert_eq!(a.model.to_text(), b.model.to_text());
    assert_eq!(a.loglik_trace, b.loglik_trace);
}

#[cfg(feature = "parallel")]
#[test]
fn results_do_not_depend_on_thread_count() {
    let data = synth_generate(&separated_truth(), 300, 12);
    let cfg = FitConfig::new(3).with_seed(13);
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| fit(&data, &cfg).unwrap())
    };
    assert_eq!(run_with(1).model.to_text(), run_with(4).model.to_text());
}

#[test]
fn long_images_keep_responsibilities_normalized() {
    let data = common::take_per_class(&common::mnist_digits(2, &[0, 7]), 50);
    let res = fit(&data, &FitConfig::new(2).with_seed(3)).unwrap();
    for row in res.responsibilities.rows() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }
}
