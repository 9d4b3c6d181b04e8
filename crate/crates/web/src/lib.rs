//! Browser bindings: solve one subsystem, fit a toy mixture, render components.

use wasm_bindgen::prelude::*;

use mfgmix::ingest::synth_generate;
use mfgmix::mixture::{em_baseline_fit, fit, FitConfig};
use mfgmix::report::{parameter_pixels, ClusterReport};
use mfgmix::{solve_subsystem, CostSpec, Dataset, MixtureModel, SimplexVector, SolverConfig};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Subsystem {
    value: Vec<f64>,
    distribution: Vec<f64>,
    transition: Vec<f64>,
    ergodic_cost: f64,
    residual: f64,
}

#[wasm_bindgen]
impl Subsystem {
    #[wasm_bindgen(getter)]
    pub fn value(&self) -> Vec<f64> {
        self.value.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn distribution(&self) -> Vec<f64> {
        self.distribution.clone()
    }

    /// Row-major `S × S`.
    #[wasm_bindgen(getter)]
    pub fn transition(&self) -> Vec<f64> {
        self.transition.clone()
    }

    #[wasm_bindgen(getter, js_name = ergodicCost)]
    pub fn ergodic_cost(&self) -> f64 {
        self.ergodic_cost
    }

    /// Larger of the HJB and stationarity residuals.
    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// Solves the subsystem for `theta` (must sum to 1).
#[wasm_bindgen]
pub fn solve(theta: Vec<f64>, eps: f64) -> Result<Subsystem, JsError> {
    let theta = SimplexVector::new(theta).map_err(js_err)?;
    let spec = CostSpec::with_epsilon(eps);
    let sol = solve_subsystem(&theta, &spec, &SolverConfig::default()).map_err(js_err)?;
    Ok(Subsystem {
        value: sol.value.as_slice().to_vec(),
        distribution: sol.distribution.as_slice().to_vec(),
        transition: sol.transition.as_slice().to_vec(),
        ergodic_cost: sol.ergodic_cost,
        residual: sol.hjb_residual.max(sol.fp_residual),
    })
}

/// Toy binary images: one stroke per component on a `side × side` grid.
fn stroke_model(side: usize, k: usize) -> MixtureModel {
    let on = |c: usize, r: usize, col: usize| match c % 4 {
        0 => r == side / 2 || r + 1 == side / 2,
        1 => col == side / 2 || col + 1 == side / 2,
        2 => r.abs_diff(col) <= 1,
        _ => (r + col + 1).abs_diff(side) <= 1,
    };
    let mu: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            (0..side * side)
                .map(|d| if on(c, d / side, d % side) { 0.85 } else { 0.08 })
                .collect()
        })
        .collect();
    MixtureModel::bernoulli(SimplexVector::uniform(k), &mu).unwrap()
}

#[wasm_bindgen]
pub struct Demo {
    side: usize,
    truth: MixtureModel,
    data: Dataset,
    fitted: Option<MixtureModel>,
}

#[wasm_bindgen]
impl Demo {
    /// `k` (1..=4) stroke components, `n` samples of `side × side` pixels.
    #[wasm_bindgen(constructor)]
    pub fn new(k: usize, side: usize, n: usize, seed: u64) -> Result<Demo, JsError> {
        if !(1..=4).contains(&k) || side < 3 || n == 0 {
            return Err(JsError::new("need 1 <= k <= 4, side >= 3, n >= 1"));
        }
        let truth = stroke_model(side, k);
        let data = synth_generate(&truth, n, seed);
        Ok(Demo {
            side,
            truth,
            data,
            fitted: None,
        })
    }

    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Grey levels of sample `n`.
    pub fn sample_pixels(&self, n: usize) -> Vec<u8> {
        self.data
            .sample(n % self.data.num_samples())
            .iter()
            .map(|&x| if x > 0 { 255 } else { 0 })
            .collect()
    }

    pub fn truth_pixels(&self, k: usize) -> Vec<u8> {
        parameter_pixels(&self.truth, k)
    }

    /// Fits the mixture and returns the mean diagonal of the aligned confusion matrix.
    pub fn fit(&mut self, eps: f64, seed: u64, baseline: bool) -> Result<FitSummary, JsError> {
        let k = self.truth.num_components();
        let cfg = FitConfig::new(k).with_epsilon(eps).with_seed(seed);
        let res = if baseline {
            em_baseline_fit(&self.data, &cfg)
        } else {
            fit(&self.data, &cfg)
        }
        .map_err(js_err)?;
        let report = ClusterReport::new(&res.responsibilities, &self.data).map_err(js_err)?;
        let mut order = vec![0; k];
        for (cluster, &class) in report.permutation.iter().enumerate() {
            order[class] = cluster;
        }
        let model = res.model.permuted(&order);
        let summary = FitSummary {
            iterations: res.iterations,
            converged: res.converged,
            diagonal_mean: report.diagonal_mean,
            loglik: res.loglik_trace.to_vec(),
        };
        self.fitted = Some(model);
        Ok(summary)
    }

    /// Grey levels of fitted component `k`, ordered to match the true components.
    pub fn fitted_pixels(&self, k: usize) -> Vec<u8> {
        self.fitted
            .as_ref()
            .map(|m| parameter_pixels(m, k))
            .unwrap_or_default()
    }
}

#[wasm_bindgen]
pub struct FitSummary {
    iterations: usize,
    converged: bool,
    diagonal_mean: f64,
    loglik: Vec<f64>,
}

#[wasm_bindgen]
impl FitSummary {
    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }

    #[wasm_bindgen(getter, js_name = diagonalMean)]
    pub fn diagonal_mean(&self) -> f64 {
        self.diagonal_mean
    }

    #[wasm_bindgen(getter)]
    pub fn loglik(&self) -> Vec<f64> {
        self.loglik.clone()
    }
}
