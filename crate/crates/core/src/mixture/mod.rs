//! Outer loop: E-step, θ update, per-(k, d) MFG M-step, convergence test.
//!
//! [`em_baseline_fit`] runs the identical loop but copies `θ` straight into
//! the components, which is classical EM for a categorical mixture.

mod estep;

pub use estep::{
    entropy_link, expected_log_likelihood, log_evidence, log_likelihood,
    modified_log_likelihood, responsibilities, update_theta, update_weights, Responsibilities,
    ThetaField,
};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MixtureError;
use crate::kernel::{solve_subsystem, CostSpec, SolverConfig};
use crate::model::{Dataset, MixtureModel};
use crate::par::map_indexed;
use crate::simplex::{SimplexVector, StochasticMatrix};

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub num_components: usize,
    /// Cost model of every subsystem; `cost.epsilon` is the entropy weight.
    pub cost: CostSpec,
    /// Stop once `‖θ^(h+1) - θ^(h)‖₂` drops below this.
    pub tolerance: f64,
    pub max_outer_iterations: usize,
    pub seed: u64,
    /// Empty-cluster threshold as a fraction of `N`.
    pub empty_cluster_fraction: f64,
    /// Largest subsystem HJB/FP residual accepted at convergence.
    pub residual_gate: f64,
    pub solver: SolverConfig,
}

impl FitConfig {
    pub fn new(num_components: usize) -> Self {
        Self {
            num_components,
            cost: CostSpec::default(),
            tolerance: 1e-6,
            max_outer_iterations: 200,
            seed: 0,
            empty_cluster_fraction: 1e-8,
            residual_gate: 1e-8,
            solver: SolverConfig::default(),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.cost.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.cost.epsilon
    }

    pub fn validate(&self, data: &Dataset) -> Result<(), MixtureError> {
        if self.num_components == 0 {
            return Err(MixtureError::InvalidConfig("K must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) || !(self.residual_gate > 0.0) {
            return Err(MixtureError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.empty_cluster_fraction > 0.0) {
            return Err(MixtureError::InvalidConfig(
                "empty-cluster fraction must be positive".into(),
            ));
        }
        if data.is_empty() {
            return Err(MixtureError::InvalidConfig("dataset is empty".into()));
        }
        self.solver
            .validate()
            .and_then(|_| self.cost.validate(data.num_states()))
            .map_err(|e| MixtureError::InvalidConfig(e.to_string()))
    }
}

/// Per-subsystem diagnostics from the last M-step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsystemDiagnostics {
    pub ergodic_cost: f64,
    pub hjb_residual: f64,
    pub fp_residual: f64,
    /// `Σ_i V(i)`; zero up to round-off.
    pub value_sum: f64,
    pub policy_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: MixtureModel,
    /// Responsibilities under the final model.
    pub responsibilities: Responsibilities,
    pub iterations: usize,
    pub converged: bool,
    pub theta_residual_trace: Vec<f64>,
    /// Observed-data log-likelihood after each outer iteration.
    pub loglik_trace: Vec<f64>,
    /// K×D, k-major. Empty for the EM baseline.
    pub subsystem_diagnostics: Vec<SubsystemDiagnostics>,
    pub warnings: Vec<String>,
    pub theta: ThetaField,
}

impl FitResult {
    pub fn worst_residual(&self) -> f64 {
        self.subsystem_diagnostics
            .iter()
            .map(|d| d.hjb_residual.max(d.fp_residual))
            .fold(0.0, f64::max)
    }
}

/// Snapshot handed to an observer after each outer iteration.
pub struct IterationRecord<'a> {
    pub iteration: usize,
    pub model: &'a MixtureModel,
    pub theta: &'a ThetaField,
    pub theta_residual: f64,
    pub loglik: f64,
    /// Subsystem diagnostics of this iteration's M-step (empty for the baseline).
    pub diagnostics: &'a [SubsystemDiagnostics],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MStep {
    MeanField,
    Baseline,
}

/// `α = 1/K`, components drawn uniform on `(0, 1)` and normalized.
pub fn random_init(
    num_components: usize,
    num_dims: usize,
    num_states: usize,
    seed: u64,
) -> MixtureModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let components = (0..num_components * num_dims)
        .map(|_| {
            let w: Vec<f64> = (0..num_states).map(|_| rng.sample(Open01)).collect();
            SimplexVector::from_weights(w).expect("positive weights")
        })
        .collect();
    MixtureModel::new(
        SimplexVector::uniform(num_components),
        num_dims,
        num_states,
        components,
    )
    .expect("consistent shapes")
}

pub struct MStepOutput {
    pub components: Vec<SimplexVector>,
    pub diagnostics: Vec<SubsystemDiagnostics>,
    pub transitions: Vec<StochasticMatrix>,
}

/// Solves all `K·D` subsystems; `warm` (same order) seeds policy iteration.
pub fn mfg_m_step(
    theta: &ThetaField,
    cost: &CostSpec,
    solver: &SolverConfig,
    warm: Option<&[StochasticMatrix]>,
) -> Result<MStepOutput, MixtureError> {
    let d = theta.num_dims;
    let solved = map_indexed(theta.cells.len(), |idx| {
        let cfg = SolverConfig {
            warm_start: warm.and_then(|w| w.get(idx)).cloned(),
            ..solver.clone()
        };
        solve_subsystem(&theta.cells[idx], cost, &cfg).map_err(|source| {
            MixtureError::Subsystem {
                component: idx / d,
                dim: idx % d,
                source,
            }
        })
    });
    let mut out = MStepOutput {
        components: Vec::with_capacity(solved.len()),
        diagnostics: Vec::with_capacity(solved.len()),
        transitions: Vec::with_capacity(solved.len()),
    };
    for sol in solved {
        let sol = sol?;
        out.diagnostics.push(SubsystemDiagnostics {
            ergodic_cost: sol.ergodic_cost,
            hjb_residual: sol.hjb_residual,
            fp_residual: sol.fp_residual,
            value_sum: sol.value.sum(),
            policy_iterations: sol.policy_iterations,
        });
        out.components.push(sol.distribution);
        out.transitions.push(sol.transition);
    }
    Ok(out)
}

/// MFG mixture fit from the seeded random initialization.
pub fn fit(data: &Dataset, cfg: &FitConfig) -> Result<FitResult, MixtureError> {
    cfg.validate(data)?;
    let init = random_init(cfg.num_components, data.num_dims(), data.num_states(), cfg.seed);
    run(data, cfg, init, MStep::MeanField, None)
}

pub fn fit_from(
    data: &Dataset,
    cfg: &FitConfig,
    init: MixtureModel,
) -> Result<FitResult, MixtureError> {
    run(data, cfg, init, MStep::MeanField, None)
}

/// Classical EM, same initialization and stopping rule as [`fit`].
pub fn em_baseline_fit(data: &Dataset, cfg: &FitConfig) -> Result<FitResult, MixtureError> {
    cfg.validate(data)?;
    let init = random_init(cfg.num_components, data.num_dims(), data.num_states(), cfg.seed);
    run(data, cfg, init, MStep::Baseline, None)
}

pub fn em_baseline_fit_from(
    data: &Dataset,
    cfg: &FitConfig,
    init: MixtureModel,
) -> Result<FitResult, MixtureError> {
    run(data, cfg, init, MStep::Baseline, None)
}

/// The outer loop itself. `observer` sees every iterate.
pub fn run(
    data: &Dataset,
    cfg: &FitConfig,
    init: MixtureModel,
    mstep: MStep,
    mut observer: Option<&mut dyn FnMut(&IterationRecord<'_>)>,
) -> Result<FitResult, MixtureError> {
    cfg.validate(data)?;
    if init.num_components() != cfg.num_components
        || init.num_dims() != data.num_dims()
        || init.num_states() != data.num_states()
    {
        return Err(MixtureError::DimensionMismatch(
            "initial model does not match data and K".into(),
        ));
    }
    let (k, d, s) = (cfg.num_components, data.num_dims(), data.num_states());
    let floor = cfg.empty_cluster_fraction * data.num_samples() as f64;

    let mut model = init;
    let mut prev_theta: Option<ThetaField> = None;
    let mut warm: Option<Vec<StochasticMatrix>> = None;
    let mut diagnostics = Vec::new();
    let mut warnings = Vec::new();
    let mut theta_trace = Vec::new();
    let mut loglik_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_outer_iterations {
        iterations += 1;
        let resp = responsibilities(&model, data)?;
        let alpha = update_weights(&resp);
        let (masses, counts) = estep::theta_counts(&resp, data);
        let mut cells = Vec::with_capacity(k * d);
        for (comp, &mass) in masses.iter().enumerate() {
            if mass > floor {
                cells.extend(estep::theta_cells(&counts, comp, d, s)?);
            } else {
                warnings.push(format!(
                    "iteration {iterations}: component {comp} is empty, keeping its previous θ"
                ));
                match &prev_theta {
                    Some(p) => cells.extend_from_slice(&p.cells[comp * d..(comp + 1) * d]),
                    None => cells.extend_from_slice(&model.components()[comp * d..(comp + 1) * d]),
                }
            }
        }
        let theta = ThetaField {
            num_components: k,
            num_dims: d,
            num_states: s,
            cells,
        };

        let components = match mstep {
            MStep::MeanField => {
                let out = mfg_m_step(&theta, &cfg.cost, &cfg.solver, warm.as_deref())?;
                diagnostics = out.diagnostics;
                warm = Some(out.transitions);
                out.components
            }
            MStep::Baseline => theta.cells.clone(),
        };
        model = MixtureModel::new(alpha, d, s, components)?;

        let loglik = log_likelihood(&model, data)?;
        let residual = prev_theta
            .as_ref()
            .map_or(f64::INFINITY, |p| theta.distance(p));
        theta_trace.push(residual);
        loglik_trace.push(loglik);
        if let Some(obs) = observer.as_mut() {
            obs(&IterationRecord {
                iteration: iterations,
                model: &model,
                theta: &theta,
                theta_residual: residual,
                loglik,
                diagnostics: &diagnostics,
            });
        }
        prev_theta = Some(theta);

        let worst = diagnostics
            .iter()
            .map(|x: &SubsystemDiagnostics| x.hjb_residual.max(x.fp_residual))
            .fold(0.0, f64::max);
        if residual < cfg.tolerance && worst <= cfg.residual_gate {
            converged = true;
            break;
        }
    }

    let responsibilities = responsibilities(&model, data)?;
    Ok(FitResult {
        model,
        responsibilities,
        iterations,
        converged,
        theta_residual_trace: theta_trace,
        loglik_trace,
        subsystem_diagnostics: diagnostics,
        warnings,
        theta: prev_theta.expect("at least one iteration"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cluster_data() -> Dataset {
        // two well separated binary patterns on D = 4
        let mut samples = Vec::new();
        for n in 0..40u16 {
            let flip = (n % 7 == 0) as u16;
            if n % 2 == 0 {
                samples.extend([1 - flip, 1, 0, 0]);
            } else {
                samples.extend([0, 0, 1, 1 - flip]);
            }
        }
        Dataset::new(4, 2, samples, None).unwrap()
    }

    #[test]
    fn init_is_seeded() {
        let a = random_init(3, 5, 4, 7);
        let b = random_init(3, 5, 4, 7);
        let c = random_init(3, 5, 4, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.components().iter().all(|p| p.min() > 0.0));
        assert_eq!(a.weights().as_slice(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn single_component_fit_is_frequency_count_at_zero_entropy() {
        let data = two_cluster_data();
        let cfg = FitConfig::new(1).with_epsilon(0.0);
        let res = fit(&data, &cfg).unwrap();
        assert!(res.converged);
        for dim in 0..4 {
            let ones = data.samples().filter(|x| x[dim] == 1).count() as f64 / 40.0;
            assert!((res.model.mu(0, dim) - ones).abs() < 1e-10);
        }
    }

    #[test]
    fn baseline_and_mean_field_agree_at_zero_entropy() {
        let data = two_cluster_data();
        let cfg = FitConfig::new(2).with_epsilon(0.0).with_seed(3);
        let a = fit(&data, &cfg).unwrap();
        let b = em_baseline_fit(&data, &cfg).unwrap();
        assert!(a.converged && b.converged);
        assert_eq!(a.iterations, b.iterations);
        for (p, q) in a.model.components().iter().zip(b.model.components()) {
            assert!(p.squared_distance(q.as_slice()).sqrt() < 1e-8);
        }
    }

    #[test]
    fn loglik_monotone_for_baseline() {
        let data = two_cluster_data();
        let cfg = FitConfig::new(3).with_seed(11);
        let res = em_baseline_fit(&data, &cfg).unwrap();
        for w in res.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn entropy_fit_keeps_components_interior() {
        let data = two_cluster_data();
        let res = fit(&data, &FitConfig::new(2).with_seed(1)).unwrap();
        assert!(res.converged);
        assert!(res.worst_residual() <= 1e-8);
        assert!(res.model.components().iter().all(|p| p.min() > 0.0));
        assert_eq!(res.subsystem_diagnostics.len(), 8);
    }

    #[test]
    fn observer_sees_every_iterate() {
        let data = two_cluster_data();
        let cfg = FitConfig::new(2).with_seed(5);
        let mut seen = Vec::new();
        let mut obs = |r: &IterationRecord<'_>| seen.push(r.iteration);
        let init = random_init(2, 4, 2, 5);
        let res = run(&data, &cfg, init, MStep::MeanField, Some(&mut obs)).unwrap();
        assert_eq!(seen, (1..=res.iterations).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_config() {
        let data = two_cluster_data();
        assert!(matches!(
            fit(&data, &FitConfig::new(0)),
            Err(MixtureError::InvalidConfig(_))
        ));
        let wrong = random_init(2, 3, 2, 0);
        assert!(matches!(
            fit_from(&data, &FitConfig::new(2), wrong),
            Err(MixtureError::DimensionMismatch(_))
        ));
    }
}
