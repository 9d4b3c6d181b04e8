//! Single-population, `S`-state stationary MFG subsystem.
//!
//! Given the coupling data `θ`, the HJB equation is solved by policy
//! iteration ([`solve_hjb`]) and the optimal transition matrix is fed to the
//! Fokker–Planck (stationarity) equation ([`stationary_distribution`]).

pub mod cost;
pub mod nash;
pub mod policy;
pub mod stationary;

pub use cost::{CostKind, CostSpec, Coupling, TransitionCost};
pub use nash::{average_cost, cost_gradient, row_nash_minimize, row_nash_minimize_from};
pub use policy::{bellman_residual, hjb_policy_step, solve_hjb, HjbSolution};
pub use stationary::{stationary_distribution, stationary_residual};

use crate::error::KernelError;
use crate::simplex::{SimplexVector, StochasticMatrix, ValueVector};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Max-norm change of `P` that stops policy iteration.
    pub policy_tolerance: f64,
    /// Row-sum residual accepted from the row minimizer.
    pub inner_root_tolerance: f64,
    pub max_policy_iterations: usize,
    pub warm_start: Option<StochasticMatrix>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            policy_tolerance: 1e-10,
            inner_root_tolerance: 1e-12,
            max_policy_iterations: 500,
            warm_start: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.policy_tolerance > 0.0 && self.inner_root_tolerance > 0.0) {
            return Err(KernelError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_policy_iterations == 0 {
            return Err(KernelError::InvalidConfig(
                "at least one policy iteration is required".into(),
            ));
        }
        Ok(())
    }
}

/// Solution `(V, λ, π, P)` of one subsystem plus diagnostics.
#[derive(Debug, Clone)]
pub struct MfgSolution {
    pub value: ValueVector,
    pub ergodic_cost: f64,
    pub distribution: SimplexVector,
    pub transition: StochasticMatrix,
    pub hjb_residual: f64,
    pub fp_residual: f64,
    pub policy_iterations: usize,
}

/// Solves the HJB equation for `θ`, then the stationary distribution of the optimal policy.
pub fn solve_subsystem(
    theta: &SimplexVector,
    spec: &CostSpec,
    cfg: &SolverConfig,
) -> Result<MfgSolution, KernelError> {
    let hjb = solve_hjb(theta, spec, cfg)?;
    let distribution = stationary_distribution(&hjb.transition)?;
    if spec.epsilon > 0.0 {
        let min_mass = distribution.min().min(hjb.transition.min_entry());
        if !(min_mass > 0.0) {
            return Err(KernelError::PositivityViolation { min_mass });
        }
    }
    let hjb_residual = bellman_residual(
        &hjb.value,
        hjb.ergodic_cost,
        theta,
        spec,
        cfg.inner_root_tolerance,
    )?;
    let fp_residual = stationary_residual(&hjb.transition, &distribution);
    Ok(MfgSolution {
        value: hjb.value,
        ergodic_cost: hjb.ergodic_cost,
        distribution,
        transition: hjb.transition,
        hjb_residual,
        fp_residual,
        policy_iterations: hjb.iterations,
    })
}
