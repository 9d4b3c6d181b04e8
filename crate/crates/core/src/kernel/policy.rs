//! Policy iteration for the ergodic HJB equation.

use nalgebra::{DMatrix, DVector};

use crate::error::KernelError;
use crate::kernel::cost::CostSpec;
use crate::kernel::nash::{minimize_row, row_nash_minimize, row_objective};
use crate::kernel::stationary::solve_dense;
use crate::kernel::SolverConfig;
use crate::simplex::{SimplexVector, StochasticMatrix, ValueVector};

/// Output of [`solve_hjb`].
#[derive(Debug, Clone)]
pub struct HjbSolution {
    pub value: ValueVector,
    pub ergodic_cost: f64,
    pub transition: StochasticMatrix,
    pub iterations: usize,
    pub last_change: f64,
}

/// Policy evaluation: solves
/// `V(i) = Σ_j P_ij (c(P_ij) + ε log P_ij + V(j)) + F(i, θ) - λ`, `Σ_i V(i) = 0`
/// as one dense system in `(V, λ)`.
pub fn hjb_policy_step(
    transition: &StochasticMatrix,
    theta: &SimplexVector,
    spec: &CostSpec,
) -> Result<(ValueVector, f64), KernelError> {
    let s = transition.size();
    if theta.len() != s {
        return Err(KernelError::Dimension(format!(
            "theta has {} states, transition has {s}",
            theta.len()
        )));
    }
    let coupling = spec.coupling_vector(theta);
    let zero = vec![0.0; s];

    let n = s + 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..s {
        let row = transition.row(i);
        if spec.epsilon > 0.0 {
            if let Some(j) = row.iter().position(|&p| p <= 0.0) {
                return Err(KernelError::ZeroProbabilityWithEntropy { row: i, col: j });
            }
        }
        for (j, &p) in row.iter().enumerate() {
            a[(i, j)] -= p;
        }
        a[(i, i)] += 1.0;
        a[(i, s)] = 1.0;
        b[i] = row_objective(row, &zero, spec) + coupling[i];
    }
    for j in 0..s {
        a[(s, j)] = 1.0;
    }

    let x = solve_dense(&a, &b).ok_or(KernelError::SingularSystem)?;
    let lambda = x[s];
    // A constant shift of V leaves every equation unchanged, so centering is exact.
    let value = ValueVector::centered(x.iter().take(s).copied().collect());
    Ok((value, lambda))
}

/// Alternates policy evaluation and row minimization until the transition
/// matrix moves by less than `cfg.policy_tolerance` in max norm.
pub fn solve_hjb(
    theta: &SimplexVector,
    spec: &CostSpec,
    cfg: &SolverConfig,
) -> Result<HjbSolution, KernelError> {
    cfg.validate()?;
    spec.validate(theta.len())?;
    let s = theta.len();
    let mut transition = match &cfg.warm_start {
        Some(p) if p.size() == s && (spec.epsilon == 0.0 || p.min_entry() > 0.0) => p.clone(),
        _ => StochasticMatrix::uniform(s),
    };

    let mut last_change = f64::INFINITY;
    let mut best: Option<HjbSolution> = None;
    for iteration in 1..=cfg.max_policy_iterations {
        let (value, lambda) = hjb_policy_step(&transition, theta, spec)?;
        let next = row_nash_minimize(&value, spec, cfg.inner_root_tolerance)?;
        last_change = next.max_abs_diff(&transition);
        transition = next;
        if last_change < cfg.policy_tolerance {
            let (value, ergodic_cost) = hjb_policy_step(&transition, theta, spec)?;
            return Ok(HjbSolution {
                value,
                ergodic_cost,
                transition,
                iterations: iteration,
                last_change,
            });
        }
        best = Some(HjbSolution {
            value,
            ergodic_cost: lambda,
            transition: transition.clone(),
            iterations: iteration,
            last_change,
        });
    }
    Err(KernelError::MaxIterationsExceeded {
        iterations: cfg.max_policy_iterations,
        last_change,
        best: best.map(Box::new),
    })
}

/// `max_i |V(i) - min_q e_i(q, V) - F(i, θ) + λ|`, recomputing the minimizing row.
pub fn bellman_residual(
    value: &ValueVector,
    ergodic_cost: f64,
    theta: &SimplexVector,
    spec: &CostSpec,
    tolerance: f64,
) -> Result<f64, KernelError> {
    let best = minimize_row(value.as_slice(), spec, tolerance, None)?;
    let min_cost = row_objective(&best.row, value.as_slice(), spec);
    let coupling = spec.coupling_vector(theta);
    Ok((0..value.len())
        .map(|i| (value[i] - (min_cost + coupling[i] - ergodic_cost)).abs())
        .fold(0.0, f64::max))
}
