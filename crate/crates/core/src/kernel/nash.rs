//! Row-wise minimization of the average cost `e_i(P, V)` (the Nash minimizer).
//!
//! For `ε > 0` each row solves the KKT system
//! `c(x_j) + x_j c'(x_j) + ε (log x_j + 1) + V(j) = ν`, `Σ_j x_j = 1`:
//! every entry is a monotone scalar root in `x_j` for fixed `ν`, and the row
//! sum is monotone in `ν`. Both roots are bracketed and refined by Newton
//! steps that fall back to bisection whenever a step leaves the bracket.
//!
//! For `ε = 0` and the default linear cost the row problem is the Euclidean
//! projection of `-V` onto the simplex.

use crate::error::KernelError;
use crate::kernel::cost::CostSpec;
use crate::simplex::{SimplexVector, StochasticMatrix, ValueVector};

/// Lower end of the entry bracket.
pub const ENTRY_FLOOR: f64 = 1e-300;

const MAX_ROOT_STEPS: usize = 200;
const MAX_WIDENINGS: usize = 64;

/// Minimizer of one row together with its KKT multiplier.
#[derive(Debug, Clone)]
pub struct RowMinimum {
    pub row: Vec<f64>,
    pub multiplier: f64,
    /// `|Σ_j x_j - 1|` before the final renormalization.
    pub residual: f64,
}

/// `e_i(P, V) = Σ_j (c(P_ij) + ε log P_ij + F(i, θ) + V(j)) P_ij` for every state `i`.
pub fn average_cost(
    transition: &StochasticMatrix,
    values: &ValueVector,
    theta: &SimplexVector,
    spec: &CostSpec,
) -> Result<Vec<f64>, KernelError> {
    let s = check_sizes(transition, values, theta)?;
    let coupling = spec.coupling_vector(theta);
    (0..s)
        .map(|i| {
            let row = transition.row(i);
            if spec.epsilon > 0.0 {
                if let Some(j) = row.iter().position(|&p| p <= 0.0) {
                    return Err(KernelError::ZeroProbabilityWithEntropy { row: i, col: j });
                }
            }
            Ok(row_objective(row, values.as_slice(), spec) + coupling[i])
        })
        .collect()
}

/// `g_ij(P) = ∂ e_i(P, V) / ∂ P_ij`, row-major.
pub fn cost_gradient(
    transition: &StochasticMatrix,
    values: &ValueVector,
    theta: &SimplexVector,
    spec: &CostSpec,
) -> Result<Vec<f64>, KernelError> {
    let s = check_sizes(transition, values, theta)?;
    let coupling = spec.coupling_vector(theta);
    let mut out = Vec::with_capacity(s * s);
    for i in 0..s {
        for (j, &p) in transition.row(i).iter().enumerate() {
            if spec.epsilon > 0.0 && p <= 0.0 {
                return Err(KernelError::ZeroProbabilityWithEntropy { row: i, col: j });
            }
            out.push(spec.entry_marginal(p) + values[j] + coupling[i]);
        }
    }
    Ok(out)
}

/// `Σ_j x_j (c(x_j) + ε log x_j + V(j))` with `0 log 0 = 0`.
pub fn row_objective(row: &[f64], values: &[f64], spec: &CostSpec) -> f64 {
    row.iter()
        .zip(values)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &v)| p * (spec.entry_cost(p) + v))
        .sum()
}

/// Nash minimizer of `e(·, V)`.
///
/// The row objective does not involve `i` (the coupling is constant along a
/// row), so all rows share one minimizer.
pub fn row_nash_minimize(
    values: &ValueVector,
    spec: &CostSpec,
    tolerance: f64,
) -> Result<StochasticMatrix, KernelError> {
    row_nash_minimize_from(values, spec, tolerance, None)
}

/// As [`row_nash_minimize`], starting the multiplier search at `multiplier_guess`.
pub fn row_nash_minimize_from(
    values: &ValueVector,
    spec: &CostSpec,
    tolerance: f64,
    multiplier_guess: Option<f64>,
) -> Result<StochasticMatrix, KernelError> {
    let best = minimize_row(values.as_slice(), spec, tolerance, multiplier_guess)?;
    Ok(StochasticMatrix::repeat_row(&SimplexVector::from_vec_unchecked(
        best.row,
    )))
}

/// Minimizes `Σ_j x_j (c(x_j) + ε log x_j + V(j))` over the simplex.
pub fn minimize_row(
    values: &[f64],
    spec: &CostSpec,
    tolerance: f64,
    multiplier_guess: Option<f64>,
) -> Result<RowMinimum, KernelError> {
    if values.is_empty() {
        return Err(KernelError::Dimension("empty value vector".into()));
    }
    if spec.epsilon > 0.0 {
        entropic_row(values, spec, tolerance, multiplier_guess)
    } else if spec.transition.is_default() {
        Ok(project_row(values))
    } else {
        Err(KernelError::UnsupportedCost)
    }
}

/// Euclidean projection of `-V` onto the simplex.
fn project_row(values: &[f64]) -> RowMinimum {
    let target: Vec<f64> = values.iter().map(|v| -v).collect();
    let mut sorted = target.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (r, &y) in sorted.iter().enumerate() {
        cumulative += y;
        let candidate = (cumulative - 1.0) / (r + 1) as f64;
        if y - candidate > 0.0 {
            shift = candidate;
        }
    }
    let mut row: Vec<f64> = target.iter().map(|y| (y - shift).max(0.0)).collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= sum);
    RowMinimum {
        row,
        multiplier: -shift - 0.5,
        residual: (sum - 1.0).abs(),
    }
}

fn entropic_row(
    values: &[f64],
    spec: &CostSpec,
    tolerance: f64,
    multiplier_guess: Option<f64>,
) -> Result<RowMinimum, KernelError> {
    let s = values.len();
    let min_v = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_v = values.iter().sum::<f64>() / s as f64;

    let excess = |nu: f64| -> f64 {
        values
            .iter()
            .map(|&v| solve_entry(spec, nu - v))
            .sum::<f64>()
            - 1.0
    };

    // At ν = h(1/S) + min V every entry is ≤ 1/S; at ν = h(1) + min V one entry is 1.
    let mut lo = spec.entry_marginal(1.0 / s as f64) + min_v;
    let mut hi = spec.entry_marginal(1.0) + min_v;
    let mut width = (hi - lo).abs().max(1.0);
    let mut widenings = 0;
    while excess(lo) > 0.0 {
        lo -= width;
        width *= 2.0;
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(KernelError::NonconvergentRootFind { residual: f64::NAN });
        }
    }
    while excess(hi) < 0.0 {
        hi += width;
        width *= 2.0;
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(KernelError::NonconvergentRootFind { residual: f64::NAN });
        }
    }

    let mut nu = multiplier_guess
        .unwrap_or(spec.entry_marginal(1.0 / s as f64) + mean_v)
        .clamp(lo, hi);
    let mut row = vec![0.0; s];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ROOT_STEPS {
        let mut slope = Some(0.0);
        let mut sum = 0.0;
        for (x, &v) in row.iter_mut().zip(values) {
            *x = solve_entry(spec, nu - v);
            sum += *x;
            slope = match (slope, entry_slope(spec, *x)) {
                (Some(acc), Some(d)) => Some(acc + d),
                _ => None,
            };
        }
        let r = sum - 1.0;
        residual = r.abs();
        if residual <= 2.0 * f64::EPSILON * s as f64 {
            break;
        }
        if r > 0.0 {
            hi = nu;
        } else {
            lo = nu;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        nu = match slope {
            Some(d) if d > 0.0 => {
                let step = nu - r / d;
                if step > lo && step < hi {
                    step
                } else {
                    mid
                }
            }
            _ => mid,
        };
    }
    if residual > tolerance {
        return Err(KernelError::NonconvergentRootFind { residual });
    }
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= sum);
    // Near a saturated entry the excess is flat in ν; read ν back off the largest entry.
    let (top, _) = row
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (j, &x)| if x > b.1 { (j, x) } else { b });
    let nu = spec.entry_marginal(row[top]) + values[top];
    let mut rest = 0.0;
    for (j, (x, &v)) in row.iter_mut().zip(values).enumerate() {
        if j != top {
            *x = solve_entry(spec, nu - v);
            rest += *x;
        }
    }
    row[top] = 1.0 - rest;
    Ok(RowMinimum {
        row,
        multiplier: nu,
        residual,
    })
}

/// `dx/dt` for the entry root `h(x) = t`, zero on the clamped ends.
fn entry_slope(spec: &CostSpec, x: f64) -> Option<f64> {
    if x <= ENTRY_FLOOR || x >= 1.0 {
        return Some(0.0);
    }
    spec.transition
        .marginal_slope(x)
        .map(|c2| x / (x * c2 + spec.epsilon))
}

/// Solves `c(x) + x c'(x) + ε (log x + 1) = target` for `x ∈ [ENTRY_FLOOR, 1]`.
///
/// Works in `u = log x` so tiny entries keep full relative precision.
pub(crate) fn solve_entry(spec: &CostSpec, target: f64) -> f64 {
    let eps = spec.epsilon;
    debug_assert!(eps > 0.0);
    if target <= spec.entry_marginal(ENTRY_FLOOR) {
        return ENTRY_FLOOR;
    }
    if target >= spec.entry_marginal(1.0) {
        return 1.0;
    }
    let mut lo = ENTRY_FLOOR.ln();
    let mut hi = 0.0f64;
    let mut u = ((target - spec.transition.marginal(0.0)) / eps - 1.0).clamp(lo, hi);
    if u <= lo || u >= hi {
        u = 0.5 * (lo + hi);
    }
    for _ in 0..MAX_ROOT_STEPS {
        let x = u.exp();
        let f = spec.entry_marginal(x) - target;
        if f == 0.0 {
            return x;
        }
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let next = match spec.transition.marginal_slope(x) {
            Some(c2) => {
                let step = u - f / (x * c2 + eps);
                if step > lo && step < hi {
                    step
                } else {
                    mid
                }
            }
            None => mid,
        };
        if (next - u).abs() <= 4.0 * f64::EPSILON * u.abs().max(1.0) {
            u = next;
            break;
        }
        u = next;
    }
    u.exp()
}

fn check_sizes(
    transition: &StochasticMatrix,
    values: &ValueVector,
    theta: &SimplexVector,
) -> Result<usize, KernelError> {
    let s = transition.size();
    if values.len() != s || theta.len() != s {
        return Err(KernelError::Dimension(format!(
            "transition is {s}x{s}, value has {} entries, theta has {}",
            values.len(),
            theta.len()
        )));
    }
    Ok(s)
}
