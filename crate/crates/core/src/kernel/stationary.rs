//! Invariant distribution `π = Pᵀ π` of a transition matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::KernelError;
use crate::simplex::{SimplexVector, StochasticMatrix};

/// Relative pivot size below which the normalized system is declared rank deficient.
const RANK_TOLERANCE: f64 = 1e-13;

/// Solves `(Pᵀ - I) π = 0` with the last equation replaced by `Σ π = 1`.
pub fn stationary_distribution(transition: &StochasticMatrix) -> Result<SimplexVector, KernelError> {
    let s = transition.size();
    let mut a = DMatrix::<f64>::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            a[(i, j)] = transition.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..s {
        a[(s - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(s);
    b[s - 1] = 1.0;

    let mut pi = solve_dense(&a, &b).ok_or(KernelError::NonUniqueStationary)?;

    if let Some(min) = pi.iter().copied().reduce(f64::min) {
        if min < -1e-9 {
            return Err(KernelError::NonUniqueStationary);
        }
    }
    pi.iter_mut().for_each(|p| *p = p.max(0.0));
    let total: f64 = pi.iter().sum();
    Ok(SimplexVector::from_vec_unchecked(
        pi.iter().map(|p| p / total).collect(),
    ))
}

/// `max_i |π(i) - Σ_j P_ji π(j)|`.
pub fn stationary_residual(transition: &StochasticMatrix, pi: &SimplexVector) -> f64 {
    let s = transition.size();
    (0..s)
        .map(|i| {
            let inflow: f64 = (0..s).map(|j| transition.get(j, i) * pi[j]).sum();
            (pi[i] - inflow).abs()
        })
        .fold(0.0, f64::max)
}

/// Dense LU solve with one step of iterative refinement; `None` when rank deficient.
pub(crate) fn solve_dense(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    let smallest = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(largest > 0.0) || smallest <= RANK_TOLERANCE * largest {
        return None;
    }
    let mut x = lu.solve(b)?;
    let residual = b - a * &x;
    if let Some(correction) = lu.solve(&residual) {
        x += correction;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_iteration(p: &StochasticMatrix, steps: usize) -> Vec<f64> {
        let s = p.size();
        let mut v = vec![1.0 / s as f64; s];
        for _ in 0..steps {
            v = (0..s).map(|i| (0..s).map(|j| p.get(j, i) * v[j]).sum()).collect();
        }
        v
    }

    #[test]
    fn rank_one_matrix_returns_its_row() {
        let r = SimplexVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let pi = stationary_distribution(&StochasticMatrix::repeat_row(&r)).unwrap();
        for i in 0..3 {
            assert!((pi[i] - r[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn two_state_balance() {
        let p = StochasticMatrix::from_row_major(2, vec![0.9, 0.1, 0.2, 0.8], 1e-12).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        // π(0) = (1 - q) / (2 - p - q) with p = 0.9, q = 0.8
        let expected = (1.0 - 0.8) / (2.0 - 0.9 - 0.8);
        assert!((pi[0] - expected).abs() < 1e-14);
        assert!((expected - 2.0 / 3.0).abs() < 1e-14);
        let power = power_iteration(&p, 400);
        assert!((power[0] - pi[0]).abs() < 1e-12);
        assert!(stationary_residual(&p, &pi) <= 1e-12);
    }

    #[test]
    fn identity_is_not_unique() {
        assert!(matches!(
            stationary_distribution(&StochasticMatrix::identity(3)),
            Err(KernelError::NonUniqueStationary)
        ));
    }

    #[test]
    fn reducible_two_class_chain_is_not_unique() {
        let p = StochasticMatrix::from_row_major(
            4,
            vec![
                0.5, 0.5, 0.0, 0.0, //
                0.5, 0.5, 0.0, 0.0, //
                0.0, 0.0, 0.3, 0.7, //
                0.0, 0.0, 0.6, 0.4,
            ],
            1e-12,
        )
        .unwrap();
        assert!(stationary_distribution(&p).is_err());
    }
}
