//! Probability vectors, row-stochastic matrices and zero-mean value vectors.

use std::ops::Index;

use crate::error::CoreError;

/// Default tolerance on the total mass of an incoming probability vector.
pub const DEFAULT_SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A probability vector over `S` states.
///
/// Entries are non-negative and sum to one. Construction through
/// [`validate_simplex`] renormalizes the accepted vector, so the stored sum is
/// one up to a couple of ulps.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Validates with [`DEFAULT_SIMPLEX_TOLERANCE`].
    pub fn new(entries: Vec<f64>) -> Result<Self, CoreError> {
        validate_simplex(entries, DEFAULT_SIMPLEX_TOLERANCE)
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "simplex vector needs at least one state");
        Self(vec![1.0 / len as f64; len])
    }

    /// Vertex `T_i` of the simplex.
    pub fn vertex(len: usize, state: usize) -> Self {
        assert!(state < len);
        let mut v = vec![0.0; len];
        v[state] = 1.0;
        Self(v)
    }

    /// Normalizes a vector of non-negative weights.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self, CoreError> {
        if weights.is_empty() {
            return Err(CoreError::Empty);
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(CoreError::NegativeEntry { index, value });
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(CoreError::MassMismatch { sum: total });
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self(weights))
    }

    /// Caller guarantees the invariants (used by solvers that produce exact simplex points).
    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(entries.iter().all(|&p| p >= 0.0));
        debug_assert!((entries.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Squared Euclidean distance to another point of the same simplex.
    pub fn squared_distance(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl AsRef<[f64]> for SimplexVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Checks a raw vector against the simplex constraints and returns a renormalized copy.
pub fn validate_simplex(mut entries: Vec<f64>, tolerance: f64) -> Result<SimplexVector, CoreError> {
    if entries.is_empty() {
        return Err(CoreError::Empty);
    }
    if let Some((index, &value)) = entries.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(CoreError::NonFinite { index, value });
    }
    if let Some((index, &value)) = entries.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(CoreError::NegativeEntry { index, value });
    }
    let sum: f64 = entries.iter().sum();
    if (sum - 1.0).abs() > tolerance {
        return Err(CoreError::MassMismatch { sum });
    }
    entries.iter_mut().for_each(|p| *p /= sum);
    Ok(SimplexVector(entries))
}

/// Like [`validate_simplex`] but keeps the entries bit-for-bit.
pub(crate) fn check_simplex(entries: Vec<f64>, tolerance: f64) -> Result<SimplexVector, CoreError> {
    validate_simplex(entries.clone(), tolerance)?;
    Ok(SimplexVector(entries))
}

/// Square row-stochastic matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    size: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn from_rows(rows: Vec<SimplexVector>) -> Result<Self, CoreError> {
        let size = rows.len();
        if size == 0 {
            return Err(CoreError::Empty);
        }
        let mut data = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(CoreError::DimensionMismatch {
                    what: "stochastic matrix row",
                    expected: size,
                    found: row.len(),
                });
            }
            data.extend(row.into_vec());
        }
        Ok(Self { size, data })
    }

    /// Validates each row of a raw row-major matrix.
    pub fn from_row_major(size: usize, data: Vec<f64>, tolerance: f64) -> Result<Self, CoreError> {
        if data.len() != size * size || size == 0 {
            return Err(CoreError::DimensionMismatch {
                what: "stochastic matrix",
                expected: size * size,
                found: data.len(),
            });
        }
        let rows = data
            .chunks(size)
            .map(|r| validate_simplex(r.to_vec(), tolerance))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows)
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            size,
            data: vec![1.0 / size as f64; size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Self { size, data }
    }

    /// Every row equal to `row`.
    pub fn repeat_row(row: &SimplexVector) -> Self {
        let size = row.len();
        let mut data = Vec::with_capacity(size * size);
        for _ in 0..size {
            data.extend_from_slice(row.as_slice());
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.size)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.size, other.size);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Value function over `S` states normalized to zero total.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub const SUM_TOLERANCE: f64 = 1e-10;

    pub fn new(values: Vec<f64>) -> Result<Self, CoreError> {
        let sum: f64 = values.iter().sum();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite {
                index: values.iter().position(|v| !v.is_finite()).unwrap_or(0),
                value: f64::NAN,
            });
        }
        if sum.abs() > Self::SUM_TOLERANCE {
            return Err(CoreError::NonZeroSum { sum });
        }
        Ok(Self(values))
    }

    /// Subtracts the mean so the invariant holds.
    pub fn centered(mut values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter_mut().for_each(|v| *v -= mean);
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Index<usize> for ValueVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}
