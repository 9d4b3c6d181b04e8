//! Clustering scores (the `H` matrix and its alignment) and figure-data exports.

mod assign;
mod export;

pub use assign::{align_clusters, hungarian_max};
pub use export::{
    export_histogram_csv, export_parameter_images, histogram_csv, parameter_pixels, parse_pgm,
    pgm_bytes,
};

use crate::error::ReportError;
use crate::mixture::Responsibilities;
use crate::model::Dataset;

/// `H_kj = (1/|d_k|) Σ_{x ∈ d_k} γ_j(x)`: rows are classes, columns clusters.
pub fn confusion_matrix(
    resp: &Responsibilities,
    data: &Dataset,
) -> Result<Vec<Vec<f64>>, ReportError> {
    let labels = data.labels().ok_or(ReportError::MissingLabels)?;
    if labels.len() != resp.num_samples() {
        return Err(ReportError::DimensionMismatch(format!(
            "{} labels for {} responsibility rows",
            labels.len(),
            resp.num_samples()
        )));
    }
    let k = resp.num_components();
    let mut h = vec![vec![0.0; k]; k];
    let mut sizes = vec![0usize; k];
    for (n, &label) in labels.iter().enumerate() {
        let class = label as usize;
        if class >= k {
            return Err(ReportError::DimensionMismatch(format!(
                "label {label} with only {k} clusters"
            )));
        }
        sizes[class] += 1;
        for (acc, g) in h[class].iter_mut().zip(resp.row(n)) {
            *acc += g;
        }
    }
    for (class, row) in h.iter_mut().enumerate() {
        if sizes[class] == 0 {
            return Err(ReportError::EmptyClass(class));
        }
        row.iter_mut().for_each(|v| *v /= sizes[class] as f64);
    }
    Ok(h)
}

/// Reorders columns so cluster `j` lands in column `permutation[j]`.
pub fn aligned_matrix(h: &[Vec<f64>], permutation: &[usize]) -> Vec<Vec<f64>> {
    h.iter()
        .map(|row| {
            let mut out = vec![0.0; row.len()];
            for (j, &v) in row.iter().enumerate() {
                out[permutation[j]] = v;
            }
            out
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    /// Raw `H` (class × cluster).
    pub h: Vec<Vec<f64>>,
    /// Cluster index → class index.
    pub permutation: Vec<usize>,
    /// `H` with columns permuted into class order.
    pub aligned: Vec<Vec<f64>>,
    pub diagonal_mean: f64,
    pub class_sizes: Vec<usize>,
}

impl ClusterReport {
    pub fn new(resp: &Responsibilities, data: &Dataset) -> Result<Self, ReportError> {
        let h = confusion_matrix(resp, data)?;
        let permutation = align_clusters(&h);
        let aligned = aligned_matrix(&h, &permutation);
        let k = h.len();
        let diagonal_mean = (0..k).map(|i| aligned[i][i]).sum::<f64>() / k as f64;
        let mut class_sizes = vec![0; k];
        for &l in data.labels().ok_or(ReportError::MissingLabels)? {
            class_sizes[l as usize] += 1;
        }
        Ok(Self {
            h,
            permutation,
            aligned,
            diagonal_mean,
            class_sizes,
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.aligned.len()).map(|i| self.aligned[i][i]).collect()
    }
}
