//! Responsibilities, weight and θ updates, and likelihood functionals.
//!
//! Component masses are handled as `Σ_d log π_k^d(x^d)`; with `D = 784` the
//! plain product underflows long before the responsibilities do.

use crate::error::MixtureError;
use crate::model::{Dataset, MixtureModel};
use crate::par::map_indexed;
use crate::simplex::SimplexVector;

/// `N × K` table of posterior component probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    num_components: usize,
    table: Vec<f64>,
    /// `log π(x_n)` for every sample.
    pub log_evidence: Vec<f64>,
}

impl Responsibilities {
    /// Builds from explicit rows (each must be a probability vector).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MixtureError> {
        let num_components = rows.first().map_or(0, Vec::len);
        let mut table = Vec::with_capacity(rows.len() * num_components);
        for row in &rows {
            if row.len() != num_components {
                return Err(MixtureError::DimensionMismatch(
                    "ragged responsibility rows".into(),
                ));
            }
            let checked = SimplexVector::new(row.clone())?;
            table.extend_from_slice(checked.as_slice());
        }
        Ok(Self {
            num_components,
            table,
            log_evidence: vec![f64::NAN; rows.len()],
        })
    }

    pub fn num_samples(&self) -> usize {
        self.log_evidence.len()
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.table[n * self.num_components..(n + 1) * self.num_components]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.table.chunks(self.num_components.max(1))
    }

    /// `Σ_n γ_k(x_n)` for every `k`, summed in sample order.
    pub fn masses(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_components];
        for row in self.rows() {
            for (m, g) in out.iter_mut().zip(row) {
                *m += g;
            }
        }
        out
    }

    /// Index of the most responsible component for each sample.
    pub fn hard_assignments(&self) -> Vec<usize> {
        self.rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &g)| {
                        if g > best.1 {
                            (k, g)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect()
    }
}

/// `θ_k^d`: responsibility-weighted state frequencies, stored k-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaField {
    pub num_components: usize,
    pub num_dims: usize,
    pub num_states: usize,
    pub cells: Vec<SimplexVector>,
}

impl ThetaField {
    pub fn cell(&self, k: usize, d: usize) -> &SimplexVector {
        &self.cells[k * self.num_dims + d]
    }

    /// Euclidean norm of the difference, reading both fields as flat `K·D·S` vectors.
    pub fn distance(&self, other: &ThetaField) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| a.squared_distance(b.as_slice()))
            .sum::<f64>()
            .sqrt()
    }
}

fn check_compat(model: &MixtureModel, data: &Dataset) -> Result<(), MixtureError> {
    if model.num_dims() != data.num_dims() || model.num_states() != data.num_states() {
        return Err(MixtureError::DimensionMismatch(format!(
            "model has D={} S={}, data has D={} S={}",
            model.num_dims(),
            model.num_states(),
            data.num_dims(),
            data.num_states()
        )));
    }
    Ok(())
}

/// `ln α_k + ln π_k(x_n)` for all `k`.
fn joint_log_masses(
    model: &MixtureModel,
    log_table: &[f64],
    log_weights: &[f64],
    sample: &[u16],
) -> Vec<f64> {
    let d = model.num_dims();
    let s = model.num_states();
    (0..model.num_components())
        .map(|k| {
            let base = k * d * s;
            let mut acc = log_weights[k];
            for (dim, &x) in sample.iter().enumerate() {
                acc += log_table[base + dim * s + x as usize];
            }
            acc
        })
        .collect()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `γ_k(x_n) = α_k π_k(x_n) / Σ_j α_j π_j(x_n)`.
pub fn responsibilities(
    model: &MixtureModel,
    data: &Dataset,
) -> Result<Responsibilities, MixtureError> {
    check_compat(model, data)?;
    let k = model.num_components();
    let log_table = model.log_table();
    let log_weights: Vec<f64> = model.weights().iter().map(|a| a.ln()).collect();

    let rows = map_indexed(data.num_samples(), |n| {
        let joint = joint_log_masses(model, &log_table, &log_weights, data.sample(n));
        let lse = log_sum_exp(&joint);
        if lse == f64::NEG_INFINITY {
            return Err(MixtureError::AllComponentsVanish { sample: n });
        }
        let gamma: Vec<f64> = joint.iter().map(|j| (j - lse).exp()).collect();
        Ok((gamma, lse))
    });

    let mut table = Vec::with_capacity(data.num_samples() * k);
    let mut log_evidence = Vec::with_capacity(data.num_samples());
    for row in rows {
        let (gamma, lse) = row?;
        table.extend(gamma);
        log_evidence.push(lse);
    }
    Ok(Responsibilities {
        num_components: k,
        table,
        log_evidence,
    })
}

/// `α_k = (1/N) Σ_n γ_k(x_n)`.
pub fn update_weights(resp: &Responsibilities) -> SimplexVector {
    let n = resp.num_samples();
    if n == 0 {
        return SimplexVector::uniform(resp.num_components().max(1));
    }
    let masses = resp.masses();
    SimplexVector::from_weights(masses.iter().map(|m| m / n as f64).collect())
        .unwrap_or_else(|_| SimplexVector::uniform(resp.num_components()))
}

/// Responsibility mass per component and the un-normalized θ counts.
pub(crate) fn theta_counts(resp: &Responsibilities, data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let k = resp.num_components();
    let d = data.num_dims();
    let s = data.num_states();
    let mut counts = vec![0.0; k * d * s];
    for (n, sample) in data.samples().enumerate() {
        let gamma = resp.row(n);
        for (comp, &g) in gamma.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let base = comp * d * s;
            for (dim, &x) in sample.iter().enumerate() {
                counts[base + dim * s + x as usize] += g;
            }
        }
    }
    (resp.masses(), counts)
}

/// Normalizes the counts of component `k` into `D` simplex cells.
pub(crate) fn theta_cells(
    counts: &[f64],
    k: usize,
    d: usize,
    s: usize,
) -> Result<Vec<SimplexVector>, MixtureError> {
    (0..d)
        .map(|dim| {
            let start = (k * d + dim) * s;
            Ok(SimplexVector::from_weights(counts[start..start + s].to_vec())?)
        })
        .collect()
}

/// `θ_k^d(i) = Σ_n γ_k(x_n) [x_n^d = i] / Σ_n γ_k(x_n)`.
///
/// Fails with [`MixtureError::EmptyCluster`] when a component's mass is at most `floor`.
pub fn update_theta(
    resp: &Responsibilities,
    data: &Dataset,
    floor: f64,
) -> Result<ThetaField, MixtureError> {
    if resp.num_samples() != data.num_samples() {
        return Err(MixtureError::DimensionMismatch(
            "responsibilities and data have different sample counts".into(),
        ));
    }
    let (masses, counts) = theta_counts(resp, data);
    let (d, s) = (data.num_dims(), data.num_states());
    let mut cells = Vec::with_capacity(masses.len() * d);
    for (k, &mass) in masses.iter().enumerate() {
        if !(mass > floor) {
            return Err(MixtureError::EmptyCluster(k));
        }
        cells.extend(theta_cells(&counts, k, d, s)?);
    }
    Ok(ThetaField {
        num_components: masses.len(),
        num_dims: d,
        num_states: s,
        cells,
    })
}

/// `log π(x_n)` per sample; `-∞` when every component vanishes there.
pub fn log_evidence(model: &MixtureModel, data: &Dataset) -> Result<Vec<f64>, MixtureError> {
    check_compat(model, data)?;
    let log_table = model.log_table();
    let log_weights: Vec<f64> = model.weights().iter().map(|a| a.ln()).collect();
    Ok(map_indexed(data.num_samples(), |n| {
        log_sum_exp(&joint_log_masses(
            model,
            &log_table,
            &log_weights,
            data.sample(n),
        ))
    }))
}

/// `Σ_n log Σ_k α_k π_k(x_n)`; `-∞` is returned as a value.
pub fn log_likelihood(model: &MixtureModel, data: &Dataset) -> Result<f64, MixtureError> {
    Ok(log_evidence(model, data)?.iter().sum())
}

/// `Σ_n Σ_k γ_k(x_n) (log α_k + log π_k(x_n))` with γ computed from the model.
pub fn expected_log_likelihood(model: &MixtureModel, data: &Dataset) -> Result<f64, MixtureError> {
    let resp = responsibilities(model, data)?;
    let log_table = model.log_table();
    let log_weights: Vec<f64> = model.weights().iter().map(|a| a.ln()).collect();
    let mut total = 0.0;
    for (n, sample) in data.samples().enumerate() {
        let joint = joint_log_masses(model, &log_table, &log_weights, sample);
        for (g, j) in resp.row(n).iter().zip(&joint) {
            if *g > 0.0 {
                total += g * j;
            }
        }
    }
    Ok(total)
}

/// `f_ε(μ) = μ + (ε/2) log(μ / (1 - μ))`.
pub fn entropy_link(mu: f64, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        mu
    } else {
        mu + 0.5 * epsilon * (mu / (1.0 - mu)).ln()
    }
}

/// Expected log-likelihood with each Bernoulli parameter passed through `f_ε`.
///
/// Only defined for two-state models whose every `f_ε(μ_k^d)` lies in `(0, 1)`.
pub fn modified_log_likelihood(
    model: &MixtureModel,
    data: &Dataset,
    epsilon: f64,
) -> Result<f64, MixtureError> {
    if model.num_states() != 2 {
        return Err(MixtureError::NotBinary);
    }
    let (kk, dd) = (model.num_components(), model.num_dims());
    let mut log_link = vec![[0.0f64; 2]; kk * dd];
    for k in 0..kk {
        for d in 0..dd {
            let f = entropy_link(model.mu(k, d), epsilon);
            if !(f > 0.0 && f < 1.0) {
                return Err(MixtureError::OutOfDomain { value: model.mu(k, d) });
            }
            // f_ε(1 - μ) = 1 - f_ε(μ)
            log_link[k * dd + d] = [(1.0 - f).ln(), f.ln()];
        }
    }
    let resp = responsibilities(model, data)?;
    let log_weights: Vec<f64> = model.weights().iter().map(|a| a.ln()).collect();
    let mut total = 0.0;
    for (n, sample) in data.samples().enumerate() {
        for (k, &g) in resp.row(n).iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let inner: f64 = sample
                .iter()
                .enumerate()
                .map(|(d, &x)| log_link[k * dd + d][x as usize])
                .sum();
            total += g * (log_weights[k] + inner);
        }
    }
    Ok(total)
}
