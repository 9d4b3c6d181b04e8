//! Mixture models, categorical datasets and the `MFGMIX v1` model file.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::CoreError;
use crate::simplex::{check_simplex, SimplexVector, DEFAULT_SIMPLEX_TOLERANCE};

pub const MODEL_MAGIC: &str = "MFGMIX";
pub const MODEL_VERSION: &str = "v1";

/// Mixture of `K` product-form categorical distributions on `{0..S}^D`.
///
/// Components are stored k-major: entry `k * D + d` holds `π_k^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    num_components: usize,
    num_dims: usize,
    num_states: usize,
    weights: SimplexVector,
    components: Vec<SimplexVector>,
}

impl MixtureModel {
    pub fn new(
        weights: SimplexVector,
        num_dims: usize,
        num_states: usize,
        components: Vec<SimplexVector>,
    ) -> Result<Self, CoreError> {
        let k = weights.len();
        if components.len() != k * num_dims {
            return Err(CoreError::DimensionMismatch {
                what: "component table",
                expected: k * num_dims,
                found: components.len(),
            });
        }
        if num_states < 1 {
            return Err(CoreError::Empty);
        }
        if let Some(bad) = components.iter().find(|c| c.len() != num_states) {
            return Err(CoreError::DimensionMismatch {
                what: "component states",
                expected: num_states,
                found: bad.len(),
            });
        }
        Ok(Self {
            num_components: k,
            num_dims,
            num_states,
            weights,
            components,
        })
    }

    /// Two-state model from Bernoulli parameters `mu[k][d]` = probability of state 1.
    pub fn bernoulli(weights: SimplexVector, mu: &[Vec<f64>]) -> Result<Self, CoreError> {
        let num_dims = mu.first().map_or(0, Vec::len);
        let mut components = Vec::with_capacity(mu.len() * num_dims);
        for row in mu {
            if row.len() != num_dims {
                return Err(CoreError::DimensionMismatch {
                    what: "bernoulli parameters",
                    expected: num_dims,
                    found: row.len(),
                });
            }
            for &m in row {
                components.push(SimplexVector::new(vec![1.0 - m, m])?);
            }
        }
        Self::new(weights, num_dims, 2, components)
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    pub fn num_dims(&self) -> usize {
        self.num_dims
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn weights(&self) -> &SimplexVector {
        &self.weights
    }

    pub fn component(&self, k: usize, d: usize) -> &SimplexVector {
        &self.components[k * self.num_dims + d]
    }

    pub fn components(&self) -> &[SimplexVector] {
        &self.components
    }

    /// Probability of state 1 (two-state models).
    pub fn mu(&self, k: usize, d: usize) -> f64 {
        self.component(k, d)[1]
    }

    /// `ln π_k^d(i)` flattened as `[(k * D + d) * S + i]`.
    pub fn log_table(&self) -> Vec<f64> {
        self.components
            .iter()
            .flat_map(|c| c.iter().map(|p| p.ln()))
            .collect()
    }

    /// `ln π_k(x)` for one sample.
    pub fn log_component_mass(&self, k: usize, sample: &[u16]) -> f64 {
        sample
            .iter()
            .enumerate()
            .map(|(d, &x)| self.component(k, d)[x as usize].ln())
            .sum()
    }

    /// Reorders components so that new component `i` is old component `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.num_components);
        let weights = SimplexVector::from_vec_unchecked(
            order.iter().map(|&k| self.weights[k]).collect(),
        );
        let components = order
            .iter()
            .flat_map(|&k| (0..self.num_dims).map(move |d| (k, d)))
            .map(|(k, d)| self.component(k, d).clone())
            .collect();
        Self {
            weights,
            components,
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}");
        let _ = writeln!(
            out,
            "{} {} {}",
            self.num_components, self.num_dims, self.num_states
        );
        push_reals(&mut out, self.weights.as_slice());
        for c in &self.components {
            push_reals(&mut out, c.as_slice());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CoreError> {
        Self::read_from(text.as_bytes())
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<(), CoreError> {
        writer.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self, CoreError> {
        let mut lines = BufReader::new(reader).lines();
        let mut next_line = |what: &str| -> Result<String, CoreError> {
            match lines.next() {
                Some(line) => Ok(line?),
                None => Err(CoreError::CorruptFile(format!("missing {what}"))),
            }
        };

        let header = next_line("header")?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MODEL_MAGIC) {
            return Err(CoreError::CorruptFile(format!("bad magic line {header:?}")));
        }
        match parts.next() {
            Some(MODEL_VERSION) => {}
            other => {
                return Err(CoreError::FormatVersionMismatch(
                    other.unwrap_or("").to_string(),
                ))
            }
        }

        let dims = parse_usizes(&next_line("dimensions")?)?;
        let [k, d, s] = dims[..] else {
            return Err(CoreError::CorruptFile(
                "dimension line must hold K D S".into(),
            ));
        };
        if k == 0 || s == 0 {
            return Err(CoreError::CorruptFile("K and S must be positive".into()));
        }

        let weights = parse_reals(&next_line("weights")?)?;
        if weights.len() != k {
            return Err(CoreError::DimensionMismatch {
                what: "weights",
                expected: k,
                found: weights.len(),
            });
        }
        let weights = check_simplex(weights, DEFAULT_SIMPLEX_TOLERANCE)?;

        let mut components = Vec::with_capacity(k * d);
        for _ in 0..k * d {
            let row = parse_reals(&next_line("component row")?)?;
            if row.len() != s {
                return Err(CoreError::DimensionMismatch {
                    what: "component row",
                    expected: s,
                    found: row.len(),
                });
            }
            components.push(check_simplex(row, DEFAULT_SIMPLEX_TOLERANCE)?);
        }
        Self::new(weights, d, s, components)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CoreError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CoreError> {
        Self::read_from(fs::File::open(path)?)
    }
}

fn push_reals(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}", format_real(*v));
    }
    out.push('\n');
}

/// Decimal with 17 significant digits; parses back to the same double.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_reals(line: &str) -> Result<Vec<f64>, CoreError> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CoreError::CorruptFile(format!("not a number: {t:?}")))
        })
        .collect()
}

fn parse_usizes(line: &str) -> Result<Vec<usize>, CoreError> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| CoreError::CorruptFile(format!("not a count: {t:?}")))
        })
        .collect()
}

/// `N` samples of `D` categorical coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    num_samples: usize,
    num_dims: usize,
    num_states: usize,
    samples: Vec<u16>,
    labels: Option<Vec<u32>>,
}

impl Dataset {
    pub fn new(
        num_dims: usize,
        num_states: usize,
        samples: Vec<u16>,
        labels: Option<Vec<u32>>,
    ) -> Result<Self, CoreError> {
        let num_samples = if num_dims == 0 {
            labels.as_ref().map_or(0, Vec::len)
        } else {
            if samples.len() % num_dims != 0 {
                return Err(CoreError::DimensionMismatch {
                    what: "sample table",
                    expected: (samples.len() / num_dims + 1) * num_dims,
                    found: samples.len(),
                });
            }
            samples.len() / num_dims
        };
        if let Some(pos) = samples.iter().position(|&x| x as usize >= num_states) {
            return Err(CoreError::StateOutOfRange {
                sample: pos / num_dims.max(1),
                dim: pos % num_dims.max(1),
                state: samples[pos] as usize,
                states: num_states,
            });
        }
        if let Some(l) = &labels {
            if l.len() != num_samples {
                return Err(CoreError::DimensionMismatch {
                    what: "labels",
                    expected: num_samples,
                    found: l.len(),
                });
            }
        }
        Ok(Self {
            num_samples,
            num_dims,
            num_states,
            samples,
            labels,
        })
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn num_dims(&self) -> usize {
        self.num_dims
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn is_empty(&self) -> bool {
        self.num_samples == 0
    }

    pub fn sample(&self, n: usize) -> &[u16] {
        &self.samples[n * self.num_dims..(n + 1) * self.num_dims]
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[u16]> + '_ {
        (0..self.num_samples).map(move |n| self.sample(n))
    }

    pub fn raw(&self) -> &[u16] {
        &self.samples
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Option<Vec<u32>>) -> Result<Self, CoreError> {
        if let Some(l) = &labels {
            if l.len() != self.num_samples {
                return Err(CoreError::DimensionMismatch {
                    what: "labels",
                    expected: self.num_samples,
                    found: l.len(),
                });
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Concatenates the dataset with itself `times` times.
    pub fn repeated(&self, times: usize) -> Self {
        Self {
            num_samples: self.num_samples * times,
            samples: self.samples.repeat(times),
            labels: self.labels.as_ref().map(|l| l.repeat(times)),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> MixtureModel {
        MixtureModel::bernoulli(
            SimplexVector::new(vec![0.25, 0.75]).unwrap(),
            &[vec![0.1, 0.9, 0.5], vec![0.3, 0.2, 0.7]],
        )
        .unwrap()
    }

    #[test]
    fn text_layout() {
        let text = toy().to_text();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "MFGMIX v1");
        assert_eq!(lines[1], "2 3 2");
        assert_eq!(lines.len(), 3 + 6);
        assert_eq!(lines[3].split(' ').count(), 2);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = toy();
        assert_eq!(MixtureModel::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn short_weight_line_is_dimension_mismatch() {
        let text = "MFGMIX v1\n3 1 2\n0.5 0.5\n0.5 0.5\n0.5 0.5\n0.5 0.5\n";
        assert!(matches!(
            MixtureModel::from_text(text),
            Err(CoreError::DimensionMismatch { what: "weights", .. })
        ));
    }

    #[test]
    fn unknown_version_rejected() {
        let text = "MFGMIX v9\n1 1 2\n1\n0.5 0.5\n";
        assert!(matches!(
            MixtureModel::from_text(text),
            Err(CoreError::FormatVersionMismatch(v)) if v == "v9"
        ));
    }

    #[test]
    fn corrupt_inputs() {
        assert!(matches!(
            MixtureModel::from_text("GARBAGE\n"),
            Err(CoreError::CorruptFile(_))
        ));
        assert!(matches!(
            MixtureModel::from_text("MFGMIX v1\n1 1 2\n1\n0.5 abc\n"),
            Err(CoreError::CorruptFile(_))
        ));
        assert!(matches!(
            MixtureModel::from_text("MFGMIX v1\n1 2 2\n1\n0.5 0.5\n"),
            Err(CoreError::CorruptFile(_))
        ));
    }

    #[test]
    fn dataset_rejects_out_of_range_state() {
        assert!(matches!(
            Dataset::new(2, 2, vec![0, 1, 2, 0], None),
            Err(CoreError::StateOutOfRange { sample: 1, dim: 0, state: 2, .. })
        ));
        let ok = Dataset::new(2, 3, vec![0, 1, 2, 0], Some(vec![4, 5])).unwrap();
        assert_eq!(ok.num_samples(), 2);
        assert_eq!(ok.sample(1), &[2, 0]);
    }

    #[test]
    fn permutation_moves_components() {
        let m = toy();
        let p = m.permuted(&[1, 0]);
        assert_eq!(p.weights().as_slice(), &[0.75, 0.25]);
        assert_eq!(p.component(0, 2), m.component(1, 2));
    }

    fn arb_model() -> impl Strategy<Value = MixtureModel> {
        (1usize..4, 1usize..5, 2usize..5).prop_flat_map(|(k, d, s)| {
            (
                prop::collection::vec(1e-3f64..1.0, k),
                prop::collection::vec(prop::collection::vec(1e-3f64..1.0, s), k * d),
            )
                .prop_map(move |(w, comps)| {
                    MixtureModel::new(
                        SimplexVector::from_weights(w).unwrap(),
                        d,
                        s,
                        comps
                            .into_iter()
                            .map(|c| SimplexVector::from_weights(c).unwrap())
                            .collect(),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn persistence_round_trip_bitwise(m in arb_model()) {
            let back = MixtureModel::from_text(&m.to_text()).unwrap();
            let bits = |m: &MixtureModel| -> Vec<u64> {
                m.weights().iter().chain(m.components().iter().flat_map(|c| c.iter()))
                    .map(|v| v.to_bits()).collect()
            };
            prop_assert_eq!(bits(&back), bits(&m));
        }
    }
}
