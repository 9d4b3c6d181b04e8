//! IDX reading, grey-level quantization, label filtering and synthetic sampling.

mod idx;

pub use idx::{
    encode_idx_images, encode_idx_labels, load_idx_images, load_idx_labels, parse_idx_images,
    parse_idx_labels, write_idx_images, write_idx_labels, RawImageSet, IMAGES_MAGIC, LABELS_MAGIC,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::IngestError;
use crate::model::{Dataset, MixtureModel};

/// Grey level → state. `S = 2` thresholds at 128 (1 is white); otherwise
/// uniform bins `floor(pixel·S/256)`.
pub fn quantize_pixel(pixel: u8, num_states: usize) -> u16 {
    if num_states == 2 {
        (pixel >= 128) as u16
    } else {
        (pixel as usize * num_states / 256) as u16
    }
}

/// Smallest grey level that quantizes back to `state`; white for the top binary state.
pub fn state_to_pixel(state: u16, num_states: usize) -> u8 {
    if num_states == 2 {
        if state == 0 {
            0
        } else {
            255
        }
    } else {
        (state as usize * 256).div_ceil(num_states).min(255) as u8
    }
}

pub fn quantize(raw: &RawImageSet, num_states: usize) -> Result<Dataset, IngestError> {
    if !(2..=256).contains(&num_states) {
        return Err(IngestError::Invalid(format!(
            "need 2 <= S <= 256, got {num_states}"
        )));
    }
    let samples = raw
        .pixels
        .iter()
        .map(|&p| quantize_pixel(p, num_states))
        .collect();
    let data = Dataset::new(raw.pixels_per_image(), num_states, samples, None)
        .map_err(|e| IngestError::Invalid(e.to_string()))?;
    if data.num_samples() != raw.count && raw.pixels_per_image() > 0 {
        return Err(IngestError::Invalid("pixel count disagrees with header".into()));
    }
    Ok(data)
}

/// Quantized images with their labels attached.
pub fn labeled_dataset(
    raw: &RawImageSet,
    labels: Vec<u32>,
    num_states: usize,
) -> Result<Dataset, IngestError> {
    if labels.len() != raw.count {
        return Err(IngestError::Invalid(format!(
            "{} labels for {} images",
            labels.len(),
            raw.count
        )));
    }
    quantize(raw, num_states)?
        .with_labels(Some(labels))
        .map_err(|e| IngestError::Invalid(e.to_string()))
}

/// Result of [`filter_by_labels`]; `missing` lists requested labels that never occur.
#[derive(Debug, Clone)]
pub struct Filtered {
    pub data: Dataset,
    pub missing: Vec<u32>,
}

impl Filtered {
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Turns missing labels into [`IngestError::UnknownLabel`].
    pub fn strict(self) -> Result<Dataset, IngestError> {
        if self.missing.is_empty() {
            Ok(self.data)
        } else {
            Err(IngestError::UnknownLabel(self.missing))
        }
    }
}

/// Keeps samples whose label is in `keep`, in order, relabelled by position in `keep`.
pub fn filter_by_labels(data: &Dataset, keep: &[u32]) -> Result<Filtered, IngestError> {
    let labels = data.labels().ok_or(IngestError::MissingLabels)?;
    let mut seen = vec![false; keep.len()];
    let mut samples = Vec::new();
    let mut new_labels = Vec::new();
    for (n, &label) in labels.iter().enumerate() {
        if let Some(pos) = keep.iter().position(|&k| k == label) {
            seen[pos] = true;
            samples.extend_from_slice(data.sample(n));
            new_labels.push(pos as u32);
        }
    }
    let missing = keep
        .iter()
        .zip(&seen)
        .filter(|(_, s)| !**s)
        .map(|(k, _)| *k)
        .collect();
    let data = Dataset::new(data.num_dims(), data.num_states(), samples, Some(new_labels))
        .map_err(|e| IngestError::Invalid(e.to_string()))?;
    Ok(Filtered { data, missing })
}

/// First index whose cumulative mass exceeds `u`; never lands on a zero-mass entry.
fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Draws `n` labelled samples: `k ~ α`, then each coordinate `~ π_k^d`.
pub fn synth_generate(model: &MixtureModel, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = model.num_dims();
    let mut samples = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let k = inverse_cdf(model.weights().as_slice(), rng.random::<f64>());
        labels.push(k as u32);
        for dim in 0..d {
            let state = inverse_cdf(model.component(k, dim).as_slice(), rng.random::<f64>());
            samples.push(state as u16);
        }
    }
    Dataset::new(d, model.num_states(), samples, Some(labels)).expect("states drawn in range")
}

/// Renders a dataset back to grey-level images.
pub fn dataset_to_images(data: &Dataset, rows: usize, cols: usize) -> Result<RawImageSet, IngestError> {
    if rows * cols != data.num_dims() {
        return Err(IngestError::Invalid(format!(
            "{rows}x{cols} images cannot hold D={}",
            data.num_dims()
        )));
    }
    let pixels = data
        .raw()
        .iter()
        .map(|&s| state_to_pixel(s, data.num_states()))
        .collect();
    RawImageSet::new(data.num_samples(), rows, cols, pixels)
}
