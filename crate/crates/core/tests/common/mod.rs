#![allow(dead_code)]

use std::path::PathBuf;

use mfgmix::ingest::{filter_by_labels, labeled_dataset, load_idx_images, load_idx_labels};
use mfgmix::kernel::CostSpec;
use mfgmix::{Dataset, SimplexVector};
use rand::distr::Open01;
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// The bundled 5000-image MNIST subset (500 per digit), quantized to `s` states.
pub fn mnist(s: usize) -> Dataset {
    let dir = data_dir();
    let raw = load_idx_images(dir.join("mnist5k-images-idx3-ubyte.gz")).unwrap();
    let labels = load_idx_labels(dir.join("mnist5k-labels-idx1-ubyte.gz")).unwrap();
    labeled_dataset(&raw, labels, s).unwrap()
}

pub fn mnist_digits(s: usize, digits: &[u32]) -> Dataset {
    filter_by_labels(&mnist(s), digits).unwrap().strict().unwrap()
}

/// First `per_class` samples of every class, original order kept.
pub fn take_per_class(data: &Dataset, per_class: usize) -> Dataset {
    let labels = data.labels().unwrap();
    let classes = labels.iter().max().map_or(0, |m| *m as usize + 1);
    let mut taken = vec![0; classes];
    let mut samples = Vec::new();
    let mut kept = Vec::new();
    for (n, &l) in labels.iter().enumerate() {
        if taken[l as usize] < per_class {
            taken[l as usize] += 1;
            samples.extend_from_slice(data.sample(n));
            kept.push(l);
        }
    }
    Dataset::new(data.num_dims(), data.num_states(), samples, Some(kept)).unwrap()
}

pub fn random_interior(rng: &mut impl Rng, s: usize) -> SimplexVector {
    let w: Vec<f64> = (0..s).map(|_| rng.sample(Open01)).collect();
    SimplexVector::from_weights(w).unwrap()
}

/// Exact minimizer of `Σ_j q_j (c(q_j) + ε log q_j + V_j)` over the simplex grid
/// with spacing `1/steps`. The objective is separable, so the exhaustive search
/// is done as a budget recursion over coordinates instead of enumerating points.
pub fn grid_row_minimizer(values: &[f64], spec: &CostSpec, steps: usize) -> Vec<f64> {
    let s = values.len();
    let term = |j: usize, units: usize| -> f64 {
        let q = units as f64 / steps as f64;
        if q == 0.0 {
            0.0
        } else {
            q * (spec.entry_cost(q) + values[j])
        }
    };
    // best[b]: minimal cost of the first j coordinates using b units
    let mut best: Vec<f64> = (0..=steps).map(|b| term(0, b)).collect();
    let mut choice = vec![vec![0usize; steps + 1]; s];
    for (b, c) in choice[0].iter_mut().enumerate() {
        *c = b;
    }
    for j in 1..s {
        let mut next = vec![f64::INFINITY; steps + 1];
        for b in 0..=steps {
            for u in 0..=b {
                let v = best[b - u] + term(j, u);
                if v < next[b] {
                    next[b] = v;
                    choice[j][b] = u;
                }
            }
        }
        best = next;
    }
    let mut row = vec![0.0; s];
    let mut b = steps;
    for j in (0..s).rev() {
        let u = choice[j][b];
        row[j] = u as f64 / steps as f64;
        b -= u;
    }
    row
}
