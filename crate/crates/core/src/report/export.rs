//! PGM parameter images and the histogram CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::ReportError;
use crate::model::MixtureModel;
use crate::report::ClusterReport;

/// Per-pixel expected normalized grey level `round(255 · Σ_i i/(S-1) π_k^d(i))`.
/// For `S = 2` this is `round(255 μ_k^d)`.
pub fn parameter_pixels(model: &MixtureModel, k: usize) -> Vec<u8> {
    let top = (model.num_states() - 1).max(1) as f64;
    (0..model.num_dims())
        .map(|d| {
            let mean: f64 = model
                .component(k, d)
                .iter()
                .enumerate()
                .map(|(i, p)| i as f64 / top * p)
                .sum();
            (255.0 * mean).round().clamp(0.0, 255.0) as u8
        })
        .collect()
}

pub fn pgm_bytes(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Parses a binary PGM with maxval ≤ 255 into `(width, height, pixels)`.
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), ReportError> {
    let bad = |m: &str| ReportError::BadPgm(m.to_string());
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("header ends early"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header not ASCII"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("not a P5 file"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
    let (w, h, max) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if max == 0 || max > 255 {
        return Err(bad("maxval must be 1..=255"));
    }
    pos += 1; // single whitespace after maxval
    let data = bytes.get(pos..pos + w * h).ok_or_else(|| bad("pixel data truncated"))?;
    Ok((w, h, data.to_vec()))
}

/// Writes `component_<k>.pgm` for every component into `dir`.
pub fn export_parameter_images(
    model: &MixtureModel,
    side: usize,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, ReportError> {
    if side.checked_mul(side) != Some(model.num_dims()) {
        return Err(ReportError::NotSquare {
            dims: model.num_dims(),
            side,
        });
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    (0..model.num_components())
        .map(|k| {
            let path = dir.join(format!("component_{k}.pgm"));
            fs::write(&path, pgm_bytes(side, side, &parameter_pixels(model, k)))?;
            Ok(path)
        })
        .collect()
}

/// CSV text: header `class,cluster_0,…`, then one row of aligned `H` per class.
pub fn histogram_csv(report: &ClusterReport, class_names: &[String]) -> Result<String, ReportError> {
    let k = report.aligned.len();
    if class_names.len() != k {
        return Err(ReportError::DimensionMismatch(format!(
            "{} class names for {k} classes",
            class_names.len()
        )));
    }
    let mut out = String::from("class");
    for j in 0..k {
        write!(out, ",cluster_{j}").unwrap();
    }
    out.push('\n');
    for (name, row) in class_names.iter().zip(&report.aligned) {
        out.push_str(name);
        for v in row {
            // shortest representation that round-trips; never more than 17 significant digits
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn export_histogram_csv(
    report: &ClusterReport,
    class_names: &[String],
    path: impl AsRef<Path>,
) -> Result<(), ReportError> {
    fs::write(path, histogram_csv(report, class_names)?)?;
    Ok(())
}
