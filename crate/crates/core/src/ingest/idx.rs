//! Big-endian IDX containers (unsigned-byte payloads only), optionally gzipped.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::IngestError;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// `N` grey-scale images of `rows × cols` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImageSet {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
    pub magic: u32,
}

impl RawImageSet {
    pub fn new(count: usize, rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self, IngestError> {
        let expected = count
            .checked_mul(rows)
            .and_then(|v| v.checked_mul(cols))
            .ok_or(IngestError::DimensionOverflow)?;
        if pixels.len() != expected {
            return Err(IngestError::Invalid(format!(
                "{} pixels for {count} images of {rows}x{cols}",
                pixels.len()
            )));
        }
        Ok(Self {
            count,
            rows,
            cols,
            pixels,
            magic: IMAGES_MAGIC,
        })
    }

    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, n: usize) -> &[u8] {
        let d = self.pixels_per_image();
        &self.pixels[n * d..(n + 1) * d]
    }
}

/// Inflates the buffer if it starts with the gzip magic bytes.
fn maybe_inflate(bytes: Vec<u8>) -> Result<Vec<u8>, IngestError> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        MultiGzDecoder::new(bytes.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

/// Returns the dimension sizes and the payload slice.
fn parse_idx(bytes: &[u8], magic: u32) -> Result<(Vec<usize>, &[u8]), IngestError> {
    if bytes.len() < 4 {
        return Err(IngestError::TruncatedFile {
            expected: 4,
            found: bytes.len(),
        });
    }
    let found = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    if found != magic {
        return Err(IngestError::BadMagic {
            expected: magic,
            found,
        });
    }
    let ndims = (magic & 0xff) as usize;
    let header = 4 + 4 * ndims;
    if bytes.len() < header {
        return Err(IngestError::TruncatedFile {
            expected: header,
            found: bytes.len(),
        });
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let payload = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(IngestError::DimensionOverflow)?;
    let total = header
        .checked_add(payload)
        .ok_or(IngestError::DimensionOverflow)?;
    if bytes.len() < total {
        return Err(IngestError::TruncatedFile {
            expected: total,
            found: bytes.len(),
        });
    }
    Ok((dims, &bytes[header..total]))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<RawImageSet, IngestError> {
    let bytes = maybe_inflate(bytes.to_vec())?;
    let (dims, payload) = parse_idx(&bytes, IMAGES_MAGIC)?;
    Ok(RawImageSet {
        count: dims[0],
        rows: dims[1],
        cols: dims[2],
        pixels: payload.to_vec(),
        magic: IMAGES_MAGIC,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u32>, IngestError> {
    let bytes = maybe_inflate(bytes.to_vec())?;
    let (_, payload) = parse_idx(&bytes, LABELS_MAGIC)?;
    Ok(payload.iter().map(|&b| b as u32).collect())
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<RawImageSet, IngestError> {
    parse_idx_images(&std::fs::read(path)?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u32>, IngestError> {
    parse_idx_labels(&std::fs::read(path)?)
}

fn encode_dim(out: &mut Vec<u8>, d: usize) -> Result<(), IngestError> {
    let d = u32::try_from(d).map_err(|_| IngestError::DimensionOverflow)?;
    out.extend_from_slice(&d.to_be_bytes());
    Ok(())
}

pub fn encode_idx_images(set: &RawImageSet) -> Result<Vec<u8>, IngestError> {
    let mut out = Vec::with_capacity(16 + set.pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [set.count, set.rows, set.cols] {
        encode_dim(&mut out, d)?;
    }
    out.extend_from_slice(&set.pixels);
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u32]) -> Result<Vec<u8>, IngestError> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    encode_dim(&mut out, labels.len())?;
    for &l in labels {
        out.push(u8::try_from(l).map_err(|_| {
            IngestError::Invalid(format!("label {l} does not fit in one byte"))
        })?);
    }
    Ok(out)
}

/// Writes raw bytes, gzipped when the path ends in `.gz`.
fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IngestError> {
    let file = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e == "gz") {
        let mut enc = GzEncoder::new(file, Compression::default());
        enc.write_all(bytes)?;
        enc.finish()?.flush()?;
    } else {
        let mut file = file;
        file.write_all(bytes)?;
        file.flush()?;
    }
    Ok(())
}

pub fn write_idx_images(set: &RawImageSet, path: impl AsRef<Path>) -> Result<(), IngestError> {
    write_bytes(path.as_ref(), &encode_idx_images(set)?)
}

pub fn write_idx_labels(labels: &[u32], path: impl AsRef<Path>) -> Result<(), IngestError> {
    write_bytes(path.as_ref(), &encode_idx_labels(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn minimal_image_file() {
        let mut bytes = header(IMAGES_MAGIC, &[1, 2, 2]);
        bytes.extend([0, 64, 128, 255]);
        let set = parse_idx_images(&bytes).unwrap();
        assert_eq!((set.count, set.rows, set.cols), (1, 2, 2));
        assert_eq!(set.pixels, vec![0, 64, 128, 255]);
    }

    #[test]
    fn wrong_type_code() {
        let bytes = header(0x0000_0802, &[1, 2, 2]);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(IngestError::BadMagic { found: 0x802, .. })
        ));
        assert!(matches!(
            parse_idx_labels(&header(IMAGES_MAGIC, &[1, 1, 1])),
            Err(IngestError::BadMagic { .. })
        ));
    }

    #[test]
    fn short_payload() {
        let mut bytes = header(IMAGES_MAGIC, &[2, 2, 2]);
        bytes.extend([0; 7]);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(IngestError::TruncatedFile {
                expected: 24,
                found: 23
            })
        ));
        assert!(matches!(
            parse_idx_images(&header(IMAGES_MAGIC, &[1])),
            Err(IngestError::TruncatedFile { .. })
        ));
    }

    #[test]
    fn overflowing_dimensions() {
        let bytes = header(IMAGES_MAGIC, &[u32::MAX, u32::MAX, u32::MAX]);
        if usize::BITS <= 64 {
            assert!(matches!(
                parse_idx_images(&bytes),
                Err(IngestError::DimensionOverflow)
            ));
        }
    }

    #[test]
    fn labels_and_gzip() {
        let mut bytes = header(LABELS_MAGIC, &[3]);
        bytes.extend([7, 0, 9]);
        let mut gz = GzEncoder::new(Vec::new(), Compression::fast());
        gz.write_all(&bytes).unwrap();
        let gz = gz.finish().unwrap();
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![7, 0, 9]);
        assert_eq!(parse_idx_labels(&gz).unwrap(), vec![7, 0, 9]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let set = RawImageSet::new(2, 1, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        for name in ["a.idx", "a.idx.gz"] {
            let p = dir.path().join(name);
            write_idx_images(&set, &p).unwrap();
            assert_eq!(load_idx_images(&p).unwrap(), set);
        }
        let p = dir.path().join("l.idx.gz");
        write_idx_labels(&[3, 1, 4], &p).unwrap();
        assert_eq!(load_idx_labels(&p).unwrap(), vec![3, 1, 4]);
    }

    proptest! {
        #[test]
        fn encode_parse_identity(
            (n, r, c, pixels) in (0usize..4, 0usize..5, 0usize..5)
                .prop_flat_map(|(n, r, c)| (Just(n), Just(r), Just(c), proptest::collection::vec(any::<u8>(), n * r * c)))
        ) {
            let set = RawImageSet::new(n, r, c, pixels).unwrap();
            let back = parse_idx_images(&encode_idx_images(&set).unwrap()).unwrap();
            prop_assert_eq!(back, set);
        }
    }
}
