use std::path::Path;

use super::{DatasetError, GrayImage};

const MAGIC_LABELS: u32 = 0x0000_0801;
const MAGIC_IMAGES: u32 = 0x0000_0803;

/// Decoded IDX container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxData {
    Labels(Vec<u8>),
    Images {
        count: usize,
        rows: usize,
        cols: usize,
        pixels: Vec<u8>,
    },
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, DatasetError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DatasetError::TruncatedPayload { expected: at + 4, actual: bytes.len() })
}

/// Parses an unsigned-byte IDX file (labels `0x801`, images `0x803`).
pub fn parse_idx(bytes: &[u8]) -> Result<IdxData, DatasetError> {
    let magic = read_u32(bytes, 0)?;
    let ndims = match magic {
        MAGIC_LABELS => 1,
        MAGIC_IMAGES => 3,
        other => return Err(DatasetError::UnknownMagic(other)),
    };
    let mut dims = Vec::with_capacity(ndims);
    for d in 0..ndims {
        dims.push(read_u32(bytes, 4 + 4 * d)? as usize);
    }
    let header = 4 + 4 * ndims;
    let expected = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(DatasetError::DimensionOverflow)?;
    let payload = &bytes[header..];
    if payload.len() != expected {
        return Err(DatasetError::TruncatedPayload { expected, actual: payload.len() });
    }
    Ok(match ndims {
        1 => IdxData::Labels(payload.to_vec()),
        _ => IdxData::Images { count: dims[0], rows: dims[1], cols: dims[2], pixels: payload.to_vec() },
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>, DatasetError> {
    std::fs::read(path).map_err(|source| DatasetError::IoFailure {
        path: path.display().to_string(),
        source,
    })
}

/// Loads an MNIST image/label file pair.
pub fn load_mnist(images: &Path, labels: &Path) -> Result<(Vec<GrayImage>, Vec<u8>), DatasetError> {
    let (count, rows, cols, pixels) = match parse_idx(&read_file(images)?)? {
        IdxData::Images { count, rows, cols, pixels } => (count, rows, cols, pixels),
        IdxData::Labels(_) => return Err(DatasetError::UnknownMagic(MAGIC_LABELS)),
    };
    let labels = match parse_idx(&read_file(labels)?)? {
        IdxData::Labels(l) => l,
        IdxData::Images { .. } => return Err(DatasetError::UnknownMagic(MAGIC_IMAGES)),
    };
    if labels.len() != count {
        return Err(DatasetError::ShapeMismatch(format!(
            "{count} images but {} labels",
            labels.len()
        )));
    }
    let stride = rows * cols;
    let images = pixels
        .chunks_exact(stride.max(1))
        .take(count)
        .map(|px| GrayImage::from_u8(cols, rows, px))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((images, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn labels() {
        let mut b = header(0x801, &[3]);
        b.extend_from_slice(&[5, 0, 9]);
        assert_eq!(parse_idx(&b).unwrap(), IdxData::Labels(vec![5, 0, 9]));
    }

    #[test]
    fn one_image() {
        let mut b = header(0x803, &[1, 28, 28]);
        b.extend(std::iter::repeat_n(7u8, 784));
        match parse_idx(&b).unwrap() {
            IdxData::Images { count, rows, cols, pixels } => {
                assert_eq!((count, rows, cols, pixels.len()), (1, 28, 28, 784));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated() {
        let mut b = header(0x803, &[2, 28, 28]);
        b.extend(std::iter::repeat_n(0u8, 784));
        assert!(matches!(
            parse_idx(&b),
            Err(DatasetError::TruncatedPayload { expected: 1568, actual: 784 })
        ));
        assert!(matches!(parse_idx(&[0, 0, 8]), Err(DatasetError::TruncatedPayload { .. })));
    }

    #[test]
    fn unknown_magic() {
        let b = header(0x0802, &[1]);
        assert!(matches!(parse_idx(&b), Err(DatasetError::UnknownMagic(0x802))));
    }

    #[test]
    fn overflow() {
        let b = header(0x803, &[u32::MAX, u32::MAX, u32::MAX]);
        assert!(matches!(parse_idx(&b), Err(DatasetError::DimensionOverflow)));
    }
}
