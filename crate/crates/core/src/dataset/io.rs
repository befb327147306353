//! Tensor file format.
//!
//! ```text
//! {"magic":"biaslab-tensor","version":1,"shape":[...],"dtype":"f32le","metadata":{...}}\n
//! <product(shape) little-endian f32 values>
//! <8-byte little-endian FNV-1a-64 of the header line (with newline) and payload>
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{BiasedDataset, DatasetError, DatasetKind, LabeledSample, Palette, RgbImage};
use crate::rng::fnv1a64;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "biaslab-tensor";
const DTYPE: &str = "f32le";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    shape: Vec<usize>,
    dtype: String,
    metadata: Value,
}

/// A dense f32 tensor with free-form JSON metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub shape: Vec<usize>,
    pub metadata: Value,
    pub data: Vec<f32>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::IoFailure { path: path.display().to_string(), source }
}

impl TensorFile {
    pub fn new(shape: Vec<usize>, metadata: Value, data: Vec<f32>) -> Result<Self, DatasetError> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(DatasetError::ShapeMismatch(format!(
                "shape {shape:?} holds {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, metadata, data })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            magic: MAGIC.into(),
            version: FORMAT_VERSION,
            shape: self.shape.clone(),
            dtype: DTYPE.into(),
            metadata: self.metadata.clone(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        out.reserve(self.data.len() * 4 + 8);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let sum = fnv1a64(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DatasetError> {
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| DatasetError::FormatVersionMismatch("missing header line".into()))?;
        let header: Header = serde_json::from_slice(&bytes[..newline])
            .map_err(|e| DatasetError::FormatVersionMismatch(e.to_string()))?;
        if header.magic != MAGIC || header.version != FORMAT_VERSION || header.dtype != DTYPE {
            return Err(DatasetError::FormatVersionMismatch(format!(
                "{} v{} ({})",
                header.magic, header.version, header.dtype
            )));
        }
        let count = header
            .shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(DatasetError::DimensionOverflow)?;
        let body = &bytes[newline + 1..];
        let expected = count * 4 + 8;
        if body.len() != expected {
            return Err(DatasetError::TruncatedPayload { expected, actual: body.len() });
        }
        let split = bytes.len() - 8;
        let stored = u64::from_le_bytes(bytes[split..].try_into().expect("8 bytes"));
        let computed = fnv1a64(&bytes[..split]);
        if stored != computed {
            return Err(DatasetError::ChecksumMismatch { stored, computed });
        }
        let data = body[..count * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(Self { shape: header.shape, metadata: header.metadata, data })
    }

    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        std::fs::write(path, self.to_bytes()).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let bytes = std::fs::read(path).map_err(io_err(path))?;
        Self::from_bytes(&bytes)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetMeta {
    kind: String,
    dataset_kind: DatasetKind,
    seed: u64,
    rho_requested: Vec<f64>,
    rho_dataset: Vec<f64>,
    palettes: Vec<Palette>,
    targets: Vec<u8>,
    bias: Vec<Vec<u8>>,
    aligned: Vec<Vec<bool>>,
}

const DATASET_KIND: &str = "biased_dataset";

impl BiasedDataset {
    pub fn to_tensor_file(&self) -> Result<TensorFile, DatasetError> {
        if self.samples.is_empty() {
            return Err(DatasetError::EmptyInput);
        }
        let (w, h) = self.image_shape();
        let meta = DatasetMeta {
            kind: DATASET_KIND.into(),
            dataset_kind: self.kind,
            seed: self.seed,
            rho_requested: self.rho_requested.clone(),
            rho_dataset: self.rho_dataset.clone(),
            palettes: self.palettes.clone(),
            targets: self.samples.iter().map(|s| s.target).collect(),
            bias: self.samples.iter().map(|s| s.bias.clone()).collect(),
            aligned: self.samples.iter().map(|s| s.aligned.clone()).collect(),
        };
        let data = self.samples.iter().flat_map(|s| s.image.data.iter().copied()).collect();
        TensorFile::new(
            vec![self.samples.len(), h, w, 3],
            serde_json::to_value(meta).expect("metadata serializes"),
            data,
        )
    }

    pub fn from_tensor_file(file: &TensorFile) -> Result<Self, DatasetError> {
        let meta: DatasetMeta = serde_json::from_value(file.metadata.clone())
            .map_err(|e| DatasetError::FormatVersionMismatch(format!("dataset metadata: {e}")))?;
        if meta.kind != DATASET_KIND {
            return Err(DatasetError::FormatVersionMismatch(format!("not a dataset: {}", meta.kind)));
        }
        let [n, h, w, 3] = file.shape[..] else {
            return Err(DatasetError::ShapeMismatch(format!("{:?}", file.shape)));
        };
        if meta.targets.len() != n || meta.bias.len() != n || meta.aligned.len() != n {
            return Err(DatasetError::ShapeMismatch("label count differs from image count".into()));
        }
        let stride = h * w * 3;
        let samples = (0..n)
            .map(|i| LabeledSample {
                image: RgbImage {
                    width: w,
                    height: h,
                    data: file.data[i * stride..(i + 1) * stride].to_vec(),
                },
                target: meta.targets[i],
                bias: meta.bias[i].clone(),
                aligned: meta.aligned[i].clone(),
            })
            .collect();
        Ok(BiasedDataset {
            kind: meta.dataset_kind,
            samples,
            rho_requested: meta.rho_requested,
            rho_dataset: meta.rho_dataset,
            palettes: meta.palettes,
            seed: meta.seed,
        })
    }
}

pub fn save_dataset(dataset: &BiasedDataset, path: &Path) -> Result<(), DatasetError> {
    dataset.to_tensor_file()?.write(path)
}

pub fn load_dataset(path: &Path) -> Result<BiasedDataset, DatasetError> {
    BiasedDataset::from_tensor_file(&TensorFile::read(path)?)
}

/// Metadata for a file of generated samples.
pub fn samples_metadata(targets: &[u8], extra: Value) -> Value {
    json!({ "kind": "samples", "targets": targets, "extra": extra })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{colorize_biased_mnist, synthetic_digits};

    fn small() -> BiasedDataset {
        let (g, l) = synthetic_digits(2, &[0, 1, 2], 1);
        colorize_biased_mnist(&g, &l, 0.7, &Palette::biased_mnist(), 42).unwrap()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.bin");
        let ds = small();
        save_dataset(&ds, &path).unwrap();
        assert_eq!(load_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn corrupted_header() {
        let mut bytes = small().to_tensor_file().unwrap().to_bytes();
        bytes[0] = b'#';
        assert!(matches!(TensorFile::from_bytes(&bytes), Err(DatasetError::FormatVersionMismatch(_))));
    }

    #[test]
    fn corrupted_payload() {
        let mut bytes = small().to_tensor_file().unwrap().to_bytes();
        let n = bytes.len();
        bytes[n - 20] ^= 0x40;
        assert!(matches!(TensorFile::from_bytes(&bytes), Err(DatasetError::ChecksumMismatch { .. })));
    }

    #[test]
    fn wrong_version() {
        let f = TensorFile::new(vec![1], Value::Null, vec![0.5]).unwrap();
        let text = String::from_utf8_lossy(&f.to_bytes()).replace("\"version\":1", "\"version\":7");
        // Re-encoding the replacement keeps the payload bytes intact.
        let bytes: Vec<u8> = text.bytes().collect();
        assert!(matches!(TensorFile::from_bytes(&bytes), Err(DatasetError::FormatVersionMismatch(_))));
    }

    #[test]
    fn empty_dataset_rejected() {
        let mut ds = small();
        ds.samples.clear();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(save_dataset(&ds, &dir.path().join("x")), Err(DatasetError::EmptyInput)));
    }
}
