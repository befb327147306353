//! Colour-biased digit datasets: ingestion, synthesis and persistence.

mod colorize;
mod glyphs;
mod idx;
mod io;
mod palette;
mod resize;
mod synthetic;

pub use colorize::{colorize_biased_mnist, colorize_multicolor_mnist, left_columns, subset_classes};
pub use glyphs::synthetic_digits;
pub use idx::{load_mnist, parse_idx, IdxData};
pub use io::{load_dataset, samples_metadata, save_dataset, TensorFile, FORMAT_VERSION};
pub use palette::{Palette, PaletteEntry};
pub use resize::{prepare_gray, Resolution};
pub use synthetic::SyntheticBiasedSpec;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("unknown IDX magic number {0:#010x}")]
    UnknownMagic(u32),
    #[error("IDX payload length mismatch: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("IDX dimensions overflow the address space")]
    DimensionOverflow,
    #[error("empty input")]
    EmptyInput,
    #[error("class {0} is not in the palette")]
    ClassNotInPalette(u8),
    #[error("ratio {0} is outside [0, 1]")]
    InvalidRatio(f64),
    #[error("class subset selects no samples")]
    EmptyResult,
    #[error("invalid palette: {0}")]
    InvalidPalette(String),
    #[error("image shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unsupported or corrupted file header: {0}")]
    FormatVersionMismatch(String),
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("io failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub fn category(&self) -> &'static str {
        match self {
            DatasetError::UnknownMagic(_) => "unknown_magic",
            DatasetError::TruncatedPayload { .. } => "truncated_payload",
            DatasetError::DimensionOverflow => "dimension_overflow",
            DatasetError::EmptyInput => "empty_input",
            DatasetError::ClassNotInPalette(_) => "class_not_in_palette",
            DatasetError::InvalidRatio(_) => "invalid_argument",
            DatasetError::EmptyResult => "empty_result",
            DatasetError::InvalidPalette(_) => "invalid_palette",
            DatasetError::ShapeMismatch(_) => "shape_mismatch",
            DatasetError::FormatVersionMismatch(_) => "format_version_mismatch",
            DatasetError::ChecksumMismatch { .. } => "checksum_mismatch",
            DatasetError::IoFailure { .. } => "io_failure",
        }
    }
}

/// Single-channel image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, DatasetError> {
        if data.len() != width * height {
            return Err(DatasetError::ShapeMismatch(format!(
                "{} intensities for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, DatasetError> {
        Self::new(width, height, bytes.iter().map(|&b| f32::from(b) / 255.0).collect())
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }
}

/// Three-channel image with values in `[0, 1]`, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, DatasetError> {
        if data.len() != width * height * 3 {
            return Err(DatasetError::ShapeMismatch(format!(
                "{} values for a {width}x{height}x3 image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self { width, height, data }
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f32; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, rgb: [f32; 3]) {
        let i = (row * self.width + col) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Maps a state vector in `[-1, 1]` (the sampler space) back to an image,
    /// clamping to the valid range.
    pub fn from_state(width: usize, height: usize, state: &[f64]) -> Result<Self, DatasetError> {
        let data = state
            .iter()
            .map(|&v| (((v + 1.0) * 0.5).clamp(0.0, 1.0)) as f32)
            .collect();
        Self::new(width, height, data)
    }

    /// Rescales to the symmetric `[-1, 1]` range used by the samplers.
    pub fn to_state(&self) -> Vec<f64> {
        self.data.iter().map(|&v| 2.0 * f64::from(v) - 1.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Biased,
    MultiColor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub image: RgbImage,
    pub target: u8,
    /// One bias label per bias axis (one for Biased MNIST, left/right for
    /// Multi-Color MNIST). Each is the class index of the applied colour.
    pub bias: Vec<u8>,
    pub aligned: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasedDataset {
    pub kind: DatasetKind,
    pub samples: Vec<LabeledSample>,
    /// Requested alignment ratio per bias axis.
    pub rho_requested: Vec<f64>,
    /// Empirical aligned fraction per bias axis.
    pub rho_dataset: Vec<f64>,
    /// One palette per bias axis.
    pub palettes: Vec<Palette>,
    pub seed: u64,
}

impl BiasedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn axes(&self) -> usize {
        self.palettes.len()
    }

    pub fn image_shape(&self) -> (usize, usize) {
        self.samples
            .first()
            .map(|s| (s.image.width, s.image.height))
            .unwrap_or((0, 0))
    }

    /// Sorted distinct target classes.
    pub fn classes(&self) -> Vec<u8> {
        let mut c: Vec<u8> = self.samples.iter().map(|s| s.target).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Empirical aligned fraction for each bias axis.
    pub fn empirical_rho(&self) -> Vec<f64> {
        let n = self.samples.len().max(1) as f64;
        (0..self.axes())
            .map(|axis| {
                self.samples.iter().filter(|s| s.aligned[axis]).count() as f64 / n
            })
            .collect()
    }
}
