use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AxisValue, Cell, Grid, SweepError};
use crate::dataset::{load_dataset, BiasedDataset, DatasetKind, RgbImage, SyntheticBiasedSpec};
use crate::denoiser::{Condition, Conditioned, DenoiserError, EmpiricalDenoiser};
use crate::metrics::{
    color_oracle, estimate_rho, estimate_rho_multi, multicolor_oracle, MetricsError, RhoEstimate,
    DEFAULT_WHITE_THRESHOLD,
};
use crate::rng::Substream;
use crate::samplers::{sample, SamplerConfig};
use crate::{Error, Result};

/// Where the ideal denoiser's training set comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenoiserSource {
    /// A dataset file written by the `dataset` command.
    Dataset(PathBuf),
    /// A procedural dataset built on the fly.
    Synthetic(SyntheticBiasedSpec),
}

impl DenoiserSource {
    pub fn load(&self) -> Result<BiasedDataset> {
        Ok(match self {
            DenoiserSource::Dataset(path) => load_dataset(path)?,
            DenoiserSource::Synthetic(spec) => spec.build()?,
        })
    }
}

fn default_samples() -> usize {
    2000
}
fn default_alpha() -> f64 {
    0.05
}
fn default_threshold() -> f32 {
    DEFAULT_WHITE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub denoiser: DenoiserSource,
    /// Fixed sampler parameters; swept axes override them per cell.
    pub sampler: SamplerConfig,
    pub axes: BTreeMap<String, Vec<AxisValue>>,
    /// Samples generated for each conditioned class in every cell.
    #[serde(default = "default_samples")]
    pub samples_per_class: usize,
    /// Conditioning classes; all dataset classes when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<u8>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    /// Bias axis scored by the oracle (0 = left/only, 1 = right).
    #[serde(default)]
    pub bias_axis: usize,
    #[serde(default = "default_threshold")]
    pub white_threshold: f32,
    /// Report measured wall time per cell. Off by default so that repeated
    /// runs export identical bytes.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SweepError::InvalidSpec(e.to_string()).into())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn grid(&self) -> Result<Grid, SweepError> {
        let grid = Grid::new(&self.axes)?;
        if self.samples_per_class == 0 {
            return Err(SweepError::InvalidSpec("samples_per_class must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SweepError::InvalidSpec("alpha must lie in (0, 1)".into()));
        }
        for cell in grid.cells() {
            cell.apply(&self.sampler)?
                .validate()
                .map_err(|e| SweepError::InvalidSpec(format!("cell {cell}: {e}")))?;
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResultRow {
    pub cell: BTreeMap<String, AxisValue>,
    pub k: u64,
    pub n: u64,
    pub rho_hat: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub alpha: f64,
    pub seed: u64,
    pub wall_ms: f64,
    /// Samples excluded by the oracle (for example all-white images).
    #[serde(default)]
    pub filtered: u64,
}

impl SweepResultRow {
    pub fn estimate(&self) -> RhoEstimate {
        RhoEstimate {
            k: self.k,
            n: self.n,
            rho_hat: self.rho_hat,
            alpha: self.alpha,
            ci_lower: self.ci_lower,
            ci_upper: self.ci_upper,
        }
    }
}

/// Loads the spec's dataset and runs every cell.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<Vec<SweepResultRow>> {
    let dataset = spec.denoiser.load()?;
    run_sweep_with(spec, &dataset, workers)
}

/// Runs every cell against an already loaded dataset. `workers` bounds the
/// thread pool; rows do not depend on it.
pub fn run_sweep_with(
    spec: &SweepSpec,
    dataset: &BiasedDataset,
    workers: Option<usize>,
) -> Result<Vec<SweepResultRow>> {
    let grid = spec.grid()?;
    if spec.bias_axis >= dataset.axes() {
        return Err(SweepError::InvalidSpec(format!("dataset has no bias axis {}", spec.bias_axis)).into());
    }
    let backend = EmpiricalDenoiser::from_dataset(dataset)?;
    let labels = match &spec.classes {
        Some(c) if !c.is_empty() => c.clone(),
        Some(_) => return Err(SweepError::InvalidSpec("empty conditioning set".into()).into()),
        None => backend.labels().to_vec(),
    };
    for &l in &labels {
        if backend.class_index(l).is_none() {
            return Err(DenoiserError::UnknownClass(l as usize).into());
        }
    }
    let ctx = Ctx { spec, dataset, backend: &backend, labels: &labels };
    let body = || grid.cells().iter().map(|cell| ctx.run_cell(cell)).collect::<Result<Vec<_>>>();
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(body),
        None => body(),
    }
}

struct Ctx<'a> {
    spec: &'a SweepSpec,
    dataset: &'a BiasedDataset,
    backend: &'a EmpiricalDenoiser,
    labels: &'a [u8],
}

impl Ctx<'_> {
    fn verdict(&self, image: &RgbImage, target: u8) -> std::result::Result<Option<bool>, MetricsError> {
        let palette = &self.dataset.palettes[self.spec.bias_axis];
        let t = self.spec.white_threshold;
        let v = match self.dataset.kind {
            DatasetKind::Biased => color_oracle(image, palette, target, t),
            DatasetKind::MultiColor => {
                let (l, r) = (&self.dataset.palettes[0], &self.dataset.palettes[1]);
                multicolor_oracle(image, l, r, target, t)
                    .map(|(a, b)| if self.spec.bias_axis == 0 { a } else { b })
            }
        };
        match v {
            Ok(v) => Ok(Some(v.aligned)),
            Err(MetricsError::AllPixelsWhite) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn run_cell(&self, cell: &Cell) -> Result<SweepResultRow> {
        let annotate = |e: Error| -> Error {
            SweepError::Cell { cell: cell.to_string(), source: Box::new(e) }.into()
        };
        let cfg = cell.apply(&self.spec.sampler)?;
        let start = Instant::now();
        let per_class = self.spec.samples_per_class;
        let (w, h) = self.dataset.image_shape();
        let key = cell.key();
        let outcomes: Vec<Option<bool>> = (0..self.labels.len() * per_class)
            .into_par_iter()
            .map(|j| -> Result<Option<bool>> {
                let label = self.labels[j / per_class];
                let y = self.backend.class_index(label).expect("checked above");
                let den = Conditioned::new(self.backend, Condition::Class(y), cfg.guidance);
                let mut rng = Substream::new(self.spec.seed, &[key, label as u64, (j % per_class) as u64]);
                let out = sample(&den, &cfg, &mut rng, false)?;
                let image = RgbImage::from_state(w, h, &out.state)?;
                Ok(self.verdict(&image, label)?)
            })
            .collect::<Result<_>>()
            .map_err(annotate)?;

        let filtered = outcomes.iter().filter(|v| v.is_none()).count() as u64;
        let alpha = self.spec.alpha;
        let est = if filtered == 0 {
            let lists: Vec<Vec<bool>> =
                outcomes.chunks(per_class).map(|c| c.iter().map(|v| v.unwrap()).collect()).collect();
            estimate_rho_multi(&lists, alpha)
        } else {
            let kept: Vec<bool> = outcomes.iter().flatten().copied().collect();
            estimate_rho(&kept, alpha)
        }
        .map_err(|e| annotate(e.into()))?;

        let wall_ms = if self.spec.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        Ok(SweepResultRow {
            cell: cell.0.iter().cloned().collect(),
            k: est.k,
            n: est.n,
            rho_hat: est.rho_hat,
            ci_lower: est.ci_lower,
            ci_upper: est.ci_upper,
            alpha,
            seed: self.spec.seed,
            wall_ms,
            filtered,
        })
    }
}
