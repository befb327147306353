use super::kernel::{posterior, Component};
use super::{check_call, Condition, Denoiser, DenoiserError};
use crate::dataset::BiasedDataset;

/// Ideal denoiser of an empirical point-mass distribution: a softmax over
/// `-|x - x_i|^2 / (2 sigma^2)` weighting the training points of the
/// conditioning subset.
#[derive(Debug, Clone)]
pub struct EmpiricalDenoiser {
    dim: usize,
    /// Flattened points of each class.
    points: Vec<Vec<f64>>,
    priors: Vec<f64>,
    /// Original label of each class index.
    labels: Vec<u8>,
}

impl EmpiricalDenoiser {
    /// `classes[i]` is the class index (`0..K`) of `points[i]`. Class priors
    /// are the empirical frequencies.
    pub fn new(points: &[Vec<f64>], classes: &[usize]) -> Result<Self, DenoiserError> {
        if points.is_empty() {
            return Err(DenoiserError::EmptyConditioningSet(0));
        }
        if points.len() != classes.len() {
            return Err(DenoiserError::InvalidSpec(format!(
                "{} points but {} class labels",
                points.len(),
                classes.len()
            )));
        }
        let dim = points[0].len();
        let k = classes.iter().copied().max().unwrap_or(0) + 1;
        let mut flat = vec![Vec::new(); k];
        for (p, &c) in points.iter().zip(classes) {
            if p.len() != dim {
                return Err(DenoiserError::DimensionMismatch { expected: dim, actual: p.len() });
            }
            flat[c].extend_from_slice(p);
        }
        if let Some(y) = flat.iter().position(Vec::is_empty) {
            return Err(DenoiserError::EmptyConditioningSet(y));
        }
        let n = points.len() as f64;
        let priors = flat.iter().map(|f| (f.len() / dim) as f64 / n).collect();
        let labels = (0..k).map(|c| c as u8).collect();
        Ok(Self { dim, points: flat, priors, labels })
    }

    /// Builds the denoiser over a dataset's images in the `[-1, 1]` sampler
    /// space, with one class per distinct target label.
    pub fn from_dataset(dataset: &BiasedDataset) -> Result<Self, DenoiserError> {
        let labels = dataset.classes();
        let points: Vec<Vec<f64>> = dataset.samples.iter().map(|s| s.image.to_state()).collect();
        let classes: Vec<usize> = dataset
            .samples
            .iter()
            .map(|s| labels.binary_search(&s.target).expect("label listed"))
            .collect();
        let mut d = Self::new(&points, &classes)?;
        d.labels = labels;
        Ok(d)
    }

    /// Original target label of each class index.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_index(&self, label: u8) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn class_size(&self, y: usize) -> usize {
        self.points[y].len() / self.dim
    }

    fn components_for(&self, cond: Condition) -> Result<Vec<Component<'_>>, DenoiserError> {
        let dim = self.dim;
        let class = |y: usize, log_weight: f64| {
            self.points[y].chunks_exact(dim).map(move |p| Component { log_weight, mean: p, var: 0.0 })
        };
        match cond {
            Condition::Class(y) => {
                if y >= self.points.len() {
                    return Err(DenoiserError::UnknownClass(y));
                }
                Ok(class(y, -(self.class_size(y) as f64).ln()).collect())
            }
            Condition::Unconditional => Ok((0..self.points.len())
                .flat_map(|y| class(y, self.priors[y].ln() - (self.class_size(y) as f64).ln()))
                .collect()),
        }
    }
}

impl Denoiser for EmpiricalDenoiser {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.points.len()
    }

    fn class_priors(&self) -> &[f64] {
        &self.priors
    }

    fn denoise(&self, x: &[f64], sigma: f64, cond: Condition) -> Result<Vec<f64>, DenoiserError> {
        check_call(self.dim, x, sigma)?;
        posterior(x, sigma, self.components_for(cond)?)
            .map(|p| p.mean)
            .ok_or(DenoiserError::EmptyConditioningSet(0))
    }

    fn log_density(&self, x: &[f64], sigma: f64, cond: Condition) -> Result<f64, DenoiserError> {
        check_call(self.dim, x, sigma)?;
        Ok(posterior(x, sigma, self.components_for(cond)?)
            .map(|p| p.log_density)
            .unwrap_or(f64::NEG_INFINITY))
    }
}
