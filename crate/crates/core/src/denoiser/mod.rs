//! Exact denoisers, the score identity and classifier-free guidance.
//!
//! A [`Denoiser`] returns the posterior mean `E[x0 | x0 + sigma*eps = x]` for
//! a conditioning class or for the whole population. Scores are always derived
//! from it as `(D(x; sigma) - x) / sigma^2`.

mod empirical;
mod guidance;
mod kernel;
mod mixture;

pub use empirical::EmpiricalDenoiser;
pub use guidance::{
    guided_denoise, guided_score, score, unconditional_denoise, unconditional_score, Conditioned,
    GuidanceConfig, UncondMode,
};
pub use mixture::{GaussianMixture, MixtureComponent, GaussianMixtureSpec};

#[derive(Debug, thiserror::Error)]
pub enum DenoiserError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("noise level must be positive and finite, got {0}")]
    NonpositiveSigma(f64),
    #[error("conditioning set for class {0} is empty")]
    EmptyConditioningSet(usize),
    #[error("unknown class index {0}")]
    UnknownClass(usize),
    #[error("invalid denoiser spec: {0}")]
    InvalidSpec(String),
    #[error("guidance scale must be >= -1, got {0}")]
    InvalidGuidance(f64),
}

impl DenoiserError {
    pub fn category(&self) -> &'static str {
        match self {
            DenoiserError::DimensionMismatch { .. } => "dimension_mismatch",
            DenoiserError::NonpositiveSigma(_) => "nonpositive_sigma",
            DenoiserError::EmptyConditioningSet(_) => "empty_conditioning_set",
            DenoiserError::UnknownClass(_) => "unknown_class",
            DenoiserError::InvalidSpec(_) => "invalid_spec",
            DenoiserError::InvalidGuidance(_) => "invalid_guidance",
        }
    }
}

/// Class index (into the backend's class list) or the null token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Class(usize),
    Unconditional,
}

pub trait Denoiser: Send + Sync {
    fn dim(&self) -> usize;

    fn num_classes(&self) -> usize;

    /// Class frequencies p(y).
    fn class_priors(&self) -> &[f64];

    fn denoise(&self, x: &[f64], sigma: f64, cond: Condition) -> Result<Vec<f64>, DenoiserError>;

    /// Exact log-density of the sigma-smoothed (conditional) distribution.
    fn log_density(&self, x: &[f64], sigma: f64, cond: Condition) -> Result<f64, DenoiserError>;

    /// Posterior class probabilities p(y | x; sigma).
    fn class_posterior(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>, DenoiserError> {
        let logs = (0..self.num_classes())
            .map(|y| {
                let prior = self.class_priors()[y];
                if prior == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(prior.ln() + self.log_density(x, sigma, Condition::Class(y))?)
            })
            .collect::<Result<Vec<f64>, DenoiserError>>()?;
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = w.iter().sum();
        Ok(w.into_iter().map(|v| v / z).collect())
    }
}

pub(crate) fn check_call(dim: usize, x: &[f64], sigma: f64) -> Result<(), DenoiserError> {
    if x.len() != dim {
        return Err(DenoiserError::DimensionMismatch { expected: dim, actual: x.len() });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(DenoiserError::NonpositiveSigma(sigma));
    }
    Ok(())
}
