use crate::dataset::DatasetError;
use crate::denoiser::DenoiserError;
use crate::metrics::MetricsError;
use crate::samplers::SamplerError;
use crate::sweep::SweepError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Denoiser(#[from] DenoiserError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("io failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable category, used as the `error:<category>:`
    /// prefix by the command-line tool.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Dataset(e) => e.category(),
            Error::Denoiser(e) => e.category(),
            Error::Sampler(e) => e.category(),
            Error::Metrics(e) => e.category(),
            Error::Sweep(e) => e.category(),
            Error::Io { .. } => "io_failure",
            Error::Config(_) => "config",
        }
    }
}
