//! Colour oracle, naive Monte-Carlo estimate of the aligned fraction, and
//! exact binomial confidence intervals.

mod interval;
mod oracle;
mod rho;

pub use interval::{clopper_pearson, regularized_beta};
pub use oracle::{
    color_oracle, multicolor_oracle, verdicts_csv, OracleVerdict, VerdictRecord,
    DEFAULT_WHITE_THRESHOLD,
};
pub use rho::{estimate_rho, estimate_rho_multi, RhoEstimate};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("no non-white pixels in image")]
    AllPixelsWhite,
    #[error("empty input")]
    EmptyInput,
    #[error("per-class verdict lists have unequal lengths")]
    RaggedInput,
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

impl MetricsError {
    pub fn category(&self) -> &'static str {
        match self {
            MetricsError::AllPixelsWhite => "all_pixels_white",
            MetricsError::EmptyInput => "empty_input",
            MetricsError::RaggedInput => "ragged_input",
            MetricsError::InvalidArguments(_) => "invalid_arguments",
        }
    }
}
