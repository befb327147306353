//! Exact-denoiser laboratory for studying how diffusion sampler
//! hyperparameters move the fraction of bias-aligned samples.
//!
//! The crate is organised around five layers:
//!
//! * [`dataset`] builds colour-biased digit datasets and persists them.
//! * [`denoiser`] provides exact denoisers (analytic Gaussian mixtures and
//!   the ideal empirical denoiser), scores and classifier-free guidance.
//! * [`samplers`] implements EDM, DDPM, DDIM, VP and DPM-Solver-1 samplers.
//! * [`metrics`] holds the colour oracle, the Monte-Carlo estimator of the
//!   aligned fraction and exact Clopper-Pearson intervals.
//! * [`sweep`] runs declarative hyperparameter grids and renders results.

pub mod dataset;
pub mod denoiser;
mod error;
pub mod image_out;
pub mod metrics;
pub mod rng;
pub mod samplers;
pub mod sweep;

pub use error::{Error, Result};
