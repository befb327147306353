//! Noise schedules and samplers.
//!
//! All samplers integrate the same sigma-parameterised denoiser interface,
//! [`DenoiseFn`]. Discrete-time samplers (DDPM, DDIM) convert their
//! variance-preserving state to the variance-exploding one by dividing by
//! `sqrt(abar_t)` before calling it.

mod ddpm;
mod dpm;
mod edm;
mod schedule;
mod trajectory;
mod vp;

pub use ddpm::{ddim_sample, ddpm_sample};
pub use dpm::dpm_solver_1;
pub use edm::{churn_gamma, edm_sample};
pub use schedule::{
    ddim_timesteps, karras_schedule, DdpmSchedule, DdpmVariance, KarrasScheduleSpec, VpSchedule,
};
pub use trajectory::{Trajectory, TrajectoryPoint};
pub use vp::vp_sample;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoiser::{Conditioned, DenoiserError, GuidanceConfig};
use crate::rng::Substream;

#[derive(Debug, thiserror::Error)]
pub enum SamplerError {
    #[error("invalid schedule spec: {0}")]
    InvalidSpec(String),
    #[error("invalid diffusion schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid DDIM step subset: {n_steps} steps out of T={t_steps}")]
    InvalidSubset { n_steps: usize, t_steps: usize },
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("non-finite state at step {step} (sigma = {sigma})")]
    NonfiniteState { step: usize, sigma: f64 },
    #[error(transparent)]
    Denoiser(#[from] DenoiserError),
}

impl SamplerError {
    pub fn category(&self) -> &'static str {
        match self {
            SamplerError::InvalidSpec(_) => "invalid_spec",
            SamplerError::InvalidSchedule(_) => "invalid_schedule",
            SamplerError::InvalidSubset { .. } => "invalid_subset",
            SamplerError::InvalidConfig(_) => "config",
            SamplerError::NonfiniteState { .. } => "nonfinite_state",
            SamplerError::Denoiser(e) => e.category(),
        }
    }
}

/// `D(x; sigma)` as seen by a sampler.
pub trait DenoiseFn: Sync {
    fn dim(&self) -> usize;
    fn denoise(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>, DenoiserError>;
}

impl DenoiseFn for Conditioned<'_> {
    fn dim(&self) -> usize {
        Conditioned::dim(self)
    }

    fn denoise(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>, DenoiserError> {
        Conditioned::denoise(self, x, sigma)
    }
}

/// Adapts a closure into a [`DenoiseFn`].
pub struct FnDenoiser<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> DenoiseFn for FnDenoiser<F>
where
    F: Fn(&[f64], f64) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn denoise(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>, DenoiserError> {
        Ok((self.f)(x, sigma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Edm,
    Ddpm,
    Ddim,
    Vp,
    #[serde(rename = "dpm_solver_1")]
    DpmSolver1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    Heun,
}

/// Fresh-noise settings of the stochastic EDM/VP samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticityParams {
    pub s_churn: f64,
    pub s_tmin: f64,
    pub s_tmax: f64,
    pub s_noise: f64,
}

fn default_n_steps() -> usize {
    18
}
fn default_sigma_min() -> f64 {
    0.002
}
fn default_sigma_max() -> f64 {
    80.0
}
fn default_exponent() -> f64 {
    7.0
}
fn default_one() -> f64 {
    1.0
}
fn default_t() -> usize {
    1000
}
fn default_beta_1() -> f64 {
    1e-4
}
fn default_beta_t() -> f64 {
    0.02
}

/// Complete sampler configuration, serialisable as a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_sigma_min")]
    pub sigma_min: f64,
    #[serde(default = "default_sigma_max")]
    pub sigma_max: f64,
    #[serde(default = "default_exponent")]
    pub schedule_exponent: f64,
    /// Integration scheme; Heun for edm/vp and Euler otherwise when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub s_churn: f64,
    #[serde(default)]
    pub s_tmin: f64,
    /// Upper end of the churn window; unbounded when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_tmax: Option<f64>,
    #[serde(default = "default_one")]
    pub s_noise: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_t")]
    pub t_steps: usize,
    #[serde(default = "default_beta_1")]
    pub beta_1: f64,
    #[serde(default = "default_beta_t")]
    pub beta_t: f64,
    #[serde(default)]
    pub ddpm_variance: DdpmVariance,
    #[serde(default)]
    pub vp: VpSchedule,
    #[serde(default)]
    pub guidance: GuidanceConfig,
    #[serde(default)]
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(kind: SamplerKind) -> Self {
        Self {
            kind,
            n_steps: default_n_steps(),
            sigma_min: default_sigma_min(),
            sigma_max: default_sigma_max(),
            schedule_exponent: default_exponent(),
            scheme: None,
            s_churn: 0.0,
            s_tmin: 0.0,
            s_tmax: None,
            s_noise: 1.0,
            eta: 0.0,
            t_steps: default_t(),
            beta_1: default_beta_1(),
            beta_t: default_beta_t(),
            ddpm_variance: DdpmVariance::Forward,
            vp: VpSchedule::default(),
            guidance: GuidanceConfig::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SamplerError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| SamplerError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn effective_scheme(&self) -> Scheme {
        self.scheme.unwrap_or(match self.kind {
            SamplerKind::Edm | SamplerKind::Vp => Scheme::Heun,
            _ => Scheme::Euler,
        })
    }

    pub fn karras(&self) -> KarrasScheduleSpec {
        KarrasScheduleSpec {
            n_steps: self.n_steps,
            sigma_min: self.sigma_min,
            sigma_max: self.sigma_max,
            exponent: self.schedule_exponent,
        }
    }

    pub fn stochasticity(&self) -> StochasticityParams {
        StochasticityParams {
            s_churn: self.s_churn,
            s_tmin: self.s_tmin,
            s_tmax: self.s_tmax.unwrap_or(f64::INFINITY),
            s_noise: self.s_noise,
        }
    }

    /// Number of recorded states minus one.
    pub fn steps(&self) -> usize {
        match self.kind {
            SamplerKind::Ddpm => self.t_steps,
            _ => self.n_steps,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::InvalidConfig(m.to_string()));
        if self.n_steps == 0 {
            return bad("n_steps must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad("eta must lie in [0, 1]");
        }
        if self.effective_scheme() == Scheme::Heun
            && !matches!(self.kind, SamplerKind::Edm | SamplerKind::Vp)
        {
            return bad("heun is only available for edm and vp");
        }
        let st = self.stochasticity();
        if !(st.s_churn >= 0.0) || !(st.s_tmin >= 0.0) || !(st.s_tmin <= st.s_tmax) || !(st.s_noise >= 0.0) {
            return bad("stochasticity requires s_churn >= 0, 0 <= s_tmin <= s_tmax, s_noise >= 0");
        }
        self.guidance.validate()?;
        match self.kind {
            SamplerKind::Edm | SamplerKind::DpmSolver1 => self.karras().validate(),
            SamplerKind::Vp => self.vp.validate(),
            SamplerKind::Ddpm => DdpmSchedule::linear(self.t_steps, self.beta_1, self.beta_t).map(|_| ()),
            SamplerKind::Ddim => {
                DdpmSchedule::linear(self.t_steps, self.beta_1, self.beta_t)?;
                ddim_timesteps(self.t_steps, self.n_steps).map(|_| ())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutput {
    pub state: Vec<f64>,
    pub trajectory: Option<Trajectory>,
}

pub(crate) fn ensure_finite(x: &[f64], step: usize, sigma: f64) -> Result<(), SamplerError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SamplerError::NonfiniteState { step, sigma })
    }
}

/// Runs the configured sampler once, drawing from `rng`.
pub fn sample(
    den: &dyn DenoiseFn,
    cfg: &SamplerConfig,
    rng: &mut Substream,
    record: bool,
) -> Result<SampleOutput, SamplerError> {
    cfg.validate()?;
    match cfg.kind {
        SamplerKind::Edm => edm_sample(den, cfg, rng, record),
        SamplerKind::Ddpm => ddpm_sample(den, cfg, rng, record),
        SamplerKind::Ddim => ddim_sample(den, cfg, rng, record),
        SamplerKind::Vp => vp_sample(den, cfg, rng, record),
        SamplerKind::DpmSolver1 => dpm_solver_1(den, cfg, rng, record),
    }
}

/// Generates `count` samples in parallel. Sample `i` uses the substream keyed
/// by `(seed, keys..., i)`, so results do not depend on scheduling.
pub fn generate(
    den: &dyn DenoiseFn,
    cfg: &SamplerConfig,
    seed: u64,
    keys: &[u64],
    count: usize,
    record: bool,
) -> Result<Vec<SampleOutput>, SamplerError> {
    cfg.validate()?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut path = keys.to_vec();
            path.push(i as u64);
            let mut rng = Substream::new(seed, &path);
            sample(den, cfg, &mut rng, record)
        })
        .collect()
}
