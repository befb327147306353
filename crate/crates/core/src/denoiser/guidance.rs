use serde::{Deserialize, Serialize};

use super::{Condition, Denoiser, DenoiserError};

/// How the unconditional branch of guidance is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncondMode {
    /// The backend's whole-population denoiser.
    NullToken,
    /// Prior-weighted sum of conditional scores, `sum_y p(y) s(x; sigma; y)`.
    #[default]
    Aggregated,
    /// Conditional scores weighted by the posterior p(y | x; sigma), which
    /// recovers the true unconditional score.
    ExactPosterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceConfig {
    #[serde(default)]
    pub w: f64,
    #[serde(default)]
    pub mode: UncondMode,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self { w: 0.0, mode: UncondMode::Aggregated }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<(), DenoiserError> {
        if self.w >= -1.0 && self.w.is_finite() {
            Ok(())
        } else {
            Err(DenoiserError::InvalidGuidance(self.w))
        }
    }
}

fn to_score(d: &[f64], x: &[f64], sigma: f64) -> Vec<f64> {
    let s2 = sigma * sigma;
    d.iter().zip(x).map(|(di, xi)| (di - xi) / s2).collect()
}

pub fn score(backend: &dyn Denoiser, x: &[f64], sigma: f64, cond: Condition) -> Result<Vec<f64>, DenoiserError> {
    let d = backend.denoise(x, sigma, cond)?;
    Ok(to_score(&d, x, sigma))
}

fn class_weights(backend: &dyn Denoiser, x: &[f64], sigma: f64, mode: UncondMode) -> Result<Vec<f64>, DenoiserError> {
    match mode {
        UncondMode::ExactPosterior => backend.class_posterior(x, sigma),
        _ => Ok(backend.class_priors().to_vec()),
    }
}

pub fn unconditional_score(
    backend: &dyn Denoiser,
    x: &[f64],
    sigma: f64,
    mode: UncondMode,
) -> Result<Vec<f64>, DenoiserError> {
    if mode == UncondMode::NullToken {
        return score(backend, x, sigma, Condition::Unconditional);
    }
    let weights = class_weights(backend, x, sigma, mode)?;
    let mut out = vec![0.0; x.len()];
    for (y, &p) in weights.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let s = score(backend, x, sigma, Condition::Class(y))?;
        for (o, v) in out.iter_mut().zip(s) {
            *o += v * p;
        }
    }
    Ok(out)
}

/// Denoiser form of [`unconditional_score`]: `sum_y w_y D(x; sigma; y)` for
/// the weighted modes, which equals `x + sigma^2 * s_uncond` since the weights
/// sum to one.
pub fn unconditional_denoise(
    backend: &dyn Denoiser,
    x: &[f64],
    sigma: f64,
    mode: UncondMode,
) -> Result<Vec<f64>, DenoiserError> {
    if mode == UncondMode::NullToken {
        return backend.denoise(x, sigma, Condition::Unconditional);
    }
    let weights = class_weights(backend, x, sigma, mode)?;
    let mut out = vec![0.0; x.len()];
    for (y, &p) in weights.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let d = backend.denoise(x, sigma, Condition::Class(y))?;
        for (o, v) in out.iter_mut().zip(d) {
            *o += v * p;
        }
    }
    Ok(out)
}

/// `(1 + w) s(x; sigma; y) - w s(x; sigma; null)`.
pub fn guided_score(
    backend: &dyn Denoiser,
    x: &[f64],
    sigma: f64,
    class: usize,
    guidance: &GuidanceConfig,
) -> Result<Vec<f64>, DenoiserError> {
    guidance.validate()?;
    let cond = score(backend, x, sigma, Condition::Class(class))?;
    if guidance.w == 0.0 {
        return Ok(cond);
    }
    let uncond = unconditional_score(backend, x, sigma, guidance.mode)?;
    let w = guidance.w;
    Ok(cond.iter().zip(&uncond).map(|(c, u)| (1.0 + w) * c - w * u).collect())
}

/// Denoiser consumed by the samplers for guided sampling,
/// `(1 + w) D(x; sigma; y) - w D_uncond(x; sigma)`, which is algebraically
/// `x + sigma^2 * guided_score`. With `w = 0` this is the conditional
/// denoiser itself.
pub fn guided_denoise(
    backend: &dyn Denoiser,
    x: &[f64],
    sigma: f64,
    class: usize,
    guidance: &GuidanceConfig,
) -> Result<Vec<f64>, DenoiserError> {
    guidance.validate()?;
    let cond = backend.denoise(x, sigma, Condition::Class(class))?;
    if guidance.w == 0.0 {
        return Ok(cond);
    }
    let uncond = unconditional_denoise(backend, x, sigma, guidance.mode)?;
    let w = guidance.w;
    Ok(cond.iter().zip(&uncond).map(|(c, u)| (1.0 + w) * c - w * u).collect())
}

/// A backend bound to a condition and guidance setting: the `D(x; sigma)`
/// that samplers integrate.
#[derive(Clone, Copy)]
pub struct Conditioned<'a> {
    pub backend: &'a dyn Denoiser,
    pub cond: Condition,
    pub guidance: GuidanceConfig,
}

impl<'a> Conditioned<'a> {
    pub fn new(backend: &'a dyn Denoiser, cond: Condition, guidance: GuidanceConfig) -> Self {
        Self { backend, cond, guidance }
    }

    pub fn dim(&self) -> usize {
        self.backend.dim()
    }

    pub fn denoise(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>, DenoiserError> {
        match self.cond {
            Condition::Class(y) => guided_denoise(self.backend, x, sigma, y, &self.guidance),
            Condition::Unconditional => self.backend.denoise(x, sigma, Condition::Unconditional),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoiser::{EmpiricalDenoiser, GaussianMixture};

    /// Scalar backend with fixed per-class denoiser outputs, for arithmetic
    /// checks of the combination rules.
    struct Fixed {
        outputs: Vec<f64>,
        uncond: f64,
        priors: Vec<f64>,
    }

    impl Denoiser for Fixed {
        fn dim(&self) -> usize {
            1
        }
        fn num_classes(&self) -> usize {
            self.outputs.len()
        }
        fn class_priors(&self) -> &[f64] {
            &self.priors
        }
        fn denoise(&self, _x: &[f64], _s: f64, c: Condition) -> Result<Vec<f64>, DenoiserError> {
            Ok(vec![match c {
                Condition::Class(y) => self.outputs[y],
                Condition::Unconditional => self.uncond,
            }])
        }
        fn log_density(&self, _x: &[f64], _s: f64, _c: Condition) -> Result<f64, DenoiserError> {
            Ok(0.0)
        }
    }

    #[test]
    fn aggregated_arithmetic() {
        // x = 0, sigma = 1: score equals the denoiser output.
        let b = Fixed { outputs: vec![2.0, -1.0], uncond: 0.0, priors: vec![0.5, 0.5] };
        let s = unconditional_score(&b, &[0.0], 1.0, UncondMode::Aggregated).unwrap();
        assert_eq!(s, vec![0.5]);
    }

    #[test]
    fn single_class_aggregate_is_conditional() {
        let g = GaussianMixture::single(vec![0.3], 0.7);
        let a = unconditional_score(&g, &[1.2], 0.9, UncondMode::Aggregated).unwrap();
        let c = score(&g, &[1.2], 0.9, Condition::Class(0)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn guidance_arithmetic() {
        let b = Fixed { outputs: vec![3.0], uncond: 1.0, priors: vec![1.0] };
        let g = GuidanceConfig { w: 1.0, mode: UncondMode::NullToken };
        assert_eq!(guided_score(&b, &[0.0], 1.0, 0, &g).unwrap(), vec![5.0]);
        let g = GuidanceConfig { w: -1.0, mode: UncondMode::NullToken };
        assert_eq!(guided_score(&b, &[0.0], 1.0, 0, &g).unwrap(), vec![1.0]);
        let g = GuidanceConfig { w: 0.0, mode: UncondMode::NullToken };
        assert_eq!(guided_score(&b, &[0.0], 1.0, 0, &g).unwrap(), vec![3.0]);
        let g = GuidanceConfig { w: -2.0, mode: UncondMode::NullToken };
        assert!(guided_score(&b, &[0.0], 1.0, 0, &g).is_err());
    }

    #[test]
    fn zero_guidance_bitwise() {
        let pts = vec![vec![0.1, 0.2], vec![0.9, -0.4], vec![-0.5, 0.5], vec![0.3, 0.3]];
        let d = EmpiricalDenoiser::new(&pts, &[0, 0, 1, 1]).unwrap();
        let x = [0.37, -0.11];
        for mode in [UncondMode::NullToken, UncondMode::Aggregated, UncondMode::ExactPosterior] {
            let g = GuidanceConfig { w: 0.0, mode };
            let a = guided_score(&d, &x, 0.6, 1, &g).unwrap();
            let b = score(&d, &x, 0.6, Condition::Class(1)).unwrap();
            assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                       b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn exact_posterior_matches_null_token() {
        let pts = vec![vec![0.1, 0.2], vec![0.9, -0.4], vec![-0.5, 0.5]];
        let d = EmpiricalDenoiser::new(&pts, &[0, 0, 1]).unwrap();
        let x = [0.2, 0.05];
        for sigma in [0.1, 0.5, 2.0] {
            let a = unconditional_score(&d, &x, sigma, UncondMode::ExactPosterior).unwrap();
            let b = unconditional_score(&d, &x, sigma, UncondMode::NullToken).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() <= 1e-9 * q.abs().max(1.0));
            }
        }
    }

    #[test]
    fn denoiser_form_matches_score_form() {
        let pts = vec![vec![0.1, 0.2], vec![0.9, -0.4], vec![-0.5, 0.5]];
        let d = EmpiricalDenoiser::new(&pts, &[0, 0, 1]).unwrap();
        let x = [0.2, 0.05];
        let sigma = 0.7;
        let g = GuidanceConfig { w: 2.5, mode: UncondMode::Aggregated };
        let s = guided_score(&d, &x, sigma, 0, &g).unwrap();
        let dd = guided_denoise(&d, &x, sigma, 0, &g).unwrap();
        for i in 0..2 {
            assert!((dd[i] - (x[i] + sigma * sigma * s[i])).abs() < 1e-12);
        }
    }
}
