use serde::{Deserialize, Serialize};

use super::SamplerError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KarrasScheduleSpec {
    pub n_steps: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Exponent controlling how steps concentrate near `sigma_min`.
    pub exponent: f64,
}

impl Default for KarrasScheduleSpec {
    fn default() -> Self {
        Self { n_steps: 18, sigma_min: 0.002, sigma_max: 80.0, exponent: 7.0 }
    }
}

impl KarrasScheduleSpec {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let ok = self.n_steps >= 1
            && self.sigma_min > 0.0
            && self.sigma_min < self.sigma_max
            && self.sigma_max.is_finite()
            && self.exponent > 0.0
            && self.exponent.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SamplerError::InvalidSpec(format!("{self:?}")))
        }
    }
}

/// `n_steps + 1` noise levels, `sigma_max` down to `sigma_min`, then 0.
pub fn karras_schedule(spec: &KarrasScheduleSpec) -> Result<Vec<f64>, SamplerError> {
    spec.validate()?;
    let n = spec.n_steps;
    let inv = 1.0 / spec.exponent;
    let hi = spec.sigma_max.powf(inv);
    let lo = spec.sigma_min.powf(inv);
    let mut sigmas: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                spec.sigma_max
            } else if i == n - 1 {
                spec.sigma_min
            } else {
                let frac = i as f64 / (n - 1) as f64;
                (hi + frac * (lo - hi)).powf(spec.exponent)
            }
        })
        .collect();
    if n > 1 {
        sigmas[0] = spec.sigma_max;
    }
    sigmas.push(0.0);
    Ok(sigmas)
}

/// Which variance the ancestral DDPM step injects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DdpmVariance {
    /// The forward variance `beta_t`.
    #[default]
    Forward,
    /// The forward-process posterior variance
    /// `beta_t (1 - abar_{t-1}) / (1 - abar_t)`.
    Posterior,
}

/// Linear variance schedule of a discrete diffusion chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DdpmSchedule {
    /// `betas[t - 1]` is the variance of step `t`.
    pub betas: Vec<f64>,
    /// `alpha_bars[t]` for `t = 0..=T`, with `alpha_bars[0] = 1`.
    pub alpha_bars: Vec<f64>,
}

impl DdpmSchedule {
    pub fn linear(t_steps: usize, beta_1: f64, beta_t: f64) -> Result<Self, SamplerError> {
        if t_steps == 0 || !(beta_1 > 0.0 && beta_1 <= beta_t && beta_t < 1.0) {
            return Err(SamplerError::InvalidSchedule(format!(
                "T={t_steps}, beta_1={beta_1}, beta_T={beta_t}"
            )));
        }
        let betas: Vec<f64> = (0..t_steps)
            .map(|i| {
                if t_steps == 1 {
                    beta_1
                } else {
                    beta_1 + (beta_t - beta_1) * i as f64 / (t_steps - 1) as f64
                }
            })
            .collect();
        let mut alpha_bars = Vec::with_capacity(t_steps + 1);
        alpha_bars.push(1.0);
        let mut acc = 1.0;
        for b in &betas {
            acc *= 1.0 - b;
            alpha_bars.push(acc);
        }
        Ok(Self { betas, alpha_bars })
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn alpha(&self, t: usize) -> f64 {
        1.0 - self.betas[t - 1]
    }

    /// Noise level of the variance-exploding equivalent of step `t`:
    /// `x_t / sqrt(abar_t) = x0 + sigma_t * eps`.
    pub fn ve_sigma(&self, t: usize) -> f64 {
        let ab = self.alpha_bars[t];
        ((1.0 - ab) / ab).sqrt()
    }

    /// Variance added by one ancestral step `t -> t - 1`.
    pub fn ancestral_variance(&self, t: usize, kind: DdpmVariance) -> f64 {
        let beta = self.betas[t - 1];
        match kind {
            DdpmVariance::Forward => beta,
            DdpmVariance::Posterior => {
                beta * (1.0 - self.alpha_bars[t - 1]) / (1.0 - self.alpha_bars[t])
            }
        }
    }

    /// Variance injected by a DDIM step `t -> prev` at stochasticity `eta`.
    pub fn ddim_variance(&self, t: usize, prev: usize, eta: f64) -> f64 {
        let (ab_t, ab_p) = (self.alpha_bars[t], self.alpha_bars[prev]);
        let s = eta * ((1.0 - ab_p) / (1.0 - ab_t)).sqrt() * (1.0 - ab_t / ab_p).sqrt();
        s * s
    }
}

/// DDIM step subset: `floor(i * T / n)` for `i = 1..=n`, which is evenly
/// strided and always contains `T`.
pub fn ddim_timesteps(t_steps: usize, n_steps: usize) -> Result<Vec<usize>, SamplerError> {
    if n_steps == 0 || n_steps > t_steps {
        return Err(SamplerError::InvalidSubset { n_steps, t_steps });
    }
    Ok((1..=n_steps).map(|i| i * t_steps / n_steps).collect())
}

/// Variance-preserving schedule `sigma(t) = sqrt(exp(beta_d t^2 / 2 + beta_min t) - 1)`
/// with scaling `s(t) = 1 / sqrt(exp(beta_d t^2 / 2 + beta_min t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VpSchedule {
    pub beta_d: f64,
    pub beta_min: f64,
    /// Smallest nonzero time of the grid.
    pub eps_s: f64,
}

impl Default for VpSchedule {
    fn default() -> Self {
        Self { beta_d: 19.9, beta_min: 0.1, eps_s: 1e-3 }
    }
}

impl VpSchedule {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.beta_d > 0.0 && self.beta_min >= 0.0 && self.eps_s > 0.0 && self.eps_s < 1.0 {
            Ok(())
        } else {
            Err(SamplerError::InvalidSchedule(format!("{self:?}")))
        }
    }

    fn exponent(&self, t: f64) -> f64 {
        0.5 * self.beta_d * t * t + self.beta_min * t
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.exponent(t).exp_m1().sqrt()
    }

    pub fn sigma_deriv(&self, t: f64) -> f64 {
        let g = self.exponent(t);
        0.5 * (self.beta_d * t + self.beta_min) * g.exp() / self.sigma(t)
    }

    pub fn sigma_inv(&self, sigma: f64) -> f64 {
        let b = self.beta_min;
        ((b * b + 2.0 * self.beta_d * sigma.powi(2).ln_1p()).sqrt() - b) / self.beta_d
    }

    pub fn scale(&self, t: f64) -> f64 {
        (-0.5 * self.exponent(t)).exp()
    }

    pub fn scale_deriv(&self, t: f64) -> f64 {
        -0.5 * (self.beta_d * t + self.beta_min) * self.scale(t)
    }

    /// Time grid `1 -> eps_s` linearly over `n_steps` points, then 0.
    pub fn time_steps(&self, n_steps: usize) -> Vec<f64> {
        let mut ts: Vec<f64> = (0..n_steps)
            .map(|i| {
                if n_steps == 1 {
                    1.0
                } else {
                    1.0 + i as f64 / (n_steps - 1) as f64 * (self.eps_s - 1.0)
                }
            })
            .collect();
        ts.push(0.0);
        ts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_steps_hit_endpoints() {
        let spec = KarrasScheduleSpec { n_steps: 2, ..Default::default() };
        assert_eq!(karras_schedule(&spec).unwrap(), vec![80.0, 0.002, 0.0]);
    }

    #[test]
    fn three_step_midpoint() {
        let spec = KarrasScheduleSpec { n_steps: 3, ..Default::default() };
        let s = karras_schedule(&spec).unwrap();
        // Direct evaluation of the midpoint interpolation in sigma^(1/7).
        let mid = ((80f64.powf(1.0 / 7.0) + 0.002f64.powf(1.0 / 7.0)) / 2.0).powi(7);
        assert!((s[1] - mid).abs() < 1e-12);
        assert!((s[1] - 2.515).abs() < 1e-3);
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            KarrasScheduleSpec { n_steps: 0, ..Default::default() },
            KarrasScheduleSpec { sigma_min: 90.0, ..Default::default() },
            KarrasScheduleSpec { exponent: 0.0, ..Default::default() },
        ] {
            assert!(matches!(karras_schedule(&spec), Err(SamplerError::InvalidSpec(_))));
        }
        assert_eq!(
            karras_schedule(&KarrasScheduleSpec { n_steps: 1, ..Default::default() }).unwrap(),
            vec![80.0, 0.0]
        );
    }

    #[test]
    fn ddim_subset() {
        assert_eq!(ddim_timesteps(10, 10).unwrap(), (1..=10).collect::<Vec<_>>());
        assert_eq!(ddim_timesteps(1000, 3).unwrap(), vec![333, 666, 1000]);
        assert!(ddim_timesteps(10, 11).is_err());
        assert!(ddim_timesteps(10, 0).is_err());
    }

    #[test]
    fn ddpm_schedule_decreasing() {
        let s = DdpmSchedule::linear(1000, 1e-4, 0.02).unwrap();
        assert!(s.alpha_bars.windows(2).all(|w| w[1] < w[0]));
        assert!(DdpmSchedule::linear(10, 0.5, 0.1).is_err());
        assert!(DdpmSchedule::linear(10, 0.1, 1.0).is_err());
    }

    #[test]
    fn vp_schedule_monotone_and_invertible() {
        let vp = VpSchedule::default();
        let ts = vp.time_steps(16);
        let sig: Vec<f64> = ts.iter().map(|&t| vp.sigma(t)).collect();
        assert!(sig.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*sig.last().unwrap(), 0.0);
        for &t in &ts[..16] {
            assert!((vp.sigma_inv(vp.sigma(t)) - t).abs() < 1e-9);
            let h = 1e-6;
            let fd = (vp.sigma(t + h) - vp.sigma(t - h)) / (2.0 * h);
            assert!((fd - vp.sigma_deriv(t)).abs() < 1e-5 * fd.abs());
            let fd = (vp.scale(t + h) - vp.scale(t - h)) / (2.0 * h);
            assert!((fd - vp.scale_deriv(t)).abs() < 1e-6);
        }
    }
}
