use super::{
    ensure_finite, karras_schedule, DenoiseFn, SampleOutput, SamplerConfig, SamplerError, Scheme,
    StochasticityParams, Trajectory,
};
use crate::rng::Substream;

/// Churn factor for a step leaving noise level `sigma`. Zero outside the
/// `[s_tmin, s_tmax]` window.
pub fn churn_gamma(sigma: f64, n_steps: usize, st: &StochasticityParams) -> f64 {
    if st.s_churn > 0.0 && sigma >= st.s_tmin && sigma <= st.s_tmax {
        (st.s_churn / n_steps as f64).min(std::f64::consts::SQRT_2 - 1.0)
    } else {
        0.0
    }
}

/// Adds fresh noise raising the level from `sigma` to `(1 + gamma) sigma`.
/// Randomness is consumed only when `gamma > 0`.
pub(crate) fn churn(
    x: &[f64],
    sigma: f64,
    gamma: f64,
    s_noise: f64,
    rng: &mut Substream,
) -> (Vec<f64>, f64) {
    if gamma <= 0.0 {
        return (x.to_vec(), sigma);
    }
    let sigma_hat = sigma * (1.0 + gamma);
    let k = (sigma_hat * sigma_hat - sigma * sigma).sqrt() * s_noise;
    let x_hat = x.iter().map(|v| v + k * rng.normal()).collect();
    (x_hat, sigma_hat)
}

pub fn edm_sample(
    den: &dyn DenoiseFn,
    cfg: &SamplerConfig,
    rng: &mut Substream,
    record: bool,
) -> Result<SampleOutput, SamplerError> {
    let sigmas = karras_schedule(&cfg.karras())?;
    let st = cfg.stochasticity();
    let heun = cfg.effective_scheme() == Scheme::Heun;
    let n = cfg.n_steps;

    let mut x: Vec<f64> = rng.normal_vec(den.dim()).into_iter().map(|e| e * sigmas[0]).collect();
    let mut traj = Trajectory::maybe(record);
    if let Some(t) = traj.as_mut() {
        t.push(sigmas[0], &x);
    }

    for i in 0..n {
        let (s_cur, s_next) = (sigmas[i], sigmas[i + 1]);
        let gamma = churn_gamma(s_cur, n, &st);
        let (x_hat, s_hat) = churn(&x, s_cur, gamma, st.s_noise, rng);
        let d_hat = den.denoise(&x_hat, s_hat)?;
        if let Some(t) = traj.as_mut() {
            t.annotate(&d_hat);
        }
        let next = if s_next == 0.0 {
            d_hat
        } else {
            let h = s_next - s_hat;
            let slope: Vec<f64> =
                x_hat.iter().zip(&d_hat).map(|(xv, dv)| (xv - dv) / s_hat).collect();
            let euler: Vec<f64> = x_hat.iter().zip(&slope).map(|(xv, dv)| xv + h * dv).collect();
            if heun {
                let d_next = den.denoise(&euler, s_next)?;
                euler
                    .iter()
                    .zip(&d_next)
                    .zip(x_hat.iter().zip(&slope))
                    .map(|((xe, dn), (xh, d0))| {
                        let d1 = (xe - dn) / s_next;
                        xh + h * 0.5 * (d0 + d1)
                    })
                    .collect()
            } else {
                euler
            }
        };
        ensure_finite(&next, i + 1, s_next)?;
        x = next;
        if let Some(t) = traj.as_mut() {
            t.push(s_next, &x);
        }
    }
    Ok(SampleOutput { state: x, trajectory: traj })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{FnDenoiser, SamplerKind};

    fn cfg(n: usize) -> SamplerConfig {
        SamplerConfig { n_steps: n, ..SamplerConfig::new(SamplerKind::Edm) }
    }

    #[test]
    fn gamma_clamp() {
        let st = StochasticityParams { s_churn: 80.0, s_tmin: 0.0, s_tmax: f64::INFINITY, s_noise: 1.0 };
        assert!((churn_gamma(10.0, 50, &st) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let st = StochasticityParams { s_churn: 5.0, ..st };
        assert_eq!(churn_gamma(10.0, 50, &st), 0.1);
        let st = StochasticityParams { s_tmin: 20.0, ..st };
        assert_eq!(churn_gamma(10.0, 50, &st), 0.0);
    }

    #[test]
    fn constant_denoiser_lands_exactly() {
        let target = vec![0.25, -0.5, 0.75];
        let t = target.clone();
        let den = FnDenoiser { dim: 3, f: move |_: &[f64], _| t.clone() };
        for n in [1, 2, 7, 18] {
            for churn in [0.0, 40.0] {
                let c = SamplerConfig { s_churn: churn, ..cfg(n) };
                let out = edm_sample(&den, &c, &mut Substream::new(3, &[n as u64]), false).unwrap();
                assert_eq!(out.state, target);
            }
        }
    }

    #[test]
    fn empty_window_equals_no_churn() {
        let den = FnDenoiser { dim: 2, f: |x: &[f64], s: f64| x.iter().map(|v| v / (1.0 + s * s)).collect() };
        let base = edm_sample(&den, &cfg(12), &mut Substream::new(9, &[0]), true).unwrap();
        let c = SamplerConfig { s_churn: 30.0, s_tmin: 100.0, s_tmax: Some(200.0), ..cfg(12) };
        let gated = edm_sample(&den, &c, &mut Substream::new(9, &[0]), true).unwrap();
        assert_eq!(base, gated);
    }

    #[test]
    fn trajectory_follows_schedule() {
        let den = FnDenoiser { dim: 1, f: |x: &[f64], s: f64| vec![x[0] / (1.0 + s * s)] };
        let out = edm_sample(&den, &cfg(5), &mut Substream::new(1, &[]), true).unwrap();
        let traj = out.trajectory.unwrap();
        assert_eq!(traj.len(), 6);
        assert_eq!(traj.sigmas(), karras_schedule(&cfg(5).karras()).unwrap());
        assert!(traj.points[..5].iter().all(|p| p.denoised.is_some()));
    }

    #[test]
    fn nonfinite_aborts() {
        let den = FnDenoiser { dim: 1, f: |_: &[f64], s: f64| vec![if s < 1.0 { f64::NAN } else { 0.0 }] };
        let err = edm_sample(&den, &cfg(10), &mut Substream::new(1, &[]), false).unwrap_err();
        assert!(matches!(err, SamplerError::NonfiniteState { .. }));
    }
}
