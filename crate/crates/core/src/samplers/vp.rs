use super::{
    churn_gamma, ensure_finite, DenoiseFn, SampleOutput, SamplerConfig, SamplerError, Scheme,
    Trajectory, VpSchedule,
};
use crate::rng::Substream;

/// `dx/dt` of the scaled probability-flow ODE at time `t`, with the
/// denoiser evaluated on the unscaled state `x / s(t)`.
fn slope(
    den: &dyn DenoiseFn,
    vp: &VpSchedule,
    x: &[f64],
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>), SamplerError> {
    let (sig, s) = (vp.sigma(t), vp.scale(t));
    let (dsig, ds) = (vp.sigma_deriv(t), vp.scale_deriv(t));
    let unscaled: Vec<f64> = x.iter().map(|v| v / s).collect();
    let d = den.denoise(&unscaled, sig)?;
    let a = dsig / sig + ds / s;
    let b = dsig * s / sig;
    let dx = x.iter().zip(&d).map(|(xv, dv)| a * xv - b * dv).collect();
    Ok((dx, d))
}

/// EDM-style stochastic sampler on the variance-preserving schedule. The
/// final step from `eps_s` to 0 returns the denoised estimate.
pub fn vp_sample(
    den: &dyn DenoiseFn,
    cfg: &SamplerConfig,
    rng: &mut Substream,
    record: bool,
) -> Result<SampleOutput, SamplerError> {
    let vp = cfg.vp;
    vp.validate()?;
    let n = cfg.n_steps;
    let ts = vp.time_steps(n);
    let st = cfg.stochasticity();
    let heun = cfg.effective_scheme() == Scheme::Heun;

    let (sig0, s0) = (vp.sigma(ts[0]), vp.scale(ts[0]));
    let mut x: Vec<f64> = rng.normal_vec(den.dim()).into_iter().map(|e| e * sig0 * s0).collect();
    let mut traj = Trajectory::maybe(record);
    if let Some(tr) = traj.as_mut() {
        tr.push(sig0, &x);
    }

    for i in 0..n {
        let (t_cur, t_next) = (ts[i], ts[i + 1]);
        let sig_cur = vp.sigma(t_cur);
        let gamma = churn_gamma(sig_cur, n, &st);
        let (x_hat, t_hat) = if gamma > 0.0 {
            let t_hat = vp.sigma_inv((1.0 + gamma) * sig_cur);
            let (sig_hat, s_hat) = (vp.sigma(t_hat), vp.scale(t_hat));
            let ratio = s_hat / vp.scale(t_cur);
            let k = s_hat * (sig_hat * sig_hat - sig_cur * sig_cur).max(0.0).sqrt() * st.s_noise;
            let x_hat = x.iter().map(|v| ratio * v + k * rng.normal()).collect();
            (x_hat, t_hat)
        } else {
            (x.clone(), t_cur)
        };
        let (d0, den0) = slope(den, &vp, &x_hat, t_hat)?;
        if let Some(tr) = traj.as_mut() {
            tr.annotate(&den0);
        }
        let next = if t_next == 0.0 {
            den0
        } else {
            let h = t_next - t_hat;
            let euler: Vec<f64> = x_hat.iter().zip(&d0).map(|(xv, dv)| xv + h * dv).collect();
            if heun {
                let (d1, _) = slope(den, &vp, &euler, t_next)?;
                x_hat
                    .iter()
                    .zip(d0.iter().zip(&d1))
                    .map(|(xv, (a, b))| xv + h * 0.5 * (a + b))
                    .collect()
            } else {
                euler
            }
        };
        let sig_next = vp.sigma(t_next);
        ensure_finite(&next, i + 1, sig_next)?;
        x = next;
        if let Some(tr) = traj.as_mut() {
            tr.push(sig_next, &x);
        }
    }
    Ok(SampleOutput { state: x, trajectory: traj })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{FnDenoiser, SamplerKind};

    #[test]
    fn constant_denoiser_attractor() {
        let den = FnDenoiser { dim: 2, f: |_: &[f64], _| vec![0.3, -0.6] };
        let cfg = SamplerConfig { n_steps: 64, ..SamplerConfig::new(SamplerKind::Vp) };
        let out = vp_sample(&den, &cfg, &mut Substream::new(8, &[]), false).unwrap();
        assert!((out.state[0] - 0.3).abs() < 1e-6 && (out.state[1] + 0.6).abs() < 1e-6);
    }

    #[test]
    fn deterministic_without_churn() {
        let den = FnDenoiser { dim: 3, f: |x: &[f64], s: f64| x.iter().map(|v| v / (1.0 + s * s)).collect() };
        let cfg = SamplerConfig { n_steps: 16, ..SamplerConfig::new(SamplerKind::Vp) };
        let a = vp_sample(&den, &cfg, &mut Substream::new(8, &[2]), true).unwrap();
        let b = vp_sample(&den, &cfg, &mut Substream::new(8, &[2]), true).unwrap();
        assert_eq!(a, b);
        let s = a.trajectory.unwrap().sigmas();
        assert!(s.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn gaussian_data_variance_preserved() {
        // Data N(0, 1): D(x; sigma) = x / (1 + sigma^2).
        let den = FnDenoiser { dim: 1, f: |x: &[f64], s: f64| vec![x[0] / (1.0 + s * s)] };
        let cfg = SamplerConfig { n_steps: 64, ..SamplerConfig::new(SamplerKind::Vp) };
        let xs: Vec<f64> = (0..2000)
            .map(|i| vp_sample(&den, &cfg, &mut Substream::new(1, &[i]), false).unwrap().state[0])
            .collect();
        let var = xs.iter().map(|v| v * v).sum::<f64>() / xs.len() as f64;
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }
}
