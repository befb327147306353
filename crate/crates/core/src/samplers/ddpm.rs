use super::{
    ddim_timesteps, ensure_finite, DdpmSchedule, DenoiseFn, SampleOutput, SamplerConfig,
    SamplerError, Trajectory,
};
use crate::denoiser::DenoiserError;
use crate::rng::Substream;

/// Noise prediction from the sigma-parameterised denoiser: the VP state is
/// rescaled by `1 / sqrt(abar_t)` and denoised at the matching noise level.
fn predict(
    den: &dyn DenoiseFn,
    sched: &DdpmSchedule,
    x: &[f64],
    t: usize,
) -> Result<(Vec<f64>, Vec<f64>), DenoiserError> {
    let ab = sched.alpha_bars[t];
    let sab = ab.sqrt();
    let scaled: Vec<f64> = x.iter().map(|v| v / sab).collect();
    let d = den.denoise(&scaled, sched.ve_sigma(t))?;
    let denom = (1.0 - ab).sqrt();
    let eps = x.iter().zip(&d).map(|(xv, dv)| (xv - sab * dv) / denom).collect();
    Ok((d, eps))
}

/// Ancestral sampling over all `T` steps,
/// `x_{t-1} = (x_t - (1 - alpha_t) / sqrt(1 - abar_t) * eps) / sqrt(alpha_t) + sigma_t z`,
/// with no noise on the final step.
pub fn ddpm_sample(
    den: &dyn DenoiseFn,
    cfg: &SamplerConfig,
    rng: &mut Substream,
    record: bool,
) -> Result<SampleOutput, SamplerError> {
    let sched = DdpmSchedule::linear(cfg.t_steps, cfg.beta_1, cfg.beta_t)?;
    let big_t = sched.len();
    let mut x = rng.normal_vec(den.dim());
    let mut traj = Trajectory::maybe(record);
    if let Some(tr) = traj.as_mut() {
        tr.push(sched.ve_sigma(big_t), &x);
    }
    for t in (1..=big_t).rev() {
        let (d, eps) = predict(den, &sched, &x, t)?;
        if let Some(tr) = traj.as_mut() {
            tr.annotate(&d);
        }
        let alpha = sched.alpha(t);
        let coef = (1.0 - alpha) / (1.0 - sched.alpha_bars[t]).sqrt();
        let inv = 1.0 / alpha.sqrt();
        let mut next: Vec<f64> = x.iter().zip(&eps).map(|(xv, e)| inv * (xv - coef * e)).collect();
        if t > 1 {
            let std = sched.ancestral_variance(t, cfg.ddpm_variance).sqrt();
            for v in next.iter_mut() {
                *v += std * rng.normal();
            }
        }
        ensure_finite(&next, big_t - t + 1, sched.ve_sigma(t - 1))?;
        x = next;
        if let Some(tr) = traj.as_mut() {
            tr.push(sched.ve_sigma(t - 1), &x);
        }
    }
    Ok(SampleOutput { state: x, trajectory: traj })
}

/// DDIM over a uniformly strided subset of `{1..T}`. With `eta = 0` no
/// randomness is consumed after the initial state.
pub fn ddim_sample(
    den: &dyn DenoiseFn,
    cfg: &SamplerConfig,
    rng: &mut Substream,
    record: bool,
) -> Result<SampleOutput, SamplerError> {
    let sched = DdpmSchedule::linear(cfg.t_steps, cfg.beta_1, cfg.beta_t)?;
    let steps = ddim_timesteps(cfg.t_steps, cfg.n_steps)?;
    let mut x = rng.normal_vec(den.dim());
    let mut traj = Trajectory::maybe(record);
    let first = *steps.last().expect("non-empty subset");
    if let Some(tr) = traj.as_mut() {
        tr.push(sched.ve_sigma(first), &x);
    }
    for j in (0..steps.len()).rev() {
        let t = steps[j];
        let prev = if j == 0 { 0 } else { steps[j - 1] };
        let (d, eps) = predict(den, &sched, &x, t)?;
        if let Some(tr) = traj.as_mut() {
            tr.annotate(&d);
        }
        let ab_p = sched.alpha_bars[prev];
        let var = sched.ddim_variance(t, prev, cfg.eta);
        let dir = (1.0 - ab_p - var).max(0.0).sqrt();
        let mut next: Vec<f64> =
            d.iter().zip(&eps).map(|(dv, e)| ab_p.sqrt() * dv + dir * e).collect();
        if cfg.eta > 0.0 && var > 0.0 {
            let std = var.sqrt();
            for v in next.iter_mut() {
                *v += std * rng.normal();
            }
        }
        ensure_finite(&next, steps.len() - j, sched.ve_sigma(prev))?;
        x = next;
        if let Some(tr) = traj.as_mut() {
            tr.push(sched.ve_sigma(prev), &x);
        }
    }
    Ok(SampleOutput { state: x, trajectory: traj })
}
