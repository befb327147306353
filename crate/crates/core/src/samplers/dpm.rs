use super::{ensure_finite, karras_schedule, DenoiseFn, SampleOutput, SamplerConfig, SamplerError, Trajectory};
use crate::rng::Substream;

/// First-order exponential integrator of the probability-flow ODE on the
/// Karras schedule. Only the initial state consumes randomness.
pub fn dpm_solver_1(
    den: &dyn DenoiseFn,
    cfg: &SamplerConfig,
    rng: &mut Substream,
    record: bool,
) -> Result<SampleOutput, SamplerError> {
    let sigmas = karras_schedule(&cfg.karras())?;
    let mut x: Vec<f64> = rng.normal_vec(den.dim()).into_iter().map(|e| e * sigmas[0]).collect();
    let mut traj = Trajectory::maybe(record);
    if let Some(t) = traj.as_mut() {
        t.push(sigmas[0], &x);
    }
    for i in 0..cfg.n_steps {
        let (s_cur, s_next) = (sigmas[i], sigmas[i + 1]);
        let d = den.denoise(&x, s_cur)?;
        if let Some(t) = traj.as_mut() {
            t.annotate(&d);
        }
        let next = if s_next == 0.0 {
            d
        } else {
            let r = s_next / s_cur;
            x.iter().zip(&d).map(|(xv, dv)| r * xv + (1.0 - r) * dv).collect()
        };
        ensure_finite(&next, i + 1, s_next)?;
        x = next;
        if let Some(t) = traj.as_mut() {
            t.push(s_next, &x);
        }
    }
    Ok(SampleOutput { state: x, trajectory: traj })
}
