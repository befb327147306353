//! Posterior mean of an isotropic Gaussian mixture observed under additive
//! Gaussian noise. Shared by the analytic and the empirical backends.

use std::f64::consts::PI;

/// Log-weights this far below the maximum are treated as exactly zero.
pub(crate) const FLUSH_LOG: f64 = -700.0;

pub(crate) struct Component<'a> {
    pub log_weight: f64,
    pub mean: &'a [f64],
    /// Component variance s^2; zero for point masses.
    pub var: f64,
}

pub(crate) struct Posterior {
    pub mean: Vec<f64>,
    pub log_density: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

pub(crate) fn posterior<'a, I>(x: &[f64], sigma: f64, components: I) -> Option<Posterior>
where
    I: IntoIterator<Item = Component<'a>>,
{
    let s2 = sigma * sigma;
    let d = x.len() as f64;
    let comps: Vec<Component<'a>> = components.into_iter().collect();
    let logs: Vec<f64> = comps
        .iter()
        .map(|c| {
            let v = c.var + s2;
            c.log_weight - 0.5 * d * (2.0 * PI * v).ln() - sq_dist(x, c.mean) / (2.0 * v)
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let weights: Vec<f64> = logs
        .iter()
        .map(|&l| if l - max < FLUSH_LOG { 0.0 } else { (l - max).exp() })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut mean = vec![0.0; x.len()];
    for (c, &w) in comps.iter().zip(&weights) {
        if w == 0.0 {
            continue;
        }
        let r = w / z;
        if c.var == 0.0 {
            for (m, &mu) in mean.iter_mut().zip(c.mean) {
                *m += r * mu;
            }
        } else {
            let v = c.var + s2;
            for ((m, &mu), &xi) in mean.iter_mut().zip(c.mean).zip(x) {
                *m += r * (s2 * mu + c.var * xi) / v;
            }
        }
    }
    Some(Posterior { mean, log_density: max + z.ln() })
}
