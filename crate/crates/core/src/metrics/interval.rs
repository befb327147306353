use statrs::function::beta::checked_beta_reg;

use super::MetricsError;

const TOL: f64 = 1e-10;

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> Result<f64, MetricsError> {
    checked_beta_reg(a, b, x).map_err(|e| MetricsError::InvalidArguments(e.to_string()))
}

/// Solves `I_p(a, b) = target` for `p` by bisection; `I_p` is increasing in `p`.
fn inverse_beta(a: f64, b: f64, target: f64) -> Result<f64, MetricsError> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > TOL {
        let mid = 0.5 * (lo + hi);
        if regularized_beta(a, b, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Exact two-sided `1 - alpha` interval for a binomial proportion with `k`
/// successes out of `n`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> Result<(f64, f64), MetricsError> {
    if n == 0 || k > n || !(alpha > 0.0 && alpha < 1.0) {
        return Err(MetricsError::InvalidArguments(format!("k={k}, n={n}, alpha={alpha}")));
    }
    let (kf, nf) = (k as f64, n as f64);
    let lower = if k == 0 { 0.0 } else { inverse_beta(kf, nf - kf + 1.0, alpha / 2.0)? };
    let upper = if k == n { 1.0 } else { inverse_beta(kf + 1.0, nf - kf, 1.0 - alpha / 2.0)? };
    // Bisection leaves up to TOL of slack; keep the point estimate inside.
    let p = kf / nf;
    Ok((lower.min(p), upper.max(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes_closed_form() {
        let (lo, hi) = clopper_pearson(0, 10, 0.05).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
        assert!((hi - 0.3085).abs() < 1e-4);
        let (lo, hi) = clopper_pearson(10, 10, 0.05).unwrap();
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(clopper_pearson(0, 0, 0.05).is_err());
        assert!(clopper_pearson(3, 2, 0.05).is_err());
        assert!(clopper_pearson(1, 2, 0.0).is_err());
        assert!(clopper_pearson(1, 2, 1.0).is_err());
    }
}
