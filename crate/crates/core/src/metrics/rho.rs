use serde::{Deserialize, Serialize};

use super::{clopper_pearson, MetricsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub k: u64,
    pub n: u64,
    pub rho_hat: f64,
    pub alpha: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl RhoEstimate {
    pub fn from_counts(k: u64, n: u64, alpha: f64) -> Result<Self, MetricsError> {
        if n == 0 {
            return Err(MetricsError::EmptyInput);
        }
        let (ci_lower, ci_upper) = clopper_pearson(k, n, alpha)?;
        Ok(Self { k, n, rho_hat: k as f64 / n as f64, alpha, ci_lower, ci_upper })
    }

    /// Whether the two confidence intervals share at least one point.
    pub fn overlaps(&self, other: &RhoEstimate) -> bool {
        self.ci_lower <= other.ci_upper && other.ci_lower <= self.ci_upper
    }
}

/// Fraction of aligned verdicts with its Clopper-Pearson interval.
pub fn estimate_rho(verdicts: &[bool], alpha: f64) -> Result<RhoEstimate, MetricsError> {
    let k = verdicts.iter().filter(|&&v| v).count() as u64;
    RhoEstimate::from_counts(k, verdicts.len() as u64, alpha)
}

/// Pooled estimate over `K` classes with equal sample counts.
pub fn estimate_rho_multi(per_class: &[Vec<bool>], alpha: f64) -> Result<RhoEstimate, MetricsError> {
    let first = per_class.first().ok_or(MetricsError::EmptyInput)?;
    if per_class.iter().any(|v| v.len() != first.len()) {
        return Err(MetricsError::RaggedInput);
    }
    let k = per_class.iter().flatten().filter(|&&v| v).count() as u64;
    RhoEstimate::from_counts(k, (first.len() * per_class.len()) as u64, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_counts() {
        let e = estimate_rho(&[true, true, false, true], 0.05).unwrap();
        assert_eq!((e.k, e.n, e.rho_hat), (3, 4, 0.75));
        let e = estimate_rho(&[false; 10], 0.05).unwrap();
        assert_eq!((e.rho_hat, e.ci_lower), (0.0, 0.0));
        assert!(matches!(estimate_rho(&[], 0.05), Err(MetricsError::EmptyInput)));
    }

    #[test]
    fn multi_class() {
        let e = estimate_rho_multi(&[vec![true, false], vec![true, true]], 0.05).unwrap();
        assert_eq!(e.rho_hat, 0.75);
        let flat = estimate_rho(&[true, false, true, true], 0.05).unwrap();
        assert_eq!(e, flat);
        assert!(matches!(
            estimate_rho_multi(&[vec![true], vec![true, false]], 0.05),
            Err(MetricsError::RaggedInput)
        ));
        assert!(matches!(estimate_rho_multi(&[], 0.05), Err(MetricsError::EmptyInput)));
        assert!(matches!(estimate_rho_multi(&[vec![], vec![]], 0.05), Err(MetricsError::EmptyInput)));
    }
}
