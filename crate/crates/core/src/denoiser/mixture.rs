use serde::{Deserialize, Serialize};

use super::kernel::{posterior, Component};
use super::{check_call, Condition, Denoiser, DenoiserError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    /// Weight within the component's class; weights of a class sum to 1.
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Isotropic standard deviation; zero gives a point mass.
    pub stddev: f64,
    #[serde(default)]
    pub class: usize,
}

/// JSON document describing an analytic Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub components: Vec<MixtureComponent>,
    /// p(y); uniform over the classes present when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_priors: Option<Vec<f64>>,
}

/// Analytic mixture backend. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<MixtureComponent>,
    by_class: Vec<Vec<usize>>,
    priors: Vec<f64>,
}

const WEIGHT_TOL: f64 = 1e-9;

impl GaussianMixture {
    pub fn new(spec: GaussianMixtureSpec) -> Result<Self, DenoiserError> {
        let invalid = |m: String| DenoiserError::InvalidSpec(m);
        let first = spec.components.first().ok_or_else(|| invalid("no components".into()))?;
        let dim = first.mean.len();
        if dim == 0 {
            return Err(invalid("zero-dimensional mean".into()));
        }
        let num_classes = spec.components.iter().map(|c| c.class).max().unwrap_or(0) + 1;
        let mut by_class = vec![Vec::new(); num_classes];
        for (i, c) in spec.components.iter().enumerate() {
            if c.mean.len() != dim {
                return Err(DenoiserError::DimensionMismatch { expected: dim, actual: c.mean.len() });
            }
            if !(c.weight >= 0.0 && c.weight.is_finite()) || !(c.stddev >= 0.0 && c.stddev.is_finite()) {
                return Err(invalid(format!("component {i} has a negative or non-finite parameter")));
            }
            by_class[c.class].push(i);
        }
        for (y, idx) in by_class.iter().enumerate() {
            if idx.is_empty() {
                return Err(DenoiserError::EmptyConditioningSet(y));
            }
            let total: f64 = idx.iter().map(|&i| spec.components[i].weight).sum();
            if (total - 1.0).abs() > WEIGHT_TOL {
                return Err(invalid(format!("weights of class {y} sum to {total}")));
            }
        }
        let priors = match spec.class_priors {
            Some(p) => {
                if p.len() != num_classes {
                    return Err(invalid(format!("{} priors for {num_classes} classes", p.len())));
                }
                if p.iter().any(|&v| !(v >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL {
                    return Err(invalid("class priors must be a probability vector".into()));
                }
                p
            }
            None => vec![1.0 / num_classes as f64; num_classes],
        };
        Ok(Self { dim, components: spec.components, by_class, priors })
    }

    pub fn from_json(text: &str) -> Result<Self, DenoiserError> {
        let spec: GaussianMixtureSpec =
            serde_json::from_str(text).map_err(|e| DenoiserError::InvalidSpec(e.to_string()))?;
        Self::new(spec)
    }

    /// Single isotropic Gaussian N(mean, stddev^2 I).
    pub fn single(mean: Vec<f64>, stddev: f64) -> Self {
        Self::new(GaussianMixtureSpec {
            components: vec![MixtureComponent { weight: 1.0, mean, stddev, class: 0 }],
            class_priors: None,
        })
        .expect("valid single component")
    }

    fn components_for(&self, cond: Condition) -> Result<Vec<Component<'_>>, DenoiserError> {
        let pick = |i: usize, extra: f64| {
            let c = &self.components[i];
            Component { log_weight: (c.weight * extra).ln(), mean: &c.mean, var: c.stddev * c.stddev }
        };
        match cond {
            Condition::Class(y) => {
                let idx = self.by_class.get(y).ok_or(DenoiserError::UnknownClass(y))?;
                Ok(idx.iter().map(|&i| pick(i, 1.0)).collect())
            }
            Condition::Unconditional => Ok(self
                .by_class
                .iter()
                .enumerate()
                .flat_map(|(y, idx)| idx.iter().map(move |&i| (i, y)))
                .map(|(i, y)| pick(i, self.priors[y]))
                .collect()),
        }
    }
}

impl Denoiser for GaussianMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.by_class.len()
    }

    fn class_priors(&self) -> &[f64] {
        &self.priors
    }

    fn denoise(&self, x: &[f64], sigma: f64, cond: Condition) -> Result<Vec<f64>, DenoiserError> {
        check_call(self.dim, x, sigma)?;
        posterior(x, sigma, self.components_for(cond)?)
            .map(|p| p.mean)
            .ok_or(DenoiserError::EmptyConditioningSet(match cond {
                Condition::Class(y) => y,
                Condition::Unconditional => usize::MAX,
            }))
    }

    fn log_density(&self, x: &[f64], sigma: f64, cond: Condition) -> Result<f64, DenoiserError> {
        check_call(self.dim, x, sigma)?;
        Ok(posterior(x, sigma, self.components_for(cond)?)
            .map(|p| p.log_density)
            .unwrap_or(f64::NEG_INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_gaussian() {
        let g = GaussianMixture::single(vec![0.0], 1.0);
        let d = g.denoise(&[2.0], 1.0, Condition::Class(0)).unwrap();
        assert_eq!(d, vec![1.0]);
    }

    #[test]
    fn json_spec() {
        let g = GaussianMixture::from_json(
            r#"{"components":[
                {"weight":0.9,"mean":[1.0],"stddev":0.05},
                {"weight":0.1,"mean":[-1.0],"stddev":0.05}]}"#,
        )
        .unwrap();
        assert_eq!(g.num_classes(), 1);
        assert_eq!(g.class_priors(), &[1.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GaussianMixture::from_json(r#"{"components":[]}"#).is_err());
        assert!(matches!(
            GaussianMixture::from_json(
                r#"{"components":[{"weight":0.5,"mean":[0.0],"stddev":1.0}]}"#
            ),
            Err(DenoiserError::InvalidSpec(_))
        ));
        assert!(matches!(
            GaussianMixture::from_json(
                r#"{"components":[{"weight":1.0,"mean":[0.0],"stddev":1.0,"class":1}]}"#
            ),
            Err(DenoiserError::EmptyConditioningSet(0))
        ));
    }

    #[test]
    fn call_errors() {
        let g = GaussianMixture::single(vec![0.0, 0.0], 1.0);
        assert!(matches!(
            g.denoise(&[0.0], 1.0, Condition::Class(0)),
            Err(DenoiserError::DimensionMismatch { expected: 2, actual: 1 })
        ));
        assert!(matches!(
            g.denoise(&[0.0, 0.0], 0.0, Condition::Class(0)),
            Err(DenoiserError::NonpositiveSigma(_))
        ));
        assert!(matches!(
            g.denoise(&[0.0, 0.0], 1.0, Condition::Class(3)),
            Err(DenoiserError::UnknownClass(3))
        ));
    }
}
