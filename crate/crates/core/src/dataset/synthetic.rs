use serde::{Deserialize, Serialize};

use super::{colorize_biased_mnist, prepare_gray, synthetic_digits, BiasedDataset, DatasetError, Palette, Resolution};

fn default_size() -> usize {
    16
}

/// Recipe for a Biased-MNIST-style dataset built from procedural digits, for
/// use when no IDX files are at hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticBiasedSpec {
    pub per_class: usize,
    pub classes: Vec<u8>,
    pub rho: f64,
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticBiasedSpec {
    pub fn build(&self) -> Result<BiasedDataset, DatasetError> {
        if self.per_class == 0 || self.classes.is_empty() {
            return Err(DatasetError::EmptyInput);
        }
        let palette = Palette::biased_mnist().restrict(&self.classes)?;
        let (gray, labels) = synthetic_digits(self.per_class, &self.classes, self.seed);
        let gray = prepare_gray(&gray, Resolution::from_size(self.size));
        colorize_biased_mnist(&gray, &labels, self.rho, &palette, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_two_class_set() {
        let spec = SyntheticBiasedSpec { per_class: 20, classes: vec![0, 1], rho: 0.9, size: 16, seed: 3 };
        let ds = spec.build().unwrap();
        assert_eq!(ds.len(), 40);
        assert_eq!(ds.image_shape(), (16, 16));
        assert_eq!(ds.classes(), vec![0, 1]);
        assert_eq!(ds.palettes[0].len(), 2);
        assert_eq!(spec.build().unwrap(), ds);
    }
}
