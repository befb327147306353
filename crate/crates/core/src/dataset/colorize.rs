use rayon::prelude::*;

use super::{BiasedDataset, DatasetError, DatasetKind, GrayImage, LabeledSample, Palette, RgbImage};
use crate::rng::Substream;

const LEFT_AXIS: u64 = 1;
const RIGHT_AXIS: u64 = 2;

/// Number of columns assigned to the left half. The middle column of an
/// odd-width image goes to the left.
pub fn left_columns(width: usize) -> usize {
    width.div_ceil(2)
}

fn check_ratio(rho: f64) -> Result<(), DatasetError> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(DatasetError::InvalidRatio(rho))
    }
}

fn check_inputs(gray: &[GrayImage], labels: &[u8], palettes: &[&Palette]) -> Result<(), DatasetError> {
    if gray.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    if gray.len() != labels.len() {
        return Err(DatasetError::ShapeMismatch(format!(
            "{} images but {} labels",
            gray.len(),
            labels.len()
        )));
    }
    let (w, h) = (gray[0].width, gray[0].height);
    if gray.iter().any(|g| g.width != w || g.height != h) {
        return Err(DatasetError::ShapeMismatch("images differ in size".into()));
    }
    for &l in labels {
        for p in palettes {
            if p.position(l).is_none() {
                return Err(DatasetError::ClassNotInPalette(l));
            }
        }
    }
    Ok(())
}

/// Draws the background class for one sample: the target's own colour with
/// probability `rho`, otherwise one of the remaining palette colours
/// uniformly.
fn draw_bias(target: u8, rho: f64, palette: &Palette, rng: &mut Substream) -> (u8, bool) {
    let own = palette.position(target).expect("checked");
    if palette.len() == 1 || rng.bernoulli(rho) {
        return (target, true);
    }
    let mut pick = rng.below(palette.len() - 1);
    if pick >= own {
        pick += 1;
    }
    (palette.entries()[pick].class, false)
}

fn blend(intensity: f32, bg: [f32; 3]) -> [f32; 3] {
    bg.map(|c| intensity + (1.0 - intensity) * c)
}

/// Single-background colourisation: every pixel is blended between white
/// (stroke) and the drawn background colour.
pub fn colorize_biased_mnist(
    gray: &[GrayImage],
    labels: &[u8],
    rho: f64,
    palette: &Palette,
    seed: u64,
) -> Result<BiasedDataset, DatasetError> {
    check_ratio(rho)?;
    check_inputs(gray, labels, &[palette])?;
    let samples: Vec<LabeledSample> = gray
        .par_iter()
        .zip(labels.par_iter())
        .enumerate()
        .map(|(i, (g, &target))| {
            let mut rng = Substream::new(seed, &[LEFT_AXIS, i as u64]);
            let (bias, aligned) = draw_bias(target, rho, palette, &mut rng);
            let bg = palette.get(bias).expect("drawn from palette").unit_rgb();
            let data = g.data.iter().flat_map(|&v| blend(v, bg)).collect();
            LabeledSample {
                image: RgbImage { width: g.width, height: g.height, data },
                target,
                bias: vec![bias],
                aligned: vec![aligned],
            }
        })
        .collect();
    let mut ds = BiasedDataset {
        kind: DatasetKind::Biased,
        samples,
        rho_requested: vec![rho],
        rho_dataset: vec![],
        palettes: vec![palette.clone()],
        seed,
    };
    ds.rho_dataset = ds.empirical_rho();
    Ok(ds)
}

/// Two-background colourisation with independent left/right alignment draws.
#[allow(clippy::too_many_arguments)]
pub fn colorize_multicolor_mnist(
    gray: &[GrayImage],
    labels: &[u8],
    rho_left: f64,
    rho_right: f64,
    left_palette: &Palette,
    right_palette: &Palette,
    seed: u64,
) -> Result<BiasedDataset, DatasetError> {
    check_ratio(rho_left)?;
    check_ratio(rho_right)?;
    check_inputs(gray, labels, &[left_palette, right_palette])?;
    let samples: Vec<LabeledSample> = gray
        .par_iter()
        .zip(labels.par_iter())
        .enumerate()
        .map(|(i, (g, &target))| {
            let mut lrng = Substream::new(seed, &[LEFT_AXIS, i as u64]);
            let mut rrng = Substream::new(seed, &[RIGHT_AXIS, i as u64]);
            let (lb, la) = draw_bias(target, rho_left, left_palette, &mut lrng);
            let (rb, ra) = draw_bias(target, rho_right, right_palette, &mut rrng);
            let lbg = left_palette.get(lb).expect("drawn").unit_rgb();
            let rbg = right_palette.get(rb).expect("drawn").unit_rgb();
            let split = left_columns(g.width);
            let mut data = Vec::with_capacity(g.data.len() * 3);
            for r in 0..g.height {
                for c in 0..g.width {
                    let bg = if c < split { lbg } else { rbg };
                    data.extend(blend(g.get(r, c), bg));
                }
            }
            LabeledSample {
                image: RgbImage { width: g.width, height: g.height, data },
                target,
                bias: vec![lb, rb],
                aligned: vec![la, ra],
            }
        })
        .collect();
    let mut ds = BiasedDataset {
        kind: DatasetKind::MultiColor,
        samples,
        rho_requested: vec![rho_left, rho_right],
        rho_dataset: vec![],
        palettes: vec![left_palette.clone(), right_palette.clone()],
        seed,
    };
    ds.rho_dataset = ds.empirical_rho();
    Ok(ds)
}

/// Keeps only samples whose target is in `classes`; palettes are restricted
/// to those classes and the aligned fraction is recomputed.
pub fn subset_classes(dataset: &BiasedDataset, classes: &[u8]) -> Result<BiasedDataset, DatasetError> {
    if classes.is_empty() {
        return Err(DatasetError::EmptyResult);
    }
    let palettes = dataset
        .palettes
        .iter()
        .map(|p| p.restrict(classes))
        .collect::<Result<Vec<_>, _>>()?;
    let samples: Vec<LabeledSample> = dataset
        .samples
        .iter()
        .filter(|s| classes.contains(&s.target))
        .cloned()
        .collect();
    if samples.is_empty() {
        return Err(DatasetError::EmptyResult);
    }
    let mut out = BiasedDataset {
        kind: dataset.kind,
        samples,
        rho_requested: dataset.rho_requested.clone(),
        rho_dataset: vec![],
        palettes,
        seed: dataset.seed,
    };
    out.rho_dataset = out.empirical_rho();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic_digits;

    fn digits(per_class: usize) -> (Vec<GrayImage>, Vec<u8>) {
        synthetic_digits(per_class, &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9], 5)
    }

    #[test]
    fn fully_aligned_uses_class_colour() {
        let (g, l) = digits(3);
        let ds = colorize_biased_mnist(&g, &l, 1.0, &Palette::biased_mnist(), 1).unwrap();
        for s in ds.samples.iter().filter(|s| s.target == 0) {
            assert_eq!(s.bias, vec![0]);
            // A background pixel is pure red.
            let bg = s.image.pixel(0, 0);
            assert_eq!(bg, [1.0, 0.0, 0.0]);
        }
        assert_eq!(ds.rho_dataset, vec![1.0]);
    }

    #[test]
    fn zero_ratio_never_aligned() {
        let (g, l) = digits(20);
        let ds = colorize_biased_mnist(&g, &l, 0.0, &Palette::biased_mnist(), 2).unwrap();
        assert!(ds.samples.iter().all(|s| s.bias[0] != s.target && !s.aligned[0]));
    }

    #[test]
    fn blend_endpoints_exact() {
        let (g, l) = digits(2);
        let ds = colorize_biased_mnist(&g, &l, 0.5, &Palette::biased_mnist(), 3).unwrap();
        for (s, gi) in ds.samples.iter().zip(&g) {
            let bg = ds.palettes[0].get(s.bias[0]).unwrap().unit_rgb();
            for r in 0..gi.height {
                for c in 0..gi.width {
                    let px = s.image.pixel(r, c);
                    match gi.get(r, c) {
                        v if v == 1.0 => assert_eq!(px, [1.0; 3]),
                        v if v == 0.0 => assert_eq!(px, bg),
                        _ => assert!(px.iter().all(|v| (0.0..=1.0).contains(v))),
                    }
                }
            }
        }
    }

    #[test]
    fn errors() {
        let p = Palette::biased_mnist();
        assert!(matches!(colorize_biased_mnist(&[], &[], 0.5, &p, 0), Err(DatasetError::EmptyInput)));
        let (g, _) = digits(1);
        let bad = vec![11u8; g.len()];
        assert!(matches!(
            colorize_biased_mnist(&g, &bad, 0.5, &p, 0),
            Err(DatasetError::ClassNotInPalette(11))
        ));
        let (g, l) = digits(1);
        assert!(matches!(colorize_biased_mnist(&g, &l, 1.5, &p, 0), Err(DatasetError::InvalidRatio(_))));
    }

    #[test]
    fn multicolor_halves() {
        let (g, l) = synthetic_digits(4, &[0], 9);
        let ds = colorize_multicolor_mnist(
            &g,
            &l,
            1.0,
            1.0,
            &Palette::multicolor_left(),
            &Palette::multicolor_right(),
            4,
        )
        .unwrap();
        for s in &ds.samples {
            assert_eq!(s.image.pixel(0, 0), Palette::multicolor_left().get(0).unwrap().unit_rgb());
            assert_eq!(s.image.pixel(0, 27), Palette::multicolor_right().get(0).unwrap().unit_rgb());
            assert_eq!(s.aligned, vec![true, true]);
        }
    }

    #[test]
    fn multicolor_one_sided() {
        let (g, l) = digits(5);
        let ds = colorize_multicolor_mnist(
            &g,
            &l,
            1.0,
            0.0,
            &Palette::multicolor_left(),
            &Palette::multicolor_right(),
            4,
        )
        .unwrap();
        assert!(ds.samples.iter().all(|s| s.aligned == vec![true, false]));
        assert_eq!(ds.rho_dataset, vec![1.0, 0.0]);
    }

    #[test]
    fn odd_width_middle_column_goes_left() {
        assert_eq!(left_columns(5), 3);
        assert_eq!(left_columns(4), 2);
        let g = vec![GrayImage { width: 3, height: 1, data: vec![0.0; 3] }];
        let ds = colorize_multicolor_mnist(
            &g,
            &[0],
            1.0,
            1.0,
            &Palette::multicolor_left(),
            &Palette::multicolor_right(),
            0,
        )
        .unwrap();
        let left = Palette::multicolor_left().get(0).unwrap().unit_rgb();
        assert_eq!(ds.samples[0].image.pixel(0, 1), left);
    }

    #[test]
    fn subset() {
        let (g, l) = digits(3);
        let ds = colorize_biased_mnist(&g, &l, 0.9, &Palette::biased_mnist(), 1).unwrap();
        let two = subset_classes(&ds, &[0, 1]).unwrap();
        assert!(two.samples.iter().all(|s| s.target <= 1));
        assert_eq!(two.palettes[0].classes(), vec![0, 1]);
        let all = subset_classes(&ds, &ds.classes()).unwrap();
        assert_eq!(all, ds);
        let single = colorize_biased_mnist(&g[..1], &l[..1], 0.9, &Palette::biased_mnist(), 1).unwrap();
        assert!(matches!(subset_classes(&single, &[5]), Err(DatasetError::EmptyResult)));
        assert!(matches!(subset_classes(&ds, &[]), Err(DatasetError::EmptyResult)));
    }
}
