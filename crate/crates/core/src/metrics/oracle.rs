use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::dataset::{left_columns, Palette, RgbImage};

/// Pixels whose smallest channel reaches this value count as white.
pub const DEFAULT_WHITE_THRESHOLD: f32 = 240.0 / 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    /// Class of the nearest palette colour.
    pub predicted: u8,
    pub aligned: bool,
}

fn mean_color(
    image: &RgbImage,
    cols: std::ops::Range<usize>,
    threshold: f32,
) -> Result<[f64; 3], MetricsError> {
    let mut acc = [0.0f64; 3];
    let mut count = 0usize;
    for row in 0..image.height {
        for col in cols.clone() {
            let px = image.pixel(row, col);
            if px.iter().cloned().fold(f32::INFINITY, f32::min) < threshold {
                for c in 0..3 {
                    acc[c] += px[c] as f64;
                }
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(MetricsError::AllPixelsWhite);
    }
    Ok(acc.map(|v| v / count as f64))
}

fn nearest(palette: &Palette, color: [f64; 3]) -> u8 {
    let mut best = (f64::INFINITY, 0u8);
    // Entries are sorted by class, so a strict comparison keeps the lowest class on ties.
    for e in palette.entries() {
        let d: f64 = e
            .unit_rgb()
            .iter()
            .zip(color)
            .map(|(p, c)| (*p as f64 - c).powi(2))
            .sum();
        if d < best.0 {
            best = (d, e.class);
        }
    }
    best.1
}

fn verdict(
    image: &RgbImage,
    cols: std::ops::Range<usize>,
    palette: &Palette,
    target: u8,
    threshold: f32,
) -> Result<OracleVerdict, MetricsError> {
    if palette.is_empty() {
        return Err(MetricsError::InvalidArguments("empty palette".into()));
    }
    let predicted = nearest(palette, mean_color(image, cols, threshold)?);
    Ok(OracleVerdict { predicted, aligned: predicted == target })
}

/// Nearest palette colour to the mean non-white pixel. A sample is aligned
/// when that colour belongs to its `target` class.
pub fn color_oracle(
    image: &RgbImage,
    palette: &Palette,
    target: u8,
    white_threshold: f32,
) -> Result<OracleVerdict, MetricsError> {
    if image.width == 0 || image.height == 0 {
        return Err(MetricsError::EmptyInput);
    }
    verdict(image, 0..image.width, palette, target, white_threshold)
}

/// Independent verdicts for the left and right halves of the image.
pub fn multicolor_oracle(
    image: &RgbImage,
    left: &Palette,
    right: &Palette,
    target: u8,
    white_threshold: f32,
) -> Result<(OracleVerdict, OracleVerdict), MetricsError> {
    if image.width < 2 || image.height == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let split = left_columns(image.width);
    Ok((
        verdict(image, 0..split, left, target, white_threshold)?,
        verdict(image, split..image.width, right, target, white_threshold)?,
    ))
}

/// One row of the per-sample verdict export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub sample_id: usize,
    pub target: u8,
    /// `None` when the sample had no non-white pixels and was excluded.
    pub predicted: Option<u8>,
    pub aligned: Option<bool>,
}

/// CSV with columns `sample_id,target,predicted_bias,aligned`; excluded
/// samples leave the last two fields empty.
pub fn verdicts_csv(records: &[VerdictRecord]) -> String {
    let mut out = String::from("sample_id,target,predicted_bias,aligned\n");
    for r in records {
        let p = r.predicted.map(|v| v.to_string()).unwrap_or_default();
        let a = r.aligned.map(|v| (v as u8).to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", r.sample_id, r.target, p, a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(v: [u8; 3]) -> [f32; 3] {
        v.map(|c| c as f32 / 255.0)
    }

    #[test]
    fn uniform_images() {
        let pal = Palette::biased_mnist();
        let red = RgbImage::filled(4, 4, rgb([255, 0, 0]));
        assert_eq!(color_oracle(&red, &pal, 0, DEFAULT_WHITE_THRESHOLD).unwrap().predicted, 0);
        let grey = RgbImage::filled(4, 4, rgb([128, 128, 128]));
        let v = color_oracle(&grey, &pal, 9, DEFAULT_WHITE_THRESHOLD).unwrap();
        assert_eq!(v, OracleVerdict { predicted: 9, aligned: true });
    }

    #[test]
    fn white_pixels_ignored() {
        let pal = Palette::biased_mnist();
        let mut img = RgbImage::filled(10, 1, rgb([0, 255, 0]));
        for c in 0..3 {
            img.set_pixel(0, c, [1.0; 3]);
        }
        assert_eq!(color_oracle(&img, &pal, 0, DEFAULT_WHITE_THRESHOLD).unwrap().predicted, 1);
        let white = RgbImage::filled(3, 3, [1.0; 3]);
        assert!(matches!(
            color_oracle(&white, &pal, 0, DEFAULT_WHITE_THRESHOLD),
            Err(MetricsError::AllPixelsWhite)
        ));
    }

    #[test]
    fn halves_are_independent() {
        let (l, r) = (Palette::multicolor_left(), Palette::multicolor_right());
        let mut img = RgbImage::filled(6, 2, rgb([250, 79, 42]));
        for row in 0..2 {
            for col in 3..6 {
                img.set_pixel(row, col, rgb([4, 175, 212]));
            }
        }
        let (a, b) = multicolor_oracle(&img, &l, &r, 0, DEFAULT_WHITE_THRESHOLD).unwrap();
        assert_eq!((a.predicted, b.predicted), (0, 0));
        for row in 0..2 {
            for col in 3..6 {
                img.set_pixel(row, col, [0.3 * row as f32, 0.1 * col as f32, 0.5]);
            }
        }
        let (a2, _) = multicolor_oracle(&img, &l, &r, 0, DEFAULT_WHITE_THRESHOLD).unwrap();
        assert_eq!(a2, a);
    }

    #[test]
    fn csv_export() {
        let recs = vec![
            VerdictRecord { sample_id: 0, target: 1, predicted: Some(1), aligned: Some(true) },
            VerdictRecord { sample_id: 1, target: 0, predicted: None, aligned: None },
        ];
        assert_eq!(verdicts_csv(&recs), "sample_id,target,predicted_bias,aligned\n0,1,1,1\n1,0,,\n");
    }
}
