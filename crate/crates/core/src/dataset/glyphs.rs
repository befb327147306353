//! Procedural handwritten-style digits.
//!
//! Stand-in source of 28x28 grey digits for environments without the MNIST
//! files. Each digit is drawn from seven-segment strokes with per-sample
//! jitter in scale, slant, position, stroke width and endpoint placement, and
//! rendered with anti-aliased edges so that intensities span `[0, 1]`.

use super::GrayImage;
use crate::rng::Substream;

const SIZE: usize = 28;

// Segment endpoints in a unit box (x right, y down).
const SEGMENTS: [[(f64, f64); 2]; 7] = [
    [(0.0, 0.0), (1.0, 0.0)], // a: top
    [(1.0, 0.0), (1.0, 0.5)], // b: upper right
    [(1.0, 0.5), (1.0, 1.0)], // c: lower right
    [(0.0, 1.0), (1.0, 1.0)], // d: bottom
    [(0.0, 0.5), (0.0, 1.0)], // e: lower left
    [(0.0, 0.0), (0.0, 0.5)], // f: upper left
    [(0.0, 0.5), (1.0, 0.5)], // g: middle
];

const DIGITS: [&[usize]; 10] = [
    &[0, 1, 2, 3, 4, 5],
    &[1, 2],
    &[0, 1, 6, 4, 3],
    &[0, 1, 6, 2, 3],
    &[5, 6, 1, 2],
    &[0, 5, 6, 2, 3],
    &[0, 5, 4, 3, 2, 6],
    &[0, 1, 2],
    &[0, 1, 2, 3, 4, 5, 6],
    &[0, 1, 2, 3, 5, 6],
];

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

fn render(digit: u8, rng: &mut Substream) -> GrayImage {
    let width = 9.0 + 3.0 * rng.uniform();
    let height = 15.0 + 4.0 * rng.uniform();
    let slant = 0.3 * (rng.uniform() - 0.5);
    let cx = 14.0 + 3.0 * (rng.uniform() - 0.5);
    let cy = 14.0 + 3.0 * (rng.uniform() - 0.5);
    let half_stroke = 0.9 + 0.6 * rng.uniform();

    let mut jitter = || 0.8 * (rng.uniform() - 0.5);
    let strokes: Vec<[(f64, f64); 2]> = DIGITS[usize::from(digit % 10)]
        .iter()
        .map(|&s| {
            SEGMENTS[s].map(|(u, v)| {
                let y = cy + (v - 0.5) * height;
                let x = cx + (u - 0.5) * width - slant * (y - cy);
                (x + jitter(), y + jitter())
            })
        })
        .collect();

    let mut data = Vec::with_capacity(SIZE * SIZE);
    for r in 0..SIZE {
        for c in 0..SIZE {
            let p = (c as f64 + 0.5, r as f64 + 0.5);
            let d = strokes
                .iter()
                .map(|s| segment_distance(p, s[0], s[1]))
                .fold(f64::INFINITY, f64::min);
            // Quantise through 8 bits like the MNIST source.
            let v = (half_stroke + 0.5 - d).clamp(0.0, 1.0);
            data.push((v * 255.0).round() as f32 / 255.0);
        }
    }
    GrayImage { width: SIZE, height: SIZE, data }
}

/// Generates `per_class` digits for every listed class, interleaved by class
/// (`c0, c1, ..., c0, c1, ...`). Deterministic in `seed`.
pub fn synthetic_digits(per_class: usize, classes: &[u8], seed: u64) -> (Vec<GrayImage>, Vec<u8>) {
    let mut images = Vec::with_capacity(per_class * classes.len());
    let mut labels = Vec::with_capacity(per_class * classes.len());
    for i in 0..per_class {
        for &class in classes {
            let mut rng = Substream::new(seed, &[0x6c79_7068, u64::from(class), i as u64]);
            images.push(render(class, &mut rng));
            labels.push(class);
        }
    }
    (images, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let (a, la) = synthetic_digits(3, &[0, 1, 7], 11);
        let (b, lb) = synthetic_digits(3, &[0, 1, 7], 11);
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(la, vec![0, 1, 7, 0, 1, 7, 0, 1, 7]);
        for img in &a {
            assert!(img.data.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(img.data.iter().any(|&v| v == 1.0));
            assert!(img.data.iter().any(|&v| v == 0.0));
        }
    }

    #[test]
    fn samples_differ_within_class() {
        let (a, _) = synthetic_digits(2, &[8], 3);
        assert_ne!(a[0], a[1]);
    }
}
