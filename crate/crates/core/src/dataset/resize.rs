use serde::{Deserialize, Serialize};

use super::GrayImage;

/// Working resolution: mean-pool by `pool`, then centre pad/crop to `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub pool: usize,
    pub size: usize,
}

impl Resolution {
    /// 28x28 pooled to 14x14 and padded to 16x16.
    pub const SMALL: Resolution = Resolution { pool: 2, size: 16 };
    /// 28x28 padded to 32x32.
    pub const FULL: Resolution = Resolution { pool: 1, size: 32 };

    pub fn from_size(size: usize) -> Self {
        if size <= 16 {
            Resolution { pool: 2, size }
        } else {
            Resolution { pool: 1, size }
        }
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::SMALL
    }
}

fn mean_pool(img: &GrayImage, factor: usize) -> GrayImage {
    if factor <= 1 {
        return img.clone();
    }
    let (w, h) = (img.width / factor, img.height / factor);
    let norm = (factor * factor) as f32;
    let mut data = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0f32;
            for dr in 0..factor {
                for dc in 0..factor {
                    acc += img.get(r * factor + dr, c * factor + dc);
                }
            }
            data.push(acc / norm);
        }
    }
    GrayImage { width: w, height: h, data }
}

fn center_fit(img: &GrayImage, size: usize) -> GrayImage {
    let mut data = vec![0.0f32; size * size];
    // Signed offsets: positive pads, negative crops.
    let off_r = (size as isize - img.height as isize) / 2;
    let off_c = (size as isize - img.width as isize) / 2;
    for r in 0..size {
        for c in 0..size {
            let sr = r as isize - off_r;
            let sc = c as isize - off_c;
            if sr >= 0 && sc >= 0 && (sr as usize) < img.height && (sc as usize) < img.width {
                data[r * size + c] = img.get(sr as usize, sc as usize);
            }
        }
    }
    GrayImage { width: size, height: size, data }
}

pub fn prepare_gray(images: &[GrayImage], res: Resolution) -> Vec<GrayImage> {
    images
        .iter()
        .map(|img| center_fit(&mean_pool(img, res.pool), res.size))
        .collect()
}
