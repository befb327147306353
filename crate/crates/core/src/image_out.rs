//! Contact sheets of sampler histories: one row per sample, one column per
//! recorded step. Written as binary PPM or PNG.

use std::path::Path;

use crate::dataset::DatasetError;

const GAP: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ContactSheet {
    pub width: usize,
    pub height: usize,
    /// Interleaved 8-bit RGB.
    pub pixels: Vec<u8>,
}

fn to_u8(v: f64) -> u8 {
    // States live in [-1, 1].
    (((v + 1.0) * 0.5).clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Tiles `rows[r][c]` (RGB states of `tile_w x tile_h`, or single-channel
/// states of `tile_w x tile_h` values) into one image with 1-pixel gaps.
pub fn contact_sheet(rows: &[Vec<Vec<f64>>], tile_w: usize, tile_h: usize) -> Result<ContactSheet, DatasetError> {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    if rows.is_empty() || cols == 0 || tile_w == 0 || tile_h == 0 {
        return Err(DatasetError::EmptyInput);
    }
    let width = cols * tile_w + (cols - 1) * GAP;
    let height = rows.len() * tile_h + (rows.len() - 1) * GAP;
    let mut pixels = vec![255u8; width * height * 3];
    let area = tile_w * tile_h;
    for (r, row) in rows.iter().enumerate() {
        for (c, state) in row.iter().enumerate() {
            let channels = match state.len() {
                n if n == area * 3 => 3,
                n if n == area => 1,
                n => {
                    return Err(DatasetError::ShapeMismatch(format!(
                        "state of {n} values does not fit a {tile_w}x{tile_h} tile"
                    )))
                }
            };
            let (ox, oy) = (c * (tile_w + GAP), r * (tile_h + GAP));
            for y in 0..tile_h {
                for x in 0..tile_w {
                    let dst = ((oy + y) * width + ox + x) * 3;
                    let src = (y * tile_w + x) * channels;
                    for ch in 0..3 {
                        pixels[dst + ch] = to_u8(state[src + ch.min(channels - 1)]);
                    }
                }
            }
        }
    }
    Ok(ContactSheet { width, height, pixels })
}

impl ContactSheet {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn to_png(&self) -> Result<Vec<u8>, DatasetError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc
                .write_header()
                .map_err(|e| DatasetError::ShapeMismatch(e.to_string()))?;
            w.write_image_data(&self.pixels)
                .map_err(|e| DatasetError::ShapeMismatch(e.to_string()))?;
        }
        Ok(out)
    }

    /// Writes PNG when the path ends in `.png`, PPM otherwise.
    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        let bytes = if is_png { self.to_png()? } else { self.to_ppm() };
        std::fs::write(path, bytes)
            .map_err(|source| DatasetError::IoFailure { path: path.display().to_string(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let tile = vec![-1.0; 2 * 2 * 3];
        let rows = vec![vec![tile.clone(); 3], vec![tile; 3]];
        let sheet = contact_sheet(&rows, 2, 2).unwrap();
        assert_eq!((sheet.width, sheet.height), (8, 5));
        assert_eq!(&sheet.pixels[..3], &[0, 0, 0]);
        // Gap column.
        assert_eq!(&sheet.pixels[6..9], &[255, 255, 255]);
        let ppm = sheet.to_ppm();
        assert!(ppm.starts_with(b"P6\n8 5\n255\n"));
        assert_eq!(ppm.len(), 11 + 8 * 5 * 3);
        assert_eq!(&sheet.to_png().unwrap()[..4], b"\x89PNG");
    }

    #[test]
    fn rejects_bad_tiles() {
        assert!(contact_sheet(&[], 2, 2).is_err());
        assert!(contact_sheet(&[vec![vec![0.0; 5]]], 2, 2).is_err());
    }
}
