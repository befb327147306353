use serde::{Deserialize, Serialize};

use super::DatasetError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub class: u8,
    pub rgb: [u8; 3],
    pub name: String,
}

impl PaletteEntry {
    /// Colour scaled to `[0, 1]`.
    pub fn unit_rgb(&self) -> [f32; 3] {
        self.rgb.map(|c| f32::from(c) / 255.0)
    }
}

/// Class-to-colour table. Entries are kept sorted by class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PaletteEntry>", into = "Vec<PaletteEntry>")]
pub struct Palette {
    entries: Vec<PaletteEntry>,
}

impl TryFrom<Vec<PaletteEntry>> for Palette {
    type Error = DatasetError;

    fn try_from(entries: Vec<PaletteEntry>) -> Result<Self, Self::Error> {
        Palette::new(entries)
    }
}

impl From<Palette> for Vec<PaletteEntry> {
    fn from(p: Palette) -> Self {
        p.entries
    }
}

fn table(rows: &[(u8, [u8; 3], &str)]) -> Palette {
    Palette {
        entries: rows
            .iter()
            .map(|&(class, rgb, name)| PaletteEntry { class, rgb, name: name.to_string() })
            .collect(),
    }
}

impl Palette {
    pub fn new(mut entries: Vec<PaletteEntry>) -> Result<Self, DatasetError> {
        if entries.is_empty() {
            return Err(DatasetError::InvalidPalette("no entries".into()));
        }
        entries.sort_by_key(|e| e.class);
        for pair in entries.windows(2) {
            if pair[0].class == pair[1].class {
                return Err(DatasetError::InvalidPalette(format!(
                    "class {} listed twice",
                    pair[0].class
                )));
            }
        }
        for (i, a) in entries.iter().enumerate() {
            if entries[i + 1..].iter().any(|b| b.rgb == a.rgb) {
                return Err(DatasetError::InvalidPalette(format!(
                    "colour {:?} used by more than one class",
                    a.rgb
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Background colours of Biased MNIST.
    pub fn biased_mnist() -> Self {
        table(&[
            (0, [255, 0, 0], "red"),
            (1, [0, 255, 0], "green"),
            (2, [0, 0, 255], "blue"),
            (3, [255, 255, 0], "yellow"),
            (4, [255, 0, 255], "magenta"),
            (5, [0, 255, 255], "cyan"),
            (6, [255, 128, 0], "orange"),
            (7, [255, 0, 128], "rose"),
            (8, [128, 0, 255], "electric violet"),
            (9, [128, 128, 128], "grey"),
        ])
    }

    /// Left-half background colours of Multi-Color MNIST.
    pub fn multicolor_left() -> Self {
        table(&[
            (0, [250, 79, 42], "left-0"),
            (1, [252, 233, 89], "left-1"),
            (2, [171, 117, 147], "left-2"),
            (3, [199, 212, 153], "left-3"),
            (4, [22, 198, 250], "left-4"),
            (5, [81, 245, 113], "left-5"),
            (6, [6, 60, 193], "left-6"),
            (7, [141, 25, 194], "left-7"),
            (8, [52, 100, 4], "left-8"),
            (9, [212, 51, 68], "left-9"),
        ])
    }

    /// Right-half background colours of Multi-Color MNIST.
    pub fn multicolor_right() -> Self {
        table(&[
            (0, [4, 175, 212], "right-0"),
            (1, [2, 21, 165], "right-1"),
            (2, [83, 137, 107], "right-2"),
            (3, [55, 42, 101], "right-3"),
            (4, [232, 56, 4], "right-4"),
            (5, [173, 9, 141], "right-5"),
            (6, [248, 194, 61], "right-6"),
            (7, [113, 229, 60], "right-7"),
            (8, [202, 154, 250], "right-8"),
            (9, [42, 203, 186], "right-9"),
        ])
    }

    pub fn entries(&self) -> &[PaletteEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn classes(&self) -> Vec<u8> {
        self.entries.iter().map(|e| e.class).collect()
    }

    pub fn position(&self, class: u8) -> Option<usize> {
        self.entries.binary_search_by_key(&class, |e| e.class).ok()
    }

    pub fn get(&self, class: u8) -> Option<&PaletteEntry> {
        self.position(class).map(|i| &self.entries[i])
    }

    /// Keeps only the listed classes.
    pub fn restrict(&self, classes: &[u8]) -> Result<Self, DatasetError> {
        for &c in classes {
            if self.position(c).is_none() {
                return Err(DatasetError::ClassNotInPalette(c));
            }
        }
        let entries = self
            .entries
            .iter()
            .filter(|e| classes.contains(&e.class))
            .cloned()
            .collect();
        Palette::new(entries)
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        serde_json::from_str(text).map_err(|e| DatasetError::InvalidPalette(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("palette serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_are_valid() {
        for p in [Palette::biased_mnist(), Palette::multicolor_left(), Palette::multicolor_right()] {
            assert_eq!(p.len(), 10);
            Palette::new(p.entries().to_vec()).unwrap();
        }
        assert_eq!(Palette::biased_mnist().get(0).unwrap().rgb, [255, 0, 0]);
        assert_eq!(Palette::biased_mnist().get(9).unwrap().rgb, [128, 128, 128]);
        assert_eq!(Palette::multicolor_left().get(0).unwrap().rgb, [250, 79, 42]);
        assert_eq!(Palette::multicolor_right().get(0).unwrap().rgb, [4, 175, 212]);
    }

    #[test]
    fn duplicate_colour_rejected() {
        let mut e = Palette::biased_mnist().entries().to_vec();
        e[1].rgb = e[0].rgb;
        assert!(matches!(Palette::new(e), Err(DatasetError::InvalidPalette(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = Palette::biased_mnist().restrict(&[0, 1]).unwrap();
        assert_eq!(Palette::from_json(&p.to_json()).unwrap(), p);
    }
}
