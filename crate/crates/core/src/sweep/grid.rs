use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{fmt_g17, SweepError};
use crate::denoiser::UncondMode;
use crate::rng::fnv1a64;
use crate::samplers::{SamplerConfig, Scheme};

/// Parameters that may be swept.
pub const AXIS_NAMES: &[&str] =
    &["eta", "n_steps", "s_churn", "s_tmax", "s_tmin", "scheme", "t_steps", "uncond_mode", "w"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Num(f64),
    Text(String),
}

impl AxisValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AxisValue::Num(v) => Some(*v),
            AxisValue::Text(_) => None,
        }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        match (self, other) {
            (AxisValue::Num(a), AxisValue::Num(b)) => a.total_cmp(b),
            (AxisValue::Num(_), AxisValue::Text(_)) => Ordering::Less,
            (AxisValue::Text(_), AxisValue::Num(_)) => Ordering::Greater,
            (AxisValue::Text(a), AxisValue::Text(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Num(v) => f.write_str(&fmt_g17(*v)),
            AxisValue::Text(s) => f.write_str(s),
        }
    }
}

/// One grid point: `(axis, value)` pairs sorted by axis name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell(pub Vec<(String, AxisValue)>);

impl Cell {
    pub fn get(&self, axis: &str) -> Option<&AxisValue> {
        self.0.iter().find(|(a, _)| a == axis).map(|(_, v)| v)
    }

    /// Stable stream key derived only from the cell's own coordinates.
    pub fn key(&self) -> u64 {
        fnv1a64(self.to_string().as_bytes())
    }

    pub fn apply(&self, base: &SamplerConfig) -> Result<SamplerConfig, SweepError> {
        let mut cfg = base.clone();
        for (axis, value) in &self.0 {
            apply_axis(&mut cfg, axis, value)?;
        }
        Ok(cfg)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}={v}")?;
        }
        Ok(())
    }
}

fn num(axis: &str, v: &AxisValue) -> Result<f64, SweepError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| SweepError::InvalidSpec(format!("axis {axis} needs finite numbers, got {v}")))
}

fn count(axis: &str, v: &AxisValue) -> Result<usize, SweepError> {
    let x = num(axis, v)?;
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(SweepError::InvalidSpec(format!("axis {axis} needs positive integers, got {v}")))
    }
}

fn text<T: serde::de::DeserializeOwned>(axis: &str, v: &AxisValue) -> Result<T, SweepError> {
    serde_json::to_value(v)
        .and_then(serde_json::from_value)
        .map_err(|_| SweepError::InvalidSpec(format!("axis {axis}: unsupported value {v}")))
}

fn apply_axis(cfg: &mut SamplerConfig, axis: &str, v: &AxisValue) -> Result<(), SweepError> {
    match axis {
        "eta" => cfg.eta = num(axis, v)?,
        "n_steps" => cfg.n_steps = count(axis, v)?,
        "s_churn" => cfg.s_churn = num(axis, v)?,
        "s_tmax" => cfg.s_tmax = Some(num(axis, v)?),
        "s_tmin" => cfg.s_tmin = num(axis, v)?,
        "scheme" => cfg.scheme = Some(text::<Scheme>(axis, v)?),
        "t_steps" => cfg.t_steps = count(axis, v)?,
        "uncond_mode" => cfg.guidance.mode = text::<UncondMode>(axis, v)?,
        "w" => cfg.guidance.w = num(axis, v)?,
        _ => return Err(SweepError::UnknownAxis(axis.to_string())),
    }
    Ok(())
}

/// Full Cartesian product of the swept axes. Axes are ordered by name and
/// values ascending, so cells come out in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<(String, Vec<AxisValue>)>,
}

impl Grid {
    pub fn new(axes: &BTreeMap<String, Vec<AxisValue>>) -> Result<Self, SweepError> {
        if axes.is_empty() {
            return Err(SweepError::InvalidSpec("at least one swept axis is required".into()));
        }
        let mut out = Vec::with_capacity(axes.len());
        for (name, values) in axes {
            if !AXIS_NAMES.contains(&name.as_str()) {
                return Err(SweepError::UnknownAxis(name.clone()));
            }
            if values.is_empty() {
                return Err(SweepError::InvalidSpec(format!("axis {name} has no values")));
            }
            let mut sorted = values.clone();
            sorted.sort_by(AxisValue::cmp_key);
            if sorted.windows(2).any(|w| w[0].cmp_key(&w[1]) == Ordering::Equal) {
                return Err(SweepError::InvalidSpec(format!("axis {name} repeats a value")));
            }
            out.push((name.clone(), sorted));
        }
        Ok(Self { axes: out })
    }

    pub fn axis_names(&self) -> Vec<&str> {
        self.axes.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = vec![Vec::new()];
        for (name, values) in &self.axes {
            let mut next = Vec::with_capacity(cells.len() * values.len());
            for prefix in &cells {
                for v in values {
                    let mut c: Vec<(String, AxisValue)> = prefix.clone();
                    c.push((name.clone(), v.clone()));
                    next.push(c);
                }
            }
            cells = next;
        }
        cells.into_iter().map(Cell).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::SamplerKind;

    fn axes(pairs: &[(&str, Vec<AxisValue>)]) -> BTreeMap<String, Vec<AxisValue>> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn cartesian_order() {
        let g = Grid::new(&axes(&[
            ("w", vec![AxisValue::Num(2.0), AxisValue::Num(0.0)]),
            ("n_steps", vec![AxisValue::Num(16.0), AxisValue::Num(8.0)]),
        ]))
        .unwrap();
        let cells: Vec<String> = g.cells().iter().map(|c| c.to_string()).collect();
        assert_eq!(cells, ["n_steps=8,w=0", "n_steps=8,w=2", "n_steps=16,w=0", "n_steps=16,w=2"]);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(matches!(Grid::new(&BTreeMap::new()), Err(SweepError::InvalidSpec(_))));
        assert!(matches!(
            Grid::new(&axes(&[("sigma", vec![AxisValue::Num(1.0)])])),
            Err(SweepError::UnknownAxis(_))
        ));
        assert!(Grid::new(&axes(&[("w", vec![AxisValue::Num(1.0), AxisValue::Num(1.0)])])).is_err());
    }

    #[test]
    fn apply_overrides() {
        let cell = Cell(vec![
            ("n_steps".into(), AxisValue::Num(32.0)),
            ("scheme".into(), AxisValue::Text("euler".into())),
            ("w".into(), AxisValue::Num(1.5)),
        ]);
        let cfg = cell.apply(&SamplerConfig::new(SamplerKind::Edm)).unwrap();
        assert_eq!((cfg.n_steps, cfg.scheme, cfg.guidance.w), (32, Some(Scheme::Euler), 1.5));
        let bad = Cell(vec![("n_steps".into(), AxisValue::Num(2.5))]);
        assert!(bad.apply(&SamplerConfig::new(SamplerKind::Edm)).is_err());
    }
}
