use serde::{Deserialize, Serialize};

use super::{SweepError, SweepResultRow};

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // Positions i..=j share the mean of ranks i+1..=j+1.
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation, with tied values sharing their average rank.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, SweepError> {
    if xs.len() != ys.len() {
        return Err(SweepError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(SweepError::DegenerateInput);
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(SweepError::DegenerateInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Machine-readable summary of how the estimate moves along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    pub axis: String,
    /// `None` when the estimates are all equal.
    pub spearman: Option<f64>,
    /// CIs at the lowest and highest axis values do not overlap.
    pub extremes_disjoint: bool,
    /// The estimate at the highest axis value exceeds the one at the lowest.
    pub extremes_increasing: bool,
    /// Every pair of cells has overlapping CIs.
    pub all_overlap: bool,
}

/// Trend of `rho_hat` along `axis` across `rows`, which should vary only in
/// that axis.
pub fn trend_verdict(rows: &[SweepResultRow], axis: &str) -> Result<TrendVerdict, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::EmptyInput);
    }
    let mut pts = Vec::with_capacity(rows.len());
    for r in rows {
        let x = r
            .cell
            .get(axis)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| SweepError::UnknownAxis(axis.to_string()))?;
        pts.push((x, r.estimate()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.rho_hat).collect();
    let spearman = match spearman(&xs, &ys) {
        Ok(v) => Some(v),
        Err(SweepError::DegenerateInput) => None,
        Err(e) => return Err(e),
    };
    let (lo, hi) = (&pts[0].1, &pts[pts.len() - 1].1);
    let extremes_disjoint = !lo.overlaps(hi);
    let extremes_increasing = hi.rho_hat > lo.rho_hat;
    let all_overlap = pts
        .iter()
        .enumerate()
        .all(|(i, a)| pts[i + 1..].iter().all(|b| a.1.overlaps(&b.1)));
    Ok(TrendVerdict { axis: axis.to_string(), spearman, extremes_disjoint, extremes_increasing, all_overlap })
}
