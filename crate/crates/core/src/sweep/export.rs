use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{AxisValue, SweepError, SweepResultRow};

const TAIL: [&str; 8] = ["k", "n", "rho_hat", "ci_lower", "ci_upper", "alpha", "seed", "wall_ms"];

/// `printf("%.17g")`: 17 significant digits, trailing zeros removed.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn axis_names(rows: &[SweepResultRow]) -> Result<Vec<String>, SweepError> {
    let first = rows.first().ok_or(SweepError::EmptyInput)?;
    let names: Vec<String> = first.cell.keys().cloned().collect();
    if rows.iter().any(|r| !r.cell.keys().eq(names.iter())) {
        return Err(SweepError::InvalidSpec("rows have different axes".into()));
    }
    Ok(names)
}

pub fn rows_to_csv(rows: &[SweepResultRow]) -> Result<String, SweepError> {
    let names = axis_names(rows)?;
    let mut out = String::new();
    let header: Vec<&str> = names.iter().map(String::as_str).chain(TAIL).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        for name in &names {
            let _ = write!(out, "{},", r.cell[name]);
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            r.n,
            fmt_g17(r.rho_hat),
            fmt_g17(r.ci_lower),
            fmt_g17(r.ci_upper),
            fmt_g17(r.alpha),
            r.seed,
            fmt_g17(r.wall_ms)
        );
    }
    Ok(out)
}

pub fn rows_to_json(rows: &[SweepResultRow]) -> Result<String, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::EmptyInput);
    }
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<(), SweepError> {
    std::fs::write(path, text)
        .map_err(|source| SweepError::IoFailure { path: path.display().to_string(), source })
}

pub fn emit_csv(rows: &[SweepResultRow], path: &Path) -> Result<(), SweepError> {
    write(path, &rows_to_csv(rows)?)
}

pub fn emit_json(rows: &[SweepResultRow], path: &Path) -> Result<(), SweepError> {
    write(path, &rows_to_json(rows)?)
}

fn parse_csv(text: &str) -> Result<Vec<SweepResultRow>, SweepError> {
    let bad = |m: String| SweepError::InvalidSpec(format!("malformed rows CSV: {m}"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or(SweepError::EmptyInput)?.split(',').collect();
    if header.len() < TAIL.len() || header[header.len() - TAIL.len()..] != TAIL {
        return Err(bad("unexpected header".into()));
    }
    let n_axes = header.len() - TAIL.len();
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(bad(format!("line has {} fields", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(e.to_string()));
        let int = |s: &str| s.parse::<u64>().map_err(|e| bad(e.to_string()));
        let cell: BTreeMap<String, AxisValue> = (0..n_axes)
            .map(|i| {
                let v = f[i].parse::<f64>().map(AxisValue::Num).unwrap_or_else(|_| AxisValue::Text(f[i].into()));
                (header[i].to_string(), v)
            })
            .collect();
        let t = &f[n_axes..];
        rows.push(SweepResultRow {
            cell,
            k: int(t[0])?,
            n: int(t[1])?,
            rho_hat: num(t[2])?,
            ci_lower: num(t[3])?,
            ci_upper: num(t[4])?,
            alpha: num(t[5])?,
            seed: int(t[6])?,
            wall_ms: num(t[7])?,
            filtered: 0,
        });
    }
    if rows.is_empty() {
        return Err(SweepError::EmptyInput);
    }
    Ok(rows)
}

/// Reads rows written by [`emit_csv`] or [`emit_json`]; the format is chosen
/// by content.
pub fn read_rows(path: &Path) -> Result<Vec<SweepResultRow>, SweepError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SweepError::IoFailure { path: path.display().to_string(), source })?;
    if text.trim_start().starts_with('[') {
        let rows: Vec<SweepResultRow> =
            serde_json::from_str(&text).map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
        if rows.is_empty() {
            return Err(SweepError::EmptyInput);
        }
        Ok(rows)
    } else {
        parse_csv(&text)
    }
}
