use std::fmt::Write as _;
use std::path::Path;

use super::{AxisValue, SweepError, SweepResultRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotOptions {
    pub x_axis: String,
    pub group_by: Option<String>,
    pub logx: bool,
    pub title: Option<String>,
}

struct Series {
    label: Option<String>,
    points: Vec<(f64, f64, f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn collect(rows: &[SweepResultRow], opts: &PlotOptions) -> Result<Vec<Series>, SweepError> {
    let mut groups: Vec<(Option<AxisValue>, Vec<(f64, f64, f64, f64)>)> = Vec::new();
    for r in rows {
        let x = r
            .cell
            .get(&opts.x_axis)
            .ok_or_else(|| SweepError::UnknownAxis(opts.x_axis.clone()))?
            .as_f64()
            .ok_or_else(|| SweepError::InvalidSpec(format!("axis {} is not numeric", opts.x_axis)))?;
        if opts.logx && x <= 0.0 {
            return Err(SweepError::InvalidLogDomain(opts.x_axis.clone()));
        }
        let key = match &opts.group_by {
            Some(g) => Some(r.cell.get(g).cloned().ok_or_else(|| SweepError::UnknownAxis(g.clone()))?),
            None => None,
        };
        let p = (x, r.rho_hat, r.ci_lower, r.ci_upper);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(p),
            None => groups.push((key, vec![p])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(key, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let label = key.map(|k| format!("{} = {}", opts.group_by.as_deref().unwrap_or(""), k));
            Series { label, points }
        })
        .collect())
}

/// Renders rho_hat against `x_axis` with CI whiskers, one polyline per group.
pub fn render_svg(rows: &[SweepResultRow], opts: &PlotOptions) -> Result<String, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::EmptyInput);
    }
    let series = collect(rows, opts)?;
    let tx = |x: f64| if opts.logx { x.log10() } else { x };
    let mut xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (mut x0, mut x1) = (tx(xs[0]), tx(xs[xs.len() - 1]));
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let pad = 0.05 * (x1 - x0);
    let (x0, x1) = (x0 - pad, x1 + pad);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - y) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if let Some(t) = &opts.title {
        let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, escape(t));
    }
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw
    );
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let (yy, tick, label) = (py(y), LEFT - 5.0, LEFT - 8.0);
        let _ = writeln!(
            s,
            r#"<line x1="{tick}" y1="{yy:.2}" x2="{LEFT}" y2="{yy:.2}" stroke="black"/><text x="{label}" y="{:.2}" text-anchor="end">{y:.1}</text>"#,
            yy + 4.0
        );
    }
    for &x in &xs {
        let _ = writeln!(
            s,
            r#"<line class="xtick" x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle">{4}</text>"#,
            px(x),
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            AxisValue::Num(x)
        );
    }
    let xlabel = if opts.logx { format!("{} (log scale)", opts.x_axis) } else { opts.x_axis.clone() };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">rho_hat</text>"#,
        TOP + ph / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> =
            ser.points.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, pts.join(" "));
        for p in &ser.points {
            let (x, lo, hi) = (px(p.0), py(p.2), py(p.3));
            let _ = writeln!(
                s,
                r#"<line class="whisker" x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                py(p.1)
            );
        }
        if let Some(label) = &ser.label {
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 15.0;
            let _ = writeln!(
                s,
                r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}"/><text x="{}" y="{}">{}</text></g>"#,
                lx + 20.0,
                lx + 25.0,
                ly + 4.0,
                escape(label)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_plot(rows: &[SweepResultRow], opts: &PlotOptions, path: &Path) -> Result<(), SweepError> {
    let svg = render_svg(rows, opts)?;
    std::fs::write(path, svg)
        .map_err(|source| SweepError::IoFailure { path: path.display().to_string(), source })
}
