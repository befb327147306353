//! Declarative hyperparameter grids: run every cell, estimate the aligned
//! fraction, and export CSV, JSON and SVG.

mod export;
mod grid;
mod plot;
mod run;
mod stats;

pub use export::{emit_csv, emit_json, fmt_g17, read_rows, rows_to_csv, rows_to_json};
pub use grid::{AxisValue, Cell, Grid, AXIS_NAMES};
pub use plot::{emit_svg_plot, render_svg, PlotOptions};
pub use run::{run_sweep, run_sweep_with, DenoiserSource, SweepResultRow, SweepSpec};
pub use stats::{spearman, trend_verdict, TrendVerdict};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("unknown axis '{0}'")]
    UnknownAxis(String),
    #[error("log scale requires positive values on axis '{0}'")]
    InvalidLogDomain(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("all values are equal")]
    DegenerateInput,
    #[error("no rows")]
    EmptyInput,
    #[error("in cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<crate::Error>,
    },
    #[error("io failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SweepError {
    pub fn category(&self) -> &'static str {
        match self {
            SweepError::InvalidSpec(_) => "invalid_spec",
            SweepError::UnknownAxis(_) => "unknown_axis",
            SweepError::InvalidLogDomain(_) => "invalid_log_domain",
            SweepError::LengthMismatch(..) => "length_mismatch",
            SweepError::DegenerateInput => "degenerate_input",
            SweepError::EmptyInput => "empty_input",
            SweepError::Cell { source, .. } => source.category(),
            SweepError::IoFailure { .. } => "io_failure",
        }
    }
}
