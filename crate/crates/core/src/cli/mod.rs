//! Command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::run;

#[derive(Debug, Parser)]
#[command(name = "biaslab", version, about = "Measure bias amplification of diffusion samplers with exact denoisers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a colour-biased digit dataset.
    Dataset(DatasetArgs),
    /// Draw samples with a configured sampler.
    Sample(SampleArgs),
    /// Estimate the aligned fraction of a set of samples.
    Estimate(EstimateArgs),
    /// Run a hyperparameter sweep.
    Sweep(SweepArgs),
    /// Plot sweep rows as SVG.
    Plot(PlotArgs),
    /// Record sampler histories as a contact sheet.
    Traj(TrajArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Biased,
    Multicolor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    /// MNIST IDX files given by --images and --labels.
    Idx,
    /// Procedural seven-segment digits.
    Synthetic,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn open_unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long, value_enum, default_value = "biased")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "idx")]
    pub source: SourceArg,
    /// IDX image file (idx source).
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// IDX label file (idx source).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Digits per class (synthetic source).
    #[arg(long, default_value_t = 200)]
    pub per_class: usize,
    /// Comma-separated classes to keep; all ten when omitted.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<u8>>,
    /// Aligned fraction (biased kind).
    #[arg(long, value_parser = unit_interval)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = unit_interval)]
    pub rho_left: Option<f64>,
    #[arg(long, value_parser = unit_interval)]
    pub rho_right: Option<f64>,
    /// Palette JSON (biased kind); the built-in table when omitted.
    #[arg(long)]
    pub palette: Option<PathBuf>,
    /// Output side length: 16 (pooled) or 32.
    #[arg(long, default_value_t = 16)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Mixture JSON or dataset file providing the exact denoiser.
    #[arg(long)]
    pub denoiser: PathBuf,
    /// Sampler config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Conditioning class label; unconditional when omitted.
    #[arg(long)]
    pub class: Option<u8>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the sampling history (tensor plus PPM/PNG contact sheet).
    #[arg(long)]
    pub record_history: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Samples file, or a directory of samples files.
    #[arg(long)]
    pub samples: PathBuf,
    /// Palette JSON; taken from the samples metadata when omitted.
    #[arg(long)]
    pub palette: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05, value_parser = open_unit_interval)]
    pub alpha: f64,
    /// Bias axis for two-colour samples: 0 = left, 1 = right.
    #[arg(long, default_value_t = 0)]
    pub bias_axis: usize,
    /// Per-sample verdict CSV.
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// SweepSpec JSON.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "BIASLAB_WORKERS")]
    pub workers: Option<usize>,
    /// Overrides the spec's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Rows CSV or JSON written by `sweep`.
    #[arg(long)]
    pub rows: PathBuf,
    #[arg(long)]
    pub x_axis: String,
    #[arg(long)]
    pub group_by: Option<String>,
    #[arg(long)]
    pub logx: bool,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrajArgs {
    #[arg(long)]
    pub denoiser: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub class: Option<u8>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Contact sheet path; `.png` writes PNG, anything else PPM.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional tensor file with every recorded state.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
}

/// Process exit status for an error category.
pub fn exit_code(category: &str) -> u8 {
    match category {
        "io_failure" => 3,
        "config" | "invalid_spec" | "invalid_schedule" | "invalid_subset" | "invalid_arguments"
        | "invalid_guidance" | "invalid_argument" | "invalid_palette" | "unknown_axis"
        | "invalid_log_domain" => 4,
        "unknown_magic" | "truncated_payload" | "dimension_overflow" | "format_version_mismatch"
        | "checksum_mismatch" | "shape_mismatch" => 5,
        "empty_input" | "empty_result" | "all_pixels_white" | "ragged_input" => 6,
        "nonfinite_state" => 7,
        _ => 1,
    }
}

pub fn report_clap(e: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        kind => {
            let category = if kind == ErrorKind::ValueValidation { "invalid_argument" } else { "usage" };
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error:{category}: {first}");
            ExitCode::from(2)
        }
    }
}
