use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{Cli, Command, DatasetArgs, EstimateArgs, KindArg, PlotArgs, SampleArgs, SourceArg, SweepArgs, TrajArgs};
use biaslab::dataset::{
    colorize_biased_mnist, colorize_multicolor_mnist, load_mnist, prepare_gray, samples_metadata,
    save_dataset, subset_classes, synthetic_digits, BiasedDataset, DatasetError, DatasetKind, Palette,
    Resolution, RgbImage, TensorFile,
};
use biaslab::denoiser::{Condition, Conditioned, Denoiser, DenoiserError, EmpiricalDenoiser, GaussianMixture};
use biaslab::image_out::contact_sheet;
use biaslab::metrics::{
    color_oracle, estimate_rho, multicolor_oracle, verdicts_csv, MetricsError, VerdictRecord,
    DEFAULT_WHITE_THRESHOLD,
};
use biaslab::samplers::{generate, SampleOutput, SamplerConfig};
use biaslab::sweep::{emit_csv, emit_json, emit_svg_plot, read_rows, run_sweep, DenoiserSource, PlotOptions, SweepSpec};
use biaslab::{Error, Result};

const ALL_CLASSES: [u8; 10] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dataset(a) => dataset(a),
        Command::Sample(a) => sample(a),
        Command::Estimate(a) => estimate(a),
        Command::Sweep(a) => sweep(a),
        Command::Plot(a) => plot(a),
        Command::Traj(a) => traj(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn dataset(a: DatasetArgs) -> Result<()> {
    let classes = a.classes.clone().unwrap_or_else(|| ALL_CLASSES.to_vec());
    let (gray, labels) = match a.source {
        SourceArg::Idx => {
            let images = a.images.as_ref().ok_or_else(|| config_err("--images is required for the idx source"))?;
            let labels = a.labels.as_ref().ok_or_else(|| config_err("--labels is required for the idx source"))?;
            let (g, l) = load_mnist(images, labels)?;
            let keep: Vec<usize> = (0..l.len()).filter(|&i| classes.contains(&l[i])).collect();
            (keep.iter().map(|&i| g[i].clone()).collect(), keep.iter().map(|&i| l[i]).collect::<Vec<u8>>())
        }
        SourceArg::Synthetic => synthetic_digits(a.per_class, &classes, a.seed),
    };
    if !matches!(a.size, 16 | 32) {
        return Err(config_err("--size must be 16 or 32"));
    }
    let gray = prepare_gray(&gray, Resolution::from_size(a.size));
    let ds = match a.kind {
        KindArg::Biased => {
            let rho = a.rho.ok_or_else(|| config_err("--rho is required for the biased kind"))?;
            let palette = match &a.palette {
                Some(p) => Palette::from_json(&read_text(p)?)?,
                None => Palette::biased_mnist(),
            };
            colorize_biased_mnist(&gray, &labels, rho, &palette, a.seed)?
        }
        KindArg::Multicolor => {
            let (l, r) = (a.rho_left, a.rho_right);
            let (l, r) = l.zip(r).ok_or_else(|| config_err("--rho-left and --rho-right are required"))?;
            colorize_multicolor_mnist(
                &gray,
                &labels,
                l,
                r,
                &Palette::multicolor_left(),
                &Palette::multicolor_right(),
                a.seed,
            )?
        }
    };
    let ds = if a.classes.is_some() { subset_classes(&ds, &classes)? } else { ds };
    save_dataset(&ds, &a.out)?;
    let fractions: Vec<String> = ds.rho_dataset.iter().map(|r| format!("{r:.4}")).collect();
    println!("samples {}", ds.len());
    println!("aligned_fraction {}", fractions.join(" "));
    Ok(())
}

/// Exact denoiser loaded from a mixture JSON or a dataset file.
enum Backend {
    Mixture(GaussianMixture),
    Empirical { denoiser: EmpiricalDenoiser, dataset: BiasedDataset },
}

impl Backend {
    fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        if bytes.first() == Some(&b'{') && !bytes.starts_with(b"{\"magic\"") {
            let text = String::from_utf8(bytes).map_err(|e| config_err(e.to_string()))?;
            return Ok(Backend::Mixture(GaussianMixture::from_json(&text)?));
        }
        let dataset = BiasedDataset::from_tensor_file(&TensorFile::from_bytes(&bytes)?)?;
        let denoiser = EmpiricalDenoiser::from_dataset(&dataset)?;
        Ok(Backend::Empirical { denoiser, dataset })
    }

    fn denoiser(&self) -> &dyn Denoiser {
        match self {
            Backend::Mixture(m) => m,
            Backend::Empirical { denoiser, .. } => denoiser,
        }
    }

    fn condition(&self, class: Option<u8>) -> Result<Condition> {
        let Some(label) = class else { return Ok(Condition::Unconditional) };
        let idx = match self {
            Backend::Mixture(m) => Some(label as usize).filter(|&y| y < m.num_classes()),
            Backend::Empirical { denoiser, .. } => denoiser.class_index(label),
        };
        idx.map(Condition::Class).ok_or_else(|| DenoiserError::UnknownClass(label as usize).into())
    }

    fn image_shape(&self) -> Option<(usize, usize)> {
        match self {
            Backend::Mixture(_) => None,
            Backend::Empirical { dataset, .. } => Some(dataset.image_shape()),
        }
    }

    fn extra_metadata(&self, cfg: &SamplerConfig) -> Value {
        match self {
            Backend::Mixture(_) => json!({ "sampler": cfg }),
            Backend::Empirical { dataset, .. } => json!({
                "sampler": cfg,
                "dataset_kind": dataset.kind,
                "palettes": dataset.palettes,
            }),
        }
    }
}

struct Draw {
    backend: Backend,
    cfg: SamplerConfig,
    outputs: Vec<SampleOutput>,
}

fn draw(denoiser: &Path, config: &Path, class: Option<u8>, count: usize, seed: Option<u64>, record: bool) -> Result<Draw> {
    if count == 0 {
        return Err(config_err("--count must be >= 1"));
    }
    let backend = Backend::load(denoiser)?;
    let mut cfg = SamplerConfig::from_json(&read_text(config)?)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let cond = backend.condition(class)?;
    let den = Conditioned::new(backend.denoiser(), cond, cfg.guidance);
    let outputs = generate(&den, &cfg, cfg.seed, &[], count, record)?;
    Ok(Draw { backend, cfg, outputs })
}

fn states_to_tensor(draw: &Draw, states: Vec<&[f64]>, leading: Vec<usize>, targets: &[u8]) -> Result<TensorFile> {
    let extra = draw.backend.extra_metadata(&draw.cfg);
    let meta = samples_metadata(targets, extra);
    let (shape, data): (Vec<usize>, Vec<f32>) = match draw.backend.image_shape() {
        Some((w, h)) => {
            let mut data = Vec::new();
            for s in &states {
                data.extend(RgbImage::from_state(w, h, s)?.data);
            }
            ([leading, vec![h, w, 3]].concat(), data)
        }
        None => {
            let dim = states.first().map_or(0, |s| s.len());
            let data = states.iter().flat_map(|s| s.iter().map(|&v| v as f32)).collect();
            ([leading, vec![dim]].concat(), data)
        }
    };
    Ok(TensorFile::new(shape, meta, data)?)
}

fn history_paths(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "samples".into());
    let dir = out.parent().unwrap_or_else(|| Path::new(""));
    (
        dir.join(format!("{stem}.history.bt")),
        dir.join(format!("{stem}.history.ppm")),
        dir.join(format!("{stem}.history.png")),
    )
}

fn write_history(draw: &Draw, tensor: Option<&Path>, sheets: &[PathBuf], class: Option<u8>) -> Result<()> {
    let trajs: Vec<_> = draw.outputs.iter().map(|o| o.trajectory.as_ref().expect("recorded")).collect();
    let steps = trajs[0].len();
    if let Some(path) = tensor {
        let states: Vec<&[f64]> = trajs.iter().flat_map(|t| t.points.iter().map(|p| p.state.as_slice())).collect();
        let targets = vec![class.unwrap_or(0); trajs.len()];
        let mut file = states_to_tensor(draw, states, vec![trajs.len(), steps], &targets)?;
        file.metadata["sigmas"] = json!(trajs[0].sigmas());
        file.write(path)?;
    }
    if let Some((w, h)) = draw.backend.image_shape() {
        let rows: Vec<Vec<Vec<f64>>> =
            trajs.iter().map(|t| t.points.iter().map(|p| p.state.clone()).collect()).collect();
        let sheet = contact_sheet(&rows, w, h)?;
        for p in sheets {
            sheet.write(p)?;
        }
    }
    Ok(())
}

fn sample(a: SampleArgs) -> Result<()> {
    let d = draw(&a.denoiser, &a.config, a.class, a.count, a.seed, a.record_history)?;
    let targets = vec![a.class.unwrap_or(0); a.count];
    let states: Vec<&[f64]> = d.outputs.iter().map(|o| o.state.as_slice()).collect();
    states_to_tensor(&d, states, vec![a.count], &targets)?.write(&a.out)?;
    if a.record_history {
        let (tensor, ppm, png) = history_paths(&a.out);
        write_history(&d, Some(&tensor), &[ppm, png], a.class)?;
    }
    println!("wrote {} samples to {}", a.count, a.out.display());
    Ok(())
}

fn traj(a: TrajArgs) -> Result<()> {
    let d = draw(&a.denoiser, &a.config, a.class, a.count, a.seed, true)?;
    if d.backend.image_shape().is_none() {
        return Err(config_err("contact sheets need an image dataset denoiser"));
    }
    write_history(&d, a.tensor.as_deref(), &[a.out.clone()], a.class)?;
    println!("wrote {} x {} history to {}", a.count, d.outputs[0].trajectory.as_ref().map_or(0, |t| t.len()), a.out.display());
    Ok(())
}

fn sample_files(path: &Path) -> Result<Vec<PathBuf>> {
    let io = |source| Error::Io { path: path.display().to_string(), source };
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(MetricsError::EmptyInput.into());
        }
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

struct SampleSet {
    kind: DatasetKind,
    palettes: Vec<Palette>,
    images: Vec<(RgbImage, u8)>,
}

fn load_samples(file: &TensorFile) -> Result<SampleSet> {
    let bad = |m: &str| DatasetError::FormatVersionMismatch(m.to_string());
    let meta = &file.metadata;
    let targets: Vec<u8> = serde_json::from_value(meta["targets"].clone()).map_err(|_| bad("samples metadata lacks targets"))?;
    let (kind, palettes) = if meta["kind"] == "biased_dataset" {
        let ds = BiasedDataset::from_tensor_file(file)?;
        (ds.kind, ds.palettes)
    } else {
        let extra = &meta["extra"];
        let kind = serde_json::from_value(extra["dataset_kind"].clone()).unwrap_or(DatasetKind::Biased);
        let palettes = serde_json::from_value(extra["palettes"].clone()).unwrap_or_default();
        (kind, palettes)
    };
    let [n, h, w, 3] = file.shape[..] else {
        return Err(DatasetError::ShapeMismatch(format!("expected [n, h, w, 3], got {:?}", file.shape)).into());
    };
    if targets.len() != n {
        return Err(DatasetError::ShapeMismatch("target count differs from sample count".into()).into());
    }
    let stride = h * w * 3;
    let images = (0..n)
        .map(|i| Ok((RgbImage::new(w, h, file.data[i * stride..(i + 1) * stride].to_vec())?, targets[i])))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet { kind, palettes, images })
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let override_palette = match &a.palette {
        Some(p) => Some(Palette::from_json(&read_text(p)?)?),
        None => None,
    };
    let mut records = Vec::new();
    for path in sample_files(&a.samples)? {
        let set = load_samples(&TensorFile::read(&path)?)?;
        let palette = match (&override_palette, set.palettes.get(a.bias_axis)) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => p.clone(),
            (None, None) => return Err(config_err(format!("{}: no palette; pass --palette", path.display()))),
        };
        for (image, target) in set.images {
            let verdict = match set.kind {
                DatasetKind::MultiColor if image.width >= 2 => {
                    let (l, r) = (&set.palettes[0], &set.palettes[1]);
                    multicolor_oracle(&image, l, r, target, DEFAULT_WHITE_THRESHOLD)
                        .map(|(x, y)| if a.bias_axis == 0 { x } else { y })
                }
                _ => color_oracle(&image, &palette, target, DEFAULT_WHITE_THRESHOLD),
            };
            let (predicted, aligned) = match verdict {
                Ok(v) => (Some(v.predicted), Some(v.aligned)),
                Err(MetricsError::AllPixelsWhite) => (None, None),
                Err(e) => return Err(e.into()),
            };
            records.push(VerdictRecord { sample_id: records.len(), target, predicted, aligned });
        }
    }
    let excluded = records.iter().filter(|r| r.aligned.is_none()).count();
    if excluded > 0 {
        eprintln!("warning: {excluded} all-white samples excluded");
    }
    let verdicts: Vec<bool> = records.iter().filter_map(|r| r.aligned).collect();
    let est = estimate_rho(&verdicts, a.alpha)?;
    println!("k {}", est.k);
    println!("n {}", est.n);
    println!("rho_hat {}", est.rho_hat);
    println!("ci {} {}", est.ci_lower, est.ci_upper);
    if let Some(p) = &a.verdicts {
        write_bytes(p, verdicts_csv(&records).as_bytes())?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut spec = SweepSpec::from_json(&read_text(&a.spec)?)?;
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    // Dataset paths in a spec are relative to the spec file.
    if let DenoiserSource::Dataset(p) = &mut spec.denoiser {
        if p.is_relative() {
            if let Some(dir) = a.spec.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    if a.workers == Some(0) {
        return Err(config_err("--workers must be >= 1"));
    }
    let rows = run_sweep(&spec, a.workers)?;
    if let Some(p) = &a.out_csv {
        emit_csv(&rows, p)?;
    }
    if let Some(p) = &a.out_json {
        emit_json(&rows, p)?;
    }
    if a.out_csv.is_none() && a.out_json.is_none() {
        print!("{}", biaslab::sweep::rows_to_csv(&rows)?);
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let rows = read_rows(&a.rows)?;
    let opts = PlotOptions { x_axis: a.x_axis, group_by: a.group_by, logx: a.logx, title: a.title };
    emit_svg_plot(&rows, &opts, &a.out)?;
    Ok(())
}
