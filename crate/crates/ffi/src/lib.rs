//! C ABI over the biaslab core.
//!
//! Every function returns a [`BiaslabStatus`]; on failure a message is
//! available from [`biaslab_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use biaslab::dataset::{load_dataset, save_dataset, BiasedDataset, Palette, RgbImage, SyntheticBiasedSpec};
use biaslab::denoiser::{score, Condition, Conditioned, Denoiser, EmpiricalDenoiser, GaussianMixture};
use biaslab::metrics::{clopper_pearson, color_oracle, estimate_rho};
use biaslab::samplers::{generate, karras_schedule, KarrasScheduleSpec, SamplerConfig};
use biaslab::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiaslabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Io = 4,
    Format = 5,
    Denoiser = 6,
    Sampler = 7,
    Metrics = 8,
    Config = 9,
    Panic = 10,
}

/// Aligned-fraction estimate with its Clopper-Pearson interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BiaslabRhoEstimate {
    pub k: u64,
    pub n: u64,
    pub rho_hat: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub alpha: f64,
}

enum Backend {
    Mixture(GaussianMixture),
    Empirical { denoiser: EmpiricalDenoiser, shape: (usize, usize) },
}

/// Opaque exact denoiser.
pub struct BiaslabDenoiser(Backend);

/// Opaque colour-biased dataset.
pub struct BiaslabDataset(BiasedDataset);

impl BiaslabDenoiser {
    fn inner(&self) -> &dyn Denoiser {
        match &self.0 {
            Backend::Mixture(m) => m,
            Backend::Empirical { denoiser, .. } => denoiser,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(BiaslabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => BiaslabStatus::Io,
            Error::Dataset(d) if d.category() == "io_failure" => BiaslabStatus::Io,
            Error::Dataset(_) => BiaslabStatus::Format,
            Error::Denoiser(_) => BiaslabStatus::Denoiser,
            Error::Sampler(_) => BiaslabStatus::Sampler,
            Error::Metrics(_) => BiaslabStatus::Metrics,
            Error::Sweep(_) | Error::Config(_) => BiaslabStatus::Config,
        };
        Failure(status, format!("{}: {}", e.category(), e))
    }
}

macro_rules! impl_from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}
impl_from_core!(
    biaslab::dataset::DatasetError,
    biaslab::denoiser::DenoiserError,
    biaslab::samplers::SamplerError,
    biaslab::metrics::MetricsError
);

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(BiaslabStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BiaslabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BiaslabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BiaslabStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(BiaslabStatus::NullPointer, format!("{name} is null"))
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn string<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| invalid(format!("{name} is not UTF-8")))
}

unsafe fn out<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(name))
}

fn condition(d: &BiaslabDenoiser, class: i32) -> Result<Condition, Failure> {
    if class < 0 {
        return Ok(Condition::Unconditional);
    }
    let y = class as usize;
    if y >= d.inner().num_classes() {
        return Err(invalid(format!("class index {class} out of range")));
    }
    Ok(Condition::Class(y))
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn biaslab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn biaslab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Exact two-sided interval for `k` successes out of `n`.
#[no_mangle]
pub unsafe extern "C" fn biaslab_clopper_pearson(
    k: u64,
    n: u64,
    alpha: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> BiaslabStatus {
    guard(|| {
        let (lo, hi) = clopper_pearson(k, n, alpha)?;
        *out(lower, "lower")? = lo;
        *out(upper, "upper")? = hi;
        Ok(())
    })
}

/// Writes the `n_steps + 1` noise levels into `out_sigmas`, which must hold
/// at least `n_steps + 1` values.
#[no_mangle]
pub unsafe extern "C" fn biaslab_karras_schedule(
    n_steps: usize,
    sigma_min: f64,
    sigma_max: f64,
    exponent: f64,
    out_sigmas: *mut f64,
    out_len: usize,
) -> BiaslabStatus {
    guard(|| {
        let sigmas = karras_schedule(&KarrasScheduleSpec { n_steps, sigma_min, sigma_max, exponent })?;
        if out_len < sigmas.len() {
            return Err(Failure(BiaslabStatus::BufferTooSmall, format!("need {} values", sigmas.len())));
        }
        slice_mut(out_sigmas, sigmas.len(), "out_sigmas")?.copy_from_slice(&sigmas);
        Ok(())
    })
}

/// Aligned fraction of `n` verdicts (nonzero bytes are aligned).
#[no_mangle]
pub unsafe extern "C" fn biaslab_estimate_rho(
    verdicts: *const u8,
    n: usize,
    alpha: f64,
    out_estimate: *mut BiaslabRhoEstimate,
) -> BiaslabStatus {
    guard(|| {
        let v: Vec<bool> = slice(verdicts, n, "verdicts")?.iter().map(|&b| b != 0).collect();
        let e = estimate_rho(&v, alpha)?;
        *out(out_estimate, "out_estimate")? = BiaslabRhoEstimate {
            k: e.k,
            n: e.n,
            rho_hat: e.rho_hat,
            ci_lower: e.ci_lower,
            ci_upper: e.ci_upper,
            alpha: e.alpha,
        };
        Ok(())
    })
}

/// Colour-oracle verdict for an interleaved RGB image with values in [0, 1].
/// `palette_json` may be null for the built-in ten-colour table.
#[no_mangle]
pub unsafe extern "C" fn biaslab_color_oracle(
    rgb: *const f32,
    width: usize,
    height: usize,
    palette_json: *const c_char,
    target: u8,
    white_threshold: f32,
    out_predicted: *mut u8,
    out_aligned: *mut bool,
) -> BiaslabStatus {
    guard(|| {
        let len = width.checked_mul(height).and_then(|a| a.checked_mul(3)).ok_or_else(|| invalid("image too large"))?;
        let data = slice(rgb, len, "rgb")?.to_vec();
        let image = RgbImage::new(width, height, data)?;
        let palette = if palette_json.is_null() {
            Palette::biased_mnist()
        } else {
            Palette::from_json(string(palette_json, "palette_json")?)?
        };
        let v = color_oracle(&image, &palette, target, white_threshold)?;
        *out(out_predicted, "out_predicted")? = v.predicted;
        *out(out_aligned, "out_aligned")? = v.aligned;
        Ok(())
    })
}

/// Builds an analytic Gaussian-mixture denoiser from its JSON description.
#[no_mangle]
pub unsafe extern "C" fn biaslab_mixture_from_json(
    json: *const c_char,
    out_denoiser: *mut *mut BiaslabDenoiser,
) -> BiaslabStatus {
    guard(|| {
        let m = GaussianMixture::from_json(string(json, "json")?)?;
        *out(out_denoiser, "out_denoiser")? = Box::into_raw(Box::new(BiaslabDenoiser(Backend::Mixture(m))));
        Ok(())
    })
}

/// Builds the ideal empirical denoiser over a dataset's images.
#[no_mangle]
pub unsafe extern "C" fn biaslab_denoiser_from_dataset(
    dataset: *const BiaslabDataset,
    out_denoiser: *mut *mut BiaslabDenoiser,
) -> BiaslabStatus {
    guard(|| {
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.0;
        let denoiser = EmpiricalDenoiser::from_dataset(ds)?;
        let backend = Backend::Empirical { denoiser, shape: ds.image_shape() };
        *out(out_denoiser, "out_denoiser")? = Box::into_raw(Box::new(BiaslabDenoiser(backend)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn biaslab_denoiser_free(denoiser: *mut BiaslabDenoiser) {
    if !denoiser.is_null() {
        drop(Box::from_raw(denoiser));
    }
}

/// Dimension of the denoiser's state, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn biaslab_denoiser_dim(denoiser: *const BiaslabDenoiser) -> usize {
    denoiser.as_ref().map_or(0, |d| d.inner().dim())
}

#[no_mangle]
pub unsafe extern "C" fn biaslab_denoiser_num_classes(denoiser: *const BiaslabDenoiser) -> usize {
    denoiser.as_ref().map_or(0, |d| d.inner().num_classes())
}

/// Image width and height of an empirical denoiser; zeros for mixtures.
#[no_mangle]
pub unsafe extern "C" fn biaslab_denoiser_image_shape(
    denoiser: *const BiaslabDenoiser,
    out_width: *mut usize,
    out_height: *mut usize,
) -> BiaslabStatus {
    guard(|| {
        let d = denoiser.as_ref().ok_or_else(|| null("denoiser"))?;
        let (w, h) = match &d.0 {
            Backend::Mixture(_) => (0, 0),
            Backend::Empirical { shape, .. } => *shape,
        };
        *out(out_width, "out_width")? = w;
        *out(out_height, "out_height")? = h;
        Ok(())
    })
}

/// `D(x; sigma)` for class index `class`, or the whole population when
/// `class < 0`.
#[no_mangle]
pub unsafe extern "C" fn biaslab_denoise(
    denoiser: *const BiaslabDenoiser,
    x: *const f64,
    dim: usize,
    sigma: f64,
    class: i32,
    out_denoised: *mut f64,
) -> BiaslabStatus {
    guard(|| {
        let d = denoiser.as_ref().ok_or_else(|| null("denoiser"))?;
        let cond = condition(d, class)?;
        let r = d.inner().denoise(slice(x, dim, "x")?, sigma, cond)?;
        slice_mut(out_denoised, r.len(), "out_denoised")?.copy_from_slice(&r);
        Ok(())
    })
}

/// Score `(D(x; sigma) - x) / sigma^2`; `class` as in [`biaslab_denoise`].
#[no_mangle]
pub unsafe extern "C" fn biaslab_score(
    denoiser: *const BiaslabDenoiser,
    x: *const f64,
    dim: usize,
    sigma: f64,
    class: i32,
    out_score: *mut f64,
) -> BiaslabStatus {
    guard(|| {
        let d = denoiser.as_ref().ok_or_else(|| null("denoiser"))?;
        let cond = condition(d, class)?;
        let r = score(d.inner(), slice(x, dim, "x")?, sigma, cond)?;
        slice_mut(out_score, r.len(), "out_score")?.copy_from_slice(&r);
        Ok(())
    })
}

/// Draws `count` samples with the sampler described by `config_json`. Sample
/// `i` occupies `out_states[i * dim .. (i + 1) * dim]`; `out_len` must be at
/// least `count * dim`.
#[no_mangle]
pub unsafe extern "C" fn biaslab_sample(
    denoiser: *const BiaslabDenoiser,
    config_json: *const c_char,
    class: i32,
    count: usize,
    seed: u64,
    out_states: *mut f64,
    out_len: usize,
) -> BiaslabStatus {
    guard(|| {
        let d = denoiser.as_ref().ok_or_else(|| null("denoiser"))?;
        let cfg = SamplerConfig::from_json(string(config_json, "config_json")?)?;
        let dim = d.inner().dim();
        let need = count.checked_mul(dim).ok_or_else(|| invalid("count too large"))?;
        if out_len < need {
            return Err(Failure(BiaslabStatus::BufferTooSmall, format!("need {need} values")));
        }
        let den = Conditioned::new(d.inner(), condition(d, class)?, cfg.guidance);
        let outputs = generate(&den, &cfg, seed, &[], count, false)?;
        let dst = slice_mut(out_states, need, "out_states")?;
        for (chunk, o) in dst.chunks_mut(dim.max(1)).zip(&outputs) {
            chunk.copy_from_slice(&o.state);
        }
        Ok(())
    })
}

/// Builds a colour-biased dataset from procedural digits.
#[no_mangle]
pub unsafe extern "C" fn biaslab_dataset_synthetic(
    per_class: usize,
    classes: *const u8,
    num_classes: usize,
    rho: f64,
    size: usize,
    seed: u64,
    out_dataset: *mut *mut BiaslabDataset,
) -> BiaslabStatus {
    guard(|| {
        let classes = slice(classes, num_classes, "classes")?.to_vec();
        let ds = SyntheticBiasedSpec { per_class, classes, rho, size, seed }.build()?;
        *out(out_dataset, "out_dataset")? = Box::into_raw(Box::new(BiaslabDataset(ds)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn biaslab_dataset_load(path: *const c_char, out_dataset: *mut *mut BiaslabDataset) -> BiaslabStatus {
    guard(|| {
        let ds = load_dataset(Path::new(string(path, "path")?))?;
        *out(out_dataset, "out_dataset")? = Box::into_raw(Box::new(BiaslabDataset(ds)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn biaslab_dataset_save(dataset: *const BiaslabDataset, path: *const c_char) -> BiaslabStatus {
    guard(|| {
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.0;
        save_dataset(ds, Path::new(string(path, "path")?))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn biaslab_dataset_free(dataset: *mut BiaslabDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of samples, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn biaslab_dataset_len(dataset: *const BiaslabDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Empirical aligned fraction on bias axis `axis`.
#[no_mangle]
pub unsafe extern "C" fn biaslab_dataset_rho(dataset: *const BiaslabDataset, axis: usize, out_rho: *mut f64) -> BiaslabStatus {
    guard(|| {
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.0;
        let rho = *ds.rho_dataset.get(axis).ok_or_else(|| invalid(format!("no bias axis {axis}")))?;
        *out(out_rho, "out_rho")? = rho;
        Ok(())
    })
}
