use std::ffi::{CStr, CString};
use std::ptr;

use biaslab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(biaslab_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn clopper_pearson_closed_form() {
    let (mut lo, mut hi) = (f64::NAN, f64::NAN);
    let s = unsafe { biaslab_clopper_pearson(0, 10, 0.05, &mut lo, &mut hi) };
    assert_eq!(s, BiaslabStatus::Ok);
    assert_eq!(lo, 0.0);
    assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);

    let s = unsafe { biaslab_clopper_pearson(3, 2, 0.05, &mut lo, &mut hi) };
    assert_eq!(s, BiaslabStatus::Metrics);
    assert!(last_error().starts_with("invalid_arguments"));
    let s = unsafe { biaslab_clopper_pearson(1, 2, 0.05, ptr::null_mut(), &mut hi) };
    assert_eq!(s, BiaslabStatus::NullPointer);
}

#[test]
fn karras_buffer_contract() {
    let mut buf = [0.0f64; 3];
    let s = unsafe { biaslab_karras_schedule(2, 0.002, 80.0, 7.0, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(s, BiaslabStatus::Ok);
    assert_eq!(buf, [80.0, 0.002, 0.0]);
    let s = unsafe { biaslab_karras_schedule(5, 0.002, 80.0, 7.0, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(s, BiaslabStatus::BufferTooSmall);
    let s = unsafe { biaslab_karras_schedule(2, 90.0, 80.0, 7.0, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(s, BiaslabStatus::Sampler);
}

#[test]
fn estimate_counts() {
    let v = [1u8, 1, 0, 1];
    let mut e = BiaslabRhoEstimate::default();
    assert_eq!(unsafe { biaslab_estimate_rho(v.as_ptr(), 4, 0.05, &mut e) }, BiaslabStatus::Ok);
    assert_eq!((e.k, e.n, e.rho_hat), (3, 4, 0.75));
    assert_eq!(unsafe { biaslab_estimate_rho(v.as_ptr(), 0, 0.05, &mut e) }, BiaslabStatus::Metrics);
}

#[test]
fn mixture_denoise_and_sample() {
    let json = CString::new(r#"{"components":[{"weight":1.0,"mean":[0.0],"stddev":1.0}]}"#).unwrap();
    let mut d: *mut BiaslabDenoiser = ptr::null_mut();
    assert_eq!(unsafe { biaslab_mixture_from_json(json.as_ptr(), &mut d) }, BiaslabStatus::Ok);
    assert_eq!(unsafe { biaslab_denoiser_dim(d) }, 1);
    let x = [2.0f64];
    let mut out = [0.0f64];
    // Conjugate Gaussian: D = x / (1 + sigma^2).
    assert_eq!(unsafe { biaslab_denoise(d, x.as_ptr(), 1, 1.0, 0, out.as_mut_ptr()) }, BiaslabStatus::Ok);
    assert!((out[0] - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { biaslab_score(d, x.as_ptr(), 1, 1.0, -1, out.as_mut_ptr()) }, BiaslabStatus::Ok);
    assert!((out[0] + 1.0).abs() < 1e-12);
    assert_eq!(unsafe { biaslab_denoise(d, x.as_ptr(), 1, 1.0, 3, out.as_mut_ptr()) }, BiaslabStatus::InvalidArgument);

    let cfg = CString::new(r#"{"kind":"dpm_solver_1","n_steps":16}"#).unwrap();
    let mut states = [0.0f64; 8];
    let s = unsafe { biaslab_sample(d, cfg.as_ptr(), 0, 8, 7, states.as_mut_ptr(), states.len()) };
    assert_eq!(s, BiaslabStatus::Ok);
    let mut again = [0.0f64; 8];
    unsafe { biaslab_sample(d, cfg.as_ptr(), 0, 8, 7, again.as_mut_ptr(), again.len()) };
    assert_eq!(states, again);
    let bad = CString::new(r#"{"kind":"nope"}"#).unwrap();
    let s = unsafe { biaslab_sample(d, bad.as_ptr(), 0, 1, 7, states.as_mut_ptr(), states.len()) };
    assert_eq!(s, BiaslabStatus::Sampler);
    unsafe { biaslab_denoiser_free(d) };
}

#[test]
fn dataset_round_trip_and_oracle() {
    let classes = [0u8, 1];
    let mut ds: *mut BiaslabDataset = ptr::null_mut();
    let s = unsafe { biaslab_dataset_synthetic(10, classes.as_ptr(), 2, 1.0, 16, 3, &mut ds) };
    assert_eq!(s, BiaslabStatus::Ok);
    assert_eq!(unsafe { biaslab_dataset_len(ds) }, 20);
    let mut rho = 0.0;
    assert_eq!(unsafe { biaslab_dataset_rho(ds, 0, &mut rho) }, BiaslabStatus::Ok);
    assert_eq!(rho, 1.0);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("d.bt").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { biaslab_dataset_save(ds, path.as_ptr()) }, BiaslabStatus::Ok);
    let mut loaded: *mut BiaslabDataset = ptr::null_mut();
    assert_eq!(unsafe { biaslab_dataset_load(path.as_ptr(), &mut loaded) }, BiaslabStatus::Ok);
    assert_eq!(unsafe { biaslab_dataset_len(loaded) }, 20);
    let missing = CString::new("/nonexistent/x.bt").unwrap();
    let mut none: *mut BiaslabDataset = ptr::null_mut();
    assert_eq!(unsafe { biaslab_dataset_load(missing.as_ptr(), &mut none) }, BiaslabStatus::Io);

    let mut d: *mut BiaslabDenoiser = ptr::null_mut();
    assert_eq!(unsafe { biaslab_denoiser_from_dataset(loaded, &mut d) }, BiaslabStatus::Ok);
    assert_eq!(unsafe { biaslab_denoiser_dim(d) }, 16 * 16 * 3);
    assert_eq!(unsafe { biaslab_denoiser_num_classes(d) }, 2);
    let (mut w, mut h) = (0usize, 0usize);
    assert_eq!(unsafe { biaslab_denoiser_image_shape(d, &mut w, &mut h) }, BiaslabStatus::Ok);
    assert_eq!((w, h), (16, 16));

    // A uniform green image is class 1 under the built-in palette.
    let img: Vec<f32> = (0..4).flat_map(|_| [0.0f32, 1.0, 0.0]).collect();
    let (mut pred, mut aligned) = (0u8, false);
    let s = unsafe { biaslab_color_oracle(img.as_ptr(), 2, 2, ptr::null(), 1, 240.0 / 255.0, &mut pred, &mut aligned) };
    assert_eq!(s, BiaslabStatus::Ok);
    assert_eq!((pred, aligned), (1, true));
    let white = vec![1.0f32; 12];
    let s = unsafe { biaslab_color_oracle(white.as_ptr(), 2, 2, ptr::null(), 1, 240.0 / 255.0, &mut pred, &mut aligned) };
    assert_eq!(s, BiaslabStatus::Metrics);
    assert!(last_error().starts_with("all_pixels_white"));

    unsafe {
        biaslab_denoiser_free(d);
        biaslab_dataset_free(ds);
        biaslab_dataset_free(loaded);
        biaslab_dataset_free(ptr::null_mut());
    }
}
