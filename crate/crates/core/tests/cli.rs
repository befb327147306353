use std::path::Path;
use std::process::{Command, Output};

fn biaslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biaslab")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn dataset_sample_estimate_round() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.bt");
    let out = biaslab(&[
        "dataset", "--source", "synthetic", "--per-class", "6", "--classes", "0,1", "--rho", "0.9",
        "--seed", "3", "--out", p(&ds),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"kind": "edm", "n_steps": 6}"#).unwrap();
    let samples = dir.path().join("samples.bt");
    let out = biaslab(&[
        "sample", "--denoiser", p(&ds), "--config", p(&cfg), "--class", "1", "--count", "4", "--out",
        p(&samples), "--record-history",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("samples.history.bt").exists());

    let verdicts = dir.path().join("v.csv");
    let out = biaslab(&["estimate", "--samples", p(&samples), "--verdicts", p(&verdicts)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&verdicts).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn sweep_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{
          "denoiser": {"synthetic": {"per_class": 5, "classes": [2, 5], "rho": 0.8, "seed": 1}},
          "sampler": {"kind": "dpm_solver_1"},
          "axes": {"n_steps": [2, 4]},
          "samples_per_class": 4,
          "seed": 7
        }"#,
    )
    .unwrap();
    let csv = dir.path().join("rows.csv");
    let out = biaslab(&["sweep", "--spec", p(&spec), "--out-csv", p(&csv), "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n_steps,k,n,rho_hat,ci_lower,ci_upper,alpha,seed,wall_ms\n"));
    assert_eq!(text.lines().count(), 3);

    let svg = dir.path().join("plot.svg");
    let out = biaslab(&["plot", "--rows", p(&csv), "--x-axis", "n_steps", "--out", p(&svg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn error_categories_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = biaslab(&["sweep", "--spec", p(&missing)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:io_failure:"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"denoiser": {"synthetic": {"per_class": 2, "classes": [0], "rho": 0.5}},
        "sampler": {"kind": "edm"}, "axes": {"bogus": [1]}, "seed": 1}"#)
        .unwrap();
    let out = biaslab(&["sweep", "--spec", p(&bad)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:unknown_axis:"));

    let out = biaslab(&["dataset", "--source", "synthetic", "--rho", "1.5", "--out", "x.bt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:invalid_argument:"));

    let out = biaslab(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:usage:"));

    let junk = dir.path().join("junk.bt");
    std::fs::write(&junk, b"not a tensor file").unwrap();
    let out = biaslab(&["estimate", "--samples", p(&junk)]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}
