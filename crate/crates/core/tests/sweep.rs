use std::collections::BTreeMap;

use biaslab::dataset::SyntheticBiasedSpec;
use biaslab::metrics::DEFAULT_WHITE_THRESHOLD;
use biaslab::samplers::{SamplerConfig, SamplerKind};
use biaslab::sweep::{
    read_rows, rows_to_csv, run_sweep_with, AxisValue, DenoiserSource, Grid, SweepError, SweepSpec,
};

fn source() -> SyntheticBiasedSpec {
    SyntheticBiasedSpec { per_class: 6, classes: vec![1, 4], rho: 0.75, size: 16, seed: 4 }
}

fn spec(axes: BTreeMap<String, Vec<AxisValue>>) -> SweepSpec {
    SweepSpec {
        denoiser: DenoiserSource::Synthetic(source()),
        sampler: SamplerConfig::new(SamplerKind::Edm),
        axes,
        samples_per_class: 5,
        classes: None,
        alpha: 0.05,
        seed: 31,
        bias_axis: 0,
        white_threshold: DEFAULT_WHITE_THRESHOLD,
        record_wall_time: false,
    }
}

fn nums(v: &[f64]) -> Vec<AxisValue> {
    v.iter().map(|&x| AxisValue::Num(x)).collect()
}

#[test]
fn two_by_two_grid_gives_four_rows() {
    let ds = source().build().unwrap();
    let axes = BTreeMap::from([("n_steps".into(), nums(&[3.0, 5.0])), ("s_churn".into(), nums(&[0.0, 4.0]))]);
    let rows = run_sweep_with(&spec(axes), &ds, None).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.n, 10);
        assert!(r.ci_lower <= r.rho_hat && r.rho_hat <= r.ci_upper);
        assert_eq!(r.wall_ms, 0.0);
    }
}

#[test]
fn empty_axes_rejected() {
    assert!(matches!(Grid::new(&BTreeMap::new()), Err(SweepError::InvalidSpec(_))));
    let axes = BTreeMap::from([("w".to_string(), vec![])]);
    assert!(matches!(Grid::new(&axes), Err(SweepError::InvalidSpec(_))));
}

#[test]
fn cells_do_not_depend_on_siblings() {
    // A cell's result is the same whether or not other cells run with it.
    let ds = source().build().unwrap();
    let both = run_sweep_with(&spec(BTreeMap::from([("n_steps".into(), nums(&[3.0, 5.0]))])), &ds, None).unwrap();
    let alone = run_sweep_with(&spec(BTreeMap::from([("n_steps".into(), nums(&[5.0]))])), &ds, None).unwrap();
    assert_eq!(both[1], alone[0]);
}

#[test]
fn csv_round_trip() {
    let ds = source().build().unwrap();
    let rows = run_sweep_with(&spec(BTreeMap::from([("w".into(), nums(&[0.0, 0.5]))])), &ds, Some(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    std::fs::write(&path, rows_to_csv(&rows).unwrap()).unwrap();
    let back = read_rows(&path).unwrap();
    assert_eq!(rows_to_csv(&back).unwrap(), rows_to_csv(&rows).unwrap());
}
