use lossforge::simlab::{
    boxplot_summary, doksum_half_width, estimator_qq_data, run_simulation, simulate_dataset, SimConfig,
};
use proptest::prelude::*;

fn small_config(seed: u64) -> SimConfig {
    let mut cfg = SimConfig::standard([-1.0, 0.5], [1.0, 0.5], 1.0, vec![60, 120], 12, seed);
    cfg.report_caps.insert("a".into(), 5.0);
    cfg
}

#[test]
fn simulation_is_reproducible() {
    let a = run_simulation(&small_config(3)).unwrap();
    let b = run_simulation(&small_config(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    assert_ne!(a, run_simulation(&small_config(4)).unwrap());
}

#[test]
fn rows_are_internally_consistent() {
    let cfg = small_config(5);
    let report = run_simulation(&cfg).unwrap();
    assert_eq!(report.rows.len(), cfg.sample_sizes.len() * cfg.parameter_names().len());
    for row in &report.rows {
        let r = cfg.n_replications;
        assert_eq!(row.n_included + row.n_failed_fits + row.n_boundary, r, "{}", row.parameter);
        assert!(row.n_nonconverged <= r - row.n_failed_fits);
        let floor = row.bias * row.bias * (1.0 - 1.0 / row.n_included as f64);
        assert!(row.mse >= floor - 1e-12 * row.mse.max(1.0), "{}: mse {} < {floor}", row.parameter, row.mse);
        let m = row.n_included as f64;
        let identity = row.variance * (m - 1.0) / m + row.bias * row.bias;
        assert!((row.mse - identity).abs() <= 1e-9 * row.mse.max(1e-12));
        if let (Some(ratio), Some(asym)) = (row.variance_ratio, row.asymptotic_variance) {
            assert!((ratio - row.variance / asym).abs() <= 1e-12 * ratio.max(1.0));
        }
    }
    for &n in &cfg.sample_sizes {
        assert_eq!(report.estimates("a", n).len(), report.replicates.iter().filter(|o| o.n == n && o.estimates.is_some()).count());
    }
}

#[test]
fn datasets_have_the_configured_shape() {
    let cfg = small_config(6);
    let s = simulate_dataset(&cfg, 75, 9).unwrap();
    assert_eq!(s.len(), 75);
    assert_eq!(s.covariate_names, vec!["x1".to_string(), "x2".to_string()]);
    assert!(s.losses.iter().all(|y| *y > 0.0 && y.is_finite()));
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut cfg = small_config(1);
    cfg.n_replications = 1;
    assert!(run_simulation(&cfg).is_err());
    let mut cfg = small_config(1);
    cfg.sample_sizes = vec![200, 100];
    assert!(run_simulation(&cfg).is_err());
    let mut cfg = small_config(1);
    cfg.sample_sizes.clear();
    assert!(run_simulation(&cfg).is_err());
}

#[test]
fn config_round_trips_through_json() {
    let cfg = small_config(8);
    let back: SimConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn doksum_constant() {
    assert!((doksum_half_width(100) - 8.8834).abs() < 1e-3);
}

proptest! {
    #[test]
    fn boxplot_five_numbers_are_ordered(v in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let b = boxplot_summary(&v, None).unwrap();
        prop_assert!(b.min <= b.lower_whisker && b.lower_whisker <= b.q1);
        prop_assert!(b.q1 <= b.median && b.median <= b.q3);
        prop_assert!(b.q3 <= b.upper_whisker && b.upper_whisker <= b.max);
        prop_assert_eq!(b.n_included, v.len());
    }

    #[test]
    fn constant_estimates_have_no_outliers(c in -10.0f64..10.0, n in 1usize..50) {
        let b = boxplot_summary(&vec![c; n], None).unwrap();
        for v in [b.lower_whisker, b.q1, b.median, b.q3, b.upper_whisker] {
            prop_assert_eq!(v, c);
        }
        prop_assert_eq!(b.n_outliers, 0);
    }

    #[test]
    fn estimator_qq_is_monotone(v in prop::collection::vec(-10.0f64..10.0, 3..100)) {
        prop_assume!(v.iter().any(|x| *x != v[0]));
        let q = estimator_qq_data(&v).unwrap();
        prop_assert!(q.standardized.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(q.theoretical.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(q.lower.iter().zip(&q.upper).all(|(l, u)| l <= u));
    }
}
