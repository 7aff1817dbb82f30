//! Values computed once at 40 significant digits by direct integration of the
//! density, then frozen here.

use lossforge::glmga::GlmgaParams;
use lossforge::specfun::{reg_inc_beta, std_normal_quantile};

fn assert_rel(got: f64, want: f64, tol: f64) {
    let e = (got - want).abs() / want.abs();
    assert!(e <= tol, "got {got}, want {want}, relative error {e:.2e}");
}

#[test]
fn incomplete_beta_reference_points() {
    let cases = [
        (0.5, 2.0, 0.3, 0.73942545263197424253),
        (0.1, 10.0, 1e-4, 0.52437712896005634404),
        (10.0, 0.1, 0.999, 0.34033333977917493197),
        (2.5, 3.5, 0.6, 0.81968506586778380083),
        (0.5, 0.5, 0.02, 0.090334470601733097648),
        (30.0, 40.0, 0.45, 0.64474800855856811281),
    ];
    for (m, n, x, want) in cases {
        assert_rel(reg_inc_beta(m, n, x).unwrap(), want, 1e-13);
    }
}

#[test]
fn normal_quantile_reference_point() {
    assert_rel(std_normal_quantile(0.975).unwrap(), 1.9599639845400542355, 1e-14);
}

#[test]
fn glmga_reference_point() {
    let g = GlmgaParams::new(0.3, 2.0, 1.0).unwrap();
    assert_rel(g.cdf(1.0).unwrap(), 0.23019964108049898065, 1e-13);
    assert_rel(g.cdf(10.0).unwrap(), 0.97715318765653518458, 1e-13);
    assert_rel(g.mean().unwrap(), 2.4545518046880203964, 1e-13);
    assert_rel(g.moment(1.5).unwrap(), 10.326784868916565997, 1e-12);
    assert_rel(g.quantile(0.99).unwrap(), 16.418599352013462855, 1e-12);
    assert_rel(g.tvar(0.99).unwrap(), 41.047258546138113567, 1e-11);
    assert_rel(g.stop_loss_premium(5.0).unwrap(), 0.54393447413319051498, 1e-11);
    assert_rel(g.mean_excess(5.0).unwrap(), 7.5121745206060665105, 1e-11);
}
