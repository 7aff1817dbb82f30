mod common;

use common::{integrate_above, integrate_positive, rel_err};
use lossforge::competitors::{FrechetParams, Gb2Params, LognormalParams, LomaxParams, LossDistribution};
use lossforge::family::{Family, Model};
use lossforge::glmga::{limiting_density, GlmgaParams, SamplingMethod};
use lossforge::gof::{ks_test, ks_two_sample};
use lossforge::rng::seeded;
use lossforge::Error;
use proptest::prelude::*;

fn glmga_params() -> impl Strategy<Value = GlmgaParams> {
    (0.05f64..1.5, 0.2f64..5.0, 0.2f64..5.0).prop_map(|(s, a, b)| GlmgaParams::new(s, a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn glmga_integrates_to_one(g in glmga_params()) {
        let mass = integrate_positive(|y| g.pdf(y).unwrap(), 1e-12);
        prop_assert!((mass - 1.0).abs() <= 1e-8, "mass {mass}");
    }

    #[test]
    fn glmga_cdf_quantile_roundtrip(g in glmga_params(), u in 1e-5f64..(1.0 - 1e-5)) {
        let y = g.quantile(u).unwrap();
        prop_assert!((g.cdf(y).unwrap() - u).abs() <= 1e-9);
    }

    #[test]
    fn glmga_equals_gb2_substitution(g in glmga_params(), u in 0.001f64..0.999) {
        let y = g.quantile(u).unwrap();
        let gb2 = Gb2Params::from_glmga(&g);
        prop_assert!(rel_err(gb2.pdf(y).unwrap(), g.pdf(y).unwrap()) <= 1e-12);
        prop_assert!((gb2.cdf(y).unwrap() - g.cdf(y).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn glmga_cdf_monotone(g in glmga_params(), y1 in 1e-3f64..1e3, y2 in 1e-3f64..1e3) {
        let (lo, hi) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
        prop_assert!(g.cdf(lo).unwrap() <= g.cdf(hi).unwrap());
    }

    #[test]
    fn glmga_tvar_dominates_var(
        s in 0.05f64..0.49, a in 0.2f64..5.0, b in 0.2f64..5.0, p in 0.5f64..0.999
    ) {
        let g = GlmgaParams::new(s, a, b).unwrap();
        prop_assert!(g.tvar(p).unwrap() >= g.quantile(p).unwrap());
        let r = g.quantile(p).unwrap();
        prop_assert!(g.stop_loss_premium(r).unwrap() >= 0.0);
        prop_assert!(g.mean_excess(r).unwrap() >= 0.0);
    }
}

#[test]
fn moments_beyond_the_tail_index_do_not_exist() {
    let g = GlmgaParams::new(0.3, 2.0, 1.0).unwrap();
    assert!(matches!(g.moment(2.0), Err(Error::Nonexistence(_))));
    assert!(matches!(GlmgaParams::new(0.6, 2.0, 1.0).unwrap().tvar(0.9), Err(Error::Nonexistence(_))));
    assert!(g.moment(1.6).is_ok());
}

#[test]
fn invalid_parameters_are_domain_errors() {
    for (s, a, b) in [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, f64::NAN)] {
        assert!(matches!(GlmgaParams::new(s, a, b), Err(Error::Domain(_))));
    }
    let g = GlmgaParams::new(0.3, 2.0, 1.0).unwrap();
    assert!(g.pdf(0.0).is_err());
    assert!(g.quantile(1.0).is_err());
    assert!(GlmgaParams::new(0.5, 0.3, 1.0).unwrap().mode().is_err());
}

#[test]
fn mean_exceeds_median_exceeds_mode() {
    for k in 1..10 {
        let g = GlmgaParams::new(0.05 * k as f64, 1.0, 2.0).unwrap();
        let (mean, median, mode) = (g.mean().unwrap(), g.quantile(0.5).unwrap(), g.mode().unwrap());
        assert!(mean > median && median > mode, "sigma {}: {mean} {median} {mode}", g.sigma);
    }
}

#[test]
fn mode_maximizes_density() {
    let g = GlmgaParams::new(0.3, 2.0, 1.5).unwrap();
    let m = g.mode().unwrap();
    let fm = g.pdf(m).unwrap();
    for f in [0.9, 0.99, 1.01, 1.1] {
        assert!(g.pdf(m * f).unwrap() < fm);
    }
}

#[test]
fn tail_expansion_second_order_term_improves_accuracy() {
    let g = GlmgaParams::new(0.3, 2.0, 1.0).unwrap();
    let t = g.tail_expansion();
    assert!((t.xi - 0.6).abs() < 1e-15);
    for y in [20.0_f64, 50.0, 200.0] {
        let first = t.c * y.powf(-1.0 / t.xi);
        let second = first * (1.0 + t.d * y.powf(-1.0 / g.sigma));
        let sf = g.sf(y).unwrap();
        assert!((second - sf).abs() < (first - sf).abs(), "y={y}");
    }
}

#[test]
fn limiting_density_is_reached_as_shape_grows() {
    let (sigma, phi) = (0.5, 1.0_f64);
    let grid: Vec<f64> = (1..200).map(|i| 0.02 * i as f64).collect();
    let sup = |a: f64| {
        let g = GlmgaParams::new(sigma, a, a * phi.powf(1.0 / sigma) / 2.0).unwrap();
        grid.iter()
            .map(|&y| (g.pdf(y).unwrap() - limiting_density(sigma, phi, y).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let d: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&a| sup(a)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn limiting_density_special_case_and_normalization() {
    let half_normal_inverse = 2.0 / std::f64::consts::PI.sqrt() * (-1.0f64).exp();
    assert!(rel_err(limiting_density(0.5, 1.0, 1.0).unwrap(), half_normal_inverse) < 1e-14);
    let mass = integrate_positive(|y| limiting_density(0.4, 2.0, y).unwrap(), 1e-12);
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn glmga_with_half_sigma_integrates_to_one() {
    let mass = integrate_positive(|y| GlmgaParams::new(0.4, 3.0, 2.0).unwrap().pdf(y).unwrap(), 1e-12);
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn scaling_closure() {
    let (sigma, a, b, k) = (0.3, 2.0, 1.0, 7.5);
    let g = GlmgaParams::new(sigma, a, b).unwrap();
    let scaled: Vec<f64> = g.sample(20_000, 41).into_iter().map(|x| k * x).collect();
    let target = GlmgaParams::new(sigma, a, b * k.powf(-1.0 / sigma)).unwrap();
    let (_, p) = ks_test(&scaled, |y| target.cdf(y).unwrap()).unwrap();
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn sampling_representations_agree_with_the_cdf() {
    let g = GlmgaParams::new(0.4, 0.8, 2.0).unwrap();
    let mut all = Vec::new();
    for (i, m) in [SamplingMethod::TwoGamma, SamplingMethod::GammaMixture, SamplingMethod::HalfNormalGamma]
        .into_iter()
        .enumerate()
    {
        let x = g.sample_with(m, 20_000, 70 + i as u64);
        let (_, p) = ks_test(&x, |y| g.cdf(y).unwrap()).unwrap();
        assert!(p > 0.001, "{m:?}: p = {p}");
        all.push(x);
    }
    let (_, p) = ks_two_sample(&all[0], &all[2]).unwrap();
    assert!(p > 0.001);
}

#[test]
fn sampling_is_reproducible() {
    let g = GlmgaParams::new(0.3, 2.0, 1.0).unwrap();
    assert_eq!(g.sample(100, 5), g.sample(100, 5));
    assert_ne!(g.sample(100, 5), g.sample(100, 6));
}

fn comparators() -> Vec<Model> {
    [
        (Family::Glogm, vec![0.4, 1.5]),
        (Family::Gb2, vec![2.0, -1.5, 0.7, 1.8]),
        (Family::Gb2, vec![1.0, 2.0, 1.5, 0.5]),
        (Family::Lomax, vec![2.0, 1.7]),
        (Family::Loggamma, vec![2.5, 3.0]),
        (Family::Frechet, vec![1.3, 2.0]),
        (Family::Lognormal, vec![-0.5, 1.2]),
        (Family::Gamma, vec![0.7, 2.0]),
    ]
    .into_iter()
    .map(|(f, p)| Model::from_params(f, &p).unwrap())
    .collect()
}

#[test]
fn comparators_integrate_to_one() {
    for m in comparators() {
        let mass = if m.family() == Family::Loggamma {
            integrate_above(|y| m.pdf(y).unwrap(), 1.0, 1e-12)
        } else {
            integrate_positive(|y| m.pdf(y).unwrap(), 1e-12)
        };
        assert!((mass - 1.0).abs() <= 1e-8, "{:?}: mass {mass}", m);
    }
}

#[test]
fn comparators_cdf_matches_integrated_density() {
    for m in comparators() {
        let y = m.quantile(0.3).unwrap();
        let upper = integrate_above(|t| m.pdf(t).unwrap(), y, 1e-12);
        assert!((upper - 0.7).abs() <= 1e-8, "{:?}: {upper}", m);
    }
}

#[test]
fn comparators_roundtrip() {
    for m in comparators() {
        for u in [1e-5, 0.01, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-5] {
            let y = m.quantile(u).unwrap();
            assert!((m.cdf(y).unwrap() - u).abs() <= 1e-9, "{:?} at {u}", m);
        }
    }
}

#[test]
fn comparator_sampling_matches_cdf() {
    for (i, m) in comparators().into_iter().enumerate() {
        let x = m.sample_rng(5000, &mut seeded(90 + i as u64)).unwrap();
        let (_, p) = ks_test(&x, |y| m.cdf(y).unwrap()).unwrap();
        assert!(p > 0.001, "{:?}: p = {p}", m);
    }
}

#[test]
fn comparator_definitional_points() {
    assert!((LomaxParams::new(1.0, 2.0).unwrap().cdf(1.0).unwrap() - 0.75).abs() < 1e-15);
    let f = FrechetParams::new(1.7, 3.0).unwrap();
    assert!((f.cdf(3.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    let ln = LognormalParams::new(0.8, 1.1).unwrap();
    assert!(rel_err(ln.quantile(0.5).unwrap(), 0.8f64.exp()) < 1e-14);
}

#[test]
fn unconstrained_parameters_roundtrip() {
    for m in comparators() {
        let back = Model::from_unconstrained(m.family(), &m.to_unconstrained()).unwrap();
        for (x, y) in back.params().iter().zip(m.params()) {
            assert!(rel_err(*x, y) < 1e-12);
        }
    }
}
