//! Monte Carlo study of the GLMGA regression estimators: simulate data sets
//! with standard-normal covariates, refit, and summarize bias, MSE and the
//! ratio of sampling to asymptotic variance. Also normal QQ data with
//! Doksum bands and boxplot summaries for the estimates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::LossSample;
use crate::error::{Error, Result};
use crate::gof::{empirical_quantile, normal_plotting_positions};
use crate::glmga::{GlmgaParams, SamplingMethod};
use crate::inference::{self, FitOptions, RegressionCoefficients, RegressionSpec};
use crate::rng;
use crate::specfun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovariateLaw {
    #[default]
    StandardNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedMode {
    /// Each `(n, replicate)` gets its own derived seed.
    #[default]
    PerReplicate,
    /// Every replicate of a sample size reuses one seed, so all replicates
    /// coincide. Useful only as a determinism check.
    Identical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// `beta` and `alpha` each start with an intercept; every further entry
    /// gets its own standard-normal covariate.
    pub true_coefficients: RegressionCoefficients,
    pub sample_sizes: Vec<usize>,
    pub n_replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub covariate_law: CovariateLaw,
    #[serde(default)]
    pub seed_mode: SeedMode,
    /// Upper display limits per parameter name; estimates above are counted.
    #[serde(default)]
    pub report_caps: BTreeMap<String, f64>,
    #[serde(default = "default_true")]
    pub compute_std_errors: bool,
}

fn default_true() -> bool {
    true
}

impl SimConfig {
    /// The two-covariate design `ln σ = β0 + β1 x1`, `ln b = α0 + α1 x2`.
    pub fn standard(beta: [f64; 2], alpha: [f64; 2], a: f64, sample_sizes: Vec<usize>, n_replications: usize, seed: u64) -> Self {
        Self {
            true_coefficients: RegressionCoefficients {
                beta: beta.to_vec(),
                alpha: alpha.to_vec(),
                eta: a.ln(),
            },
            sample_sizes,
            n_replications,
            seed,
            covariate_law: CovariateLaw::StandardNormal,
            seed_mode: SeedMode::PerReplicate,
            report_caps: BTreeMap::new(),
            compute_std_errors: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.true_coefficients;
        if c.beta.is_empty() || c.alpha.is_empty() {
            return Err(Error::Config("beta and alpha need at least an intercept".into()));
        }
        if c.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("true coefficients must be finite".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::Config("sample_sizes must not be empty".into()));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sample_sizes must be strictly ascending".into()));
        }
        if self.sample_sizes[0] <= self.spec().n_params() {
            return Err(Error::Config(format!(
                "sample sizes must exceed the {} regression parameters",
                self.spec().n_params()
            )));
        }
        if self.n_replications < 2 {
            return Err(Error::Config("n_replications must be at least 2".into()));
        }
        Ok(())
    }

    fn sigma_columns(&self) -> Vec<String> {
        (1..self.true_coefficients.beta.len()).map(|j| format!("x{j}")).collect()
    }

    fn b_columns(&self) -> Vec<String> {
        let off = self.true_coefficients.beta.len() - 1;
        (1..self.true_coefficients.alpha.len()).map(|j| format!("x{}", off + j)).collect()
    }

    pub fn spec(&self) -> RegressionSpec {
        RegressionSpec {
            sigma_columns: self.sigma_columns(),
            b_columns: self.b_columns(),
            sigma_intercept: true,
            b_intercept: true,
        }
    }

    /// Reported parameter names: coefficients, then `a` (not `η`).
    pub fn parameter_names(&self) -> Vec<String> {
        let mut names = vec!["beta0".to_string()];
        names.extend((1..self.true_coefficients.beta.len()).map(|j| format!("beta{j}")));
        names.push("alpha0".into());
        names.extend((1..self.true_coefficients.alpha.len()).map(|j| format!("alpha{j}")));
        names.push("a".into());
        names
    }

    fn truth(&self) -> Vec<f64> {
        let c = &self.true_coefficients;
        let mut t = c.beta.clone();
        t.extend_from_slice(&c.alpha);
        t.push(c.eta.exp());
        t
    }

    fn replicate_seed(&self, n: usize, r: usize) -> u64 {
        match self.seed_mode {
            SeedMode::PerReplicate => rng::derive_seed(self.seed, &[n as u64, r as u64]),
            SeedMode::Identical => rng::derive_seed(self.seed, &[n as u64]),
        }
    }
}

/// Draws one regression data set.
pub fn simulate_dataset(config: &SimConfig, n: usize, seed: u64) -> Result<LossSample> {
    let mut r = rng::seeded(seed);
    let c = &config.true_coefficients;
    let names: Vec<String> = config.sigma_columns().into_iter().chain(config.b_columns()).collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); names.len()];
    let mut losses = Vec::with_capacity(n);
    let a = c.eta.exp();
    let ks = c.beta.len() - 1;
    for _ in 0..n {
        let x: Vec<f64> = (0..names.len()).map(|_| StandardNormal.sample(&mut r)).collect();
        let ln_sigma = c.beta[0] + (0..ks).map(|j| c.beta[j + 1] * x[j]).sum::<f64>();
        let ln_b = c.alpha[0] + (0..c.alpha.len() - 1).map(|j| c.alpha[j + 1] * x[ks + j]).sum::<f64>();
        let p = GlmgaParams::new(ln_sigma.exp(), a, ln_b.exp())?;
        losses.push(p.draw(SamplingMethod::TwoGamma, &mut r));
        for (col, v) in cols.iter_mut().zip(x) {
            col.push(v);
        }
    }
    if let Some(bad) = losses.iter().find(|y| !(**y > 0.0 && y.is_finite())) {
        return Err(Error::numeric(format!("simulated loss {bad} is outside (0, inf)")));
    }
    LossSample::with_covariates(losses, names, cols)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub n: usize,
    pub replicate: usize,
    /// Reported parameters (see [`SimConfig::parameter_names`]).
    pub estimates: Option<Vec<f64>>,
    pub std_errors: Option<Vec<f64>>,
    pub converged: bool,
    pub boundary: bool,
    pub error: Option<String>,
}

impl ReplicateOutcome {
    fn usable(&self) -> bool {
        self.estimates.is_some() && !self.boundary
    }
}

fn run_replicate(config: &SimConfig, spec: &RegressionSpec, options: &FitOptions, n: usize, r: usize) -> ReplicateOutcome {
    let mut out = ReplicateOutcome {
        n,
        replicate: r,
        estimates: None,
        std_errors: None,
        converged: false,
        boundary: false,
        error: None,
    };
    let fit = simulate_dataset(config, n, config.replicate_seed(n, r))
        .and_then(|s| inference::fit_regression(spec, &s, options));
    match fit {
        Ok(f) => {
            let a = f.unconstrained.last().copied().unwrap_or(f64::NAN).exp();
            let mut est = f.estimates.clone();
            *est.last_mut().expect("eta present") = a;
            out.std_errors = f.std_errors.map(|mut se| {
                // Delta method for a = exp(η).
                *se.last_mut().expect("eta present") *= a;
                se
            });
            out.estimates = Some(est);
            out.converged = f.converged;
            out.boundary = f.boundary;
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub parameter: String,
    pub n: usize,
    pub truth: f64,
    pub mean: f64,
    pub median: f64,
    pub bias: f64,
    /// `mean / truth - 1`.
    pub relative_bias: f64,
    pub mse: f64,
    /// Sample variance of the estimates (divisor R - 1).
    pub variance: f64,
    /// Mean of the squared standard errors.
    pub asymptotic_variance: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub n_included: usize,
    pub n_failed_fits: usize,
    pub n_boundary: usize,
    pub n_nonconverged: usize,
    pub outlier_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub parameter_names: Vec<String>,
    pub rows: Vec<SimRow>,
    /// Sample sizes for which no fit succeeded, with the first error.
    pub size_errors: BTreeMap<usize, String>,
    pub replicates: Vec<ReplicateOutcome>,
}

impl SimReport {
    pub fn row(&self, parameter: &str, n: usize) -> Option<&SimRow> {
        self.rows.iter().find(|r| r.parameter == parameter && r.n == n)
    }

    /// Estimates of one parameter at one sample size from every fit that
    /// returned, boundary fits included.
    pub fn estimates(&self, parameter: &str, n: usize) -> Vec<f64> {
        let Some(j) = self.parameter_names.iter().position(|p| p == parameter) else {
            return Vec::new();
        };
        self.replicates
            .iter()
            .filter(|o| o.n == n)
            .filter_map(|o| o.estimates.as_ref().map(|e| e[j]))
            .collect()
    }

    /// The summary rows as CSV.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |v: f64| crate::report::format_float(v);
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        let to_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record([
            "parameter", "n", "truth", "mean", "median", "bias", "relative_bias", "mse", "variance",
            "asymptotic_variance", "variance_ratio", "n_included", "n_failed_fits", "n_boundary",
            "n_nonconverged", "outlier_count",
        ])
        .map_err(to_err)?;
        for r in &self.rows {
            w.write_record([
                r.parameter.clone(),
                r.n.to_string(),
                fmt(r.truth),
                fmt(r.mean),
                fmt(r.median),
                fmt(r.bias),
                fmt(r.relative_bias),
                fmt(r.mse),
                fmt(r.variance),
                opt(r.asymptotic_variance),
                opt(r.variance_ratio),
                r.n_included.to_string(),
                r.n_failed_fits.to_string(),
                r.n_boundary.to_string(),
                r.n_nonconverged.to_string(),
                r.outlier_count.to_string(),
            ])
            .map_err(to_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Runs every `(n, replicate)` task (in parallel on the rayon pool) and
/// aggregates in index order, so the report does not depend on scheduling.
pub fn run_simulation(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let spec = config.spec();
    let mut options = FitOptions::default();
    options.compute_std_errors = config.compute_std_errors;
    let tasks: Vec<(usize, usize)> = config
        .sample_sizes
        .iter()
        .flat_map(|&n| (0..config.n_replications).map(move |r| (n, r)))
        .collect();
    let replicates: Vec<ReplicateOutcome> = tasks
        .par_iter()
        .map(|&(n, r)| run_replicate(config, &spec, &options, n, r))
        .collect();

    let names = config.parameter_names();
    let truth = config.truth();
    let mut rows = Vec::new();
    let mut size_errors = BTreeMap::new();
    for &n in &config.sample_sizes {
        let outs: Vec<&ReplicateOutcome> = replicates.iter().filter(|o| o.n == n).collect();
        let n_failed = outs.iter().filter(|o| o.estimates.is_none()).count();
        if n_failed == outs.len() {
            let first = outs.iter().find_map(|o| o.error.clone()).unwrap_or_default();
            size_errors.insert(n, format!("all {} fits failed: {first}", outs.len()));
            continue;
        }
        let n_boundary = outs.iter().filter(|o| o.estimates.is_some() && o.boundary).count();
        let n_nonconv = outs.iter().filter(|o| o.estimates.is_some() && !o.converged).count();
        let used: Vec<&ReplicateOutcome> = outs.iter().copied().filter(|o| o.usable()).collect();
        for (j, name) in names.iter().enumerate() {
            let est: Vec<f64> = used.iter().map(|o| o.estimates.as_ref().unwrap()[j]).collect();
            let all: Vec<f64> = outs.iter().filter_map(|o| o.estimates.as_ref().map(|e| e[j])).collect();
            let cap = config.report_caps.get(name);
            let outlier_count = cap.map_or(0, |c| all.iter().filter(|&&v| v > *c).count());
            if est.is_empty() {
                continue;
            }
            let m = est.len() as f64;
            let mean = est.iter().sum::<f64>() / m;
            let mse = est.iter().map(|v| (v - truth[j]).powi(2)).sum::<f64>() / m;
            let variance = if est.len() > 1 {
                est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            let ses: Vec<f64> = used
                .iter()
                .filter_map(|o| o.std_errors.as_ref().map(|s| s[j] * s[j]))
                .collect();
            let asym = (!ses.is_empty()).then(|| ses.iter().sum::<f64>() / ses.len() as f64);
            rows.push(SimRow {
                parameter: name.clone(),
                n,
                truth: truth[j],
                mean,
                median: empirical_quantile(&est, 0.5)?,
                bias: mean - truth[j],
                relative_bias: mean / truth[j] - 1.0,
                mse,
                variance,
                asymptotic_variance: asym,
                variance_ratio: asym.map(|a| variance / a),
                n_included: est.len(),
                n_failed_fits: n_failed,
                n_boundary,
                n_nonconverged: n_nonconv,
                outlier_count,
            });
        }
    }
    Ok(SimReport {
        config: config.clone(),
        parameter_names: names,
        rows,
        size_errors,
        replicates,
    })
}

/// Half-width, in percent, of the 95% Kolmogorov-Smirnov band for a QQ plot
/// of `n` points: `89.5 / (√n (1 - 0.01/√n + 0.85/n))`.
pub fn doksum_half_width(n: usize) -> f64 {
    let nf = n as f64;
    let s = nf.sqrt();
    89.5 / (s * (1.0 - 0.01 / s + 0.85 / nf))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorQq {
    /// Plotting probabilities `(i - 0.375)/(n + 0.25)`.
    pub probabilities: Vec<f64>,
    pub theoretical: Vec<f64>,
    /// Sorted estimates standardized by their mean and standard deviation.
    pub standardized: Vec<f64>,
    /// Band half-width in percent.
    pub half_width_pct: f64,
    /// Band at each point: `Φ^{-1}(p ∓ k/100)`, infinite where clipped.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub fraction_inside: f64,
}

/// Normal QQ data for a vector of estimates with the Doksum band.
pub fn estimator_qq_data(estimates: &[f64]) -> Result<EstimatorQq> {
    let n = estimates.len();
    if n < 3 {
        return Err(Error::domain("QQ data needs at least 3 estimates"));
    }
    let m = estimates.iter().sum::<f64>() / n as f64;
    let sd = (estimates.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::domain("estimates have degenerate variance"));
    }
    let mut z: Vec<f64> = estimates.iter().map(|v| (v - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let k = doksum_half_width(n);
    let d = k / 100.0;
    let probabilities: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.375) / (n as f64 + 0.25)).collect();
    let inv = |p: f64| {
        if p <= 0.0 {
            f64::NEG_INFINITY
        } else if p >= 1.0 {
            f64::INFINITY
        } else {
            specfun::std_normal_quantile(p).expect("p in (0,1)")
        }
    };
    let lower: Vec<f64> = probabilities.iter().map(|p| inv(p - d)).collect();
    let upper: Vec<f64> = probabilities.iter().map(|p| inv(p + d)).collect();
    let inside = z
        .iter()
        .zip(lower.iter().zip(&upper))
        .filter(|(v, (lo, hi))| **v >= **lo && **v <= **hi)
        .count();
    Ok(EstimatorQq {
        probabilities,
        theoretical: normal_plotting_positions(n),
        standardized: z,
        half_width_pct: k,
        lower,
        upper,
        fraction_inside: inside as f64 / n as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub lower_whisker: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub upper_whisker: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Points beyond the 1.5 IQR fences.
    pub n_outliers: usize,
    /// Points above the display cap, if one was given.
    pub n_above_cap: usize,
    /// Points at or below the cap.
    pub n_included: usize,
}

/// Five-number summary with 1.5 IQR whiskers (type-7 quartiles).
pub fn boxplot_summary(estimates: &[f64], cap: Option<f64>) -> Result<BoxplotSummary> {
    if estimates.is_empty() {
        return Err(Error::domain("boxplot of an empty vector"));
    }
    let q1 = empirical_quantile(estimates, 0.25)?;
    let median = empirical_quantile(estimates, 0.5)?;
    let q3 = empirical_quantile(estimates, 0.75)?;
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = estimates.iter().copied().filter(|v| *v >= lo_fence && *v <= hi_fence);
    // Interpolated quartiles can sit between a fenced-out point and the
    // next one, so the whiskers are clamped to the box.
    let lower_whisker = inside.clone().fold(f64::INFINITY, f64::min).min(q1);
    let upper_whisker = inside.fold(f64::NEG_INFINITY, f64::max).max(q3);
    let n_above_cap = cap.map_or(0, |c| estimates.iter().filter(|&&v| v > c).count());
    Ok(BoxplotSummary {
        lower_whisker,
        q1,
        median,
        q3,
        upper_whisker,
        mean: estimates.iter().sum::<f64>() / estimates.len() as f64,
        min: estimates.iter().copied().fold(f64::INFINITY, f64::min),
        max: estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n_outliers: estimates.iter().filter(|&&v| v < lo_fence || v > hi_fence).count(),
        n_above_cap,
        n_included: estimates.len() - n_above_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doksum_at_100() {
        assert!((doksum_half_width(100) - 8.883_374).abs() < 1e-5);
        assert!(doksum_half_width(400) < doksum_half_width(100));
        assert!(doksum_half_width(2000) < doksum_half_width(400));
    }

    #[test]
    fn constant_boxplot() {
        let b = boxplot_summary(&[2.0; 7], None).unwrap();
        for v in [b.lower_whisker, b.q1, b.median, b.q3, b.upper_whisker] {
            assert_eq!(v, 2.0);
        }
        assert_eq!(b.n_outliers, 0);
    }

    #[test]
    fn identical_seeds_give_zero_variance() {
        let mut cfg = SimConfig::standard([-1.0, 0.5], [1.0, 0.5], 0.5, vec![150], 2, 11);
        cfg.seed_mode = SeedMode::Identical;
        let rep = run_simulation(&cfg).unwrap();
        for r in &rep.rows {
            assert_eq!(r.variance, 0.0, "{}", r.parameter);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SimConfig::standard([-1.0, 0.5], [1.0, 0.5], 0.5, vec![200, 100], 10, 1);
        assert!(cfg.validate().is_err());
        cfg.sample_sizes = vec![100];
        cfg.n_replications = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn qq_data_shape() {
        let est: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let q = estimator_qq_data(&est).unwrap();
        assert_eq!(q.standardized.len(), 50);
        assert!(q.standardized.windows(2).all(|w| w[0] <= w[1]));
        assert!(estimator_qq_data(&[1.0, 1.0, 1.0]).is_err());
    }
}
