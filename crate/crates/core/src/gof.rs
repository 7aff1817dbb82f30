//! Goodness of fit: EDF statistics with parametric-bootstrap p-values, QQ
//! correlation, Kolmogorov p-values, the VaR backtest and information
//! criterion rankings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::competitors::LossDistribution;
use crate::data::LossSample;
use crate::error::{Error, Result};
use crate::family::{Family, Model};
use crate::inference::{self, FitOptions, FitResult, Structure};
use crate::rng;
use crate::specfun;

/// Probabilities entering the Anderson-Darling logs are clamped here.
pub const AD_CLAMP: f64 = 1e-12;

/// Share of failed bootstrap refits above which a p-value is unreliable.
pub const MAX_DROPPED_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Ks,
    Cvm,
    Ad,
}

/// KS, CvM and AD computed from one set of probability-integral transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdfStatistics {
    pub ks: f64,
    pub cvm: f64,
    pub ad: f64,
    /// Transforms clamped away from 0 or 1 for the AD logs.
    pub n_clamped: usize,
}

impl EdfStatistics {
    pub fn get(&self, s: Statistic) -> f64 {
        match s {
            Statistic::Ks => self.ks,
            Statistic::Cvm => self.cvm,
            Statistic::Ad => self.ad,
        }
    }

    /// From pairs `(F(y_i), 1 - F(y_i))`, in any order.
    pub fn from_cdf_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        let n = pairs.len();
        if n == 0 {
            return Err(Error::domain("goodness-of-fit statistics need a non-empty sample"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        let nf = n as f64;
        let mut ks = 0.0_f64;
        let mut cvm = 1.0 / (12.0 * nf);
        let mut ad_sum = 0.0;
        let mut n_clamped = 0;
        let clamp = |v: f64, count: &mut usize| {
            if v < AD_CLAMP {
                *count += 1;
                AD_CLAMP
            } else {
                v
            }
        };
        for (i, &(u, _)) in pairs.iter().enumerate() {
            let i1 = (i + 1) as f64;
            ks = ks.max(i1 / nf - u).max(u - i as f64 / nf);
            cvm += (u - (2.0 * i1 - 1.0) / (2.0 * nf)).powi(2);
            let lo = clamp(u, &mut n_clamped).ln();
            let hi = clamp(pairs[n - 1 - i].1, &mut n_clamped).ln();
            ad_sum += (2.0 * i1 - 1.0) * (lo + hi);
        }
        Ok(Self {
            ks,
            cvm,
            ad: -nf - ad_sum / nf,
            n_clamped,
        })
    }

    pub fn from_model(data: &[f64], model: &Model) -> Result<Self> {
        let pairs = data.iter().map(|&y| model.cdf_pair(y)).collect::<Result<Vec<_>>>()?;
        Self::from_cdf_pairs(pairs)
    }

    /// For regression fits, each observation is transformed by its own model.
    pub fn from_fit(fit: &FitResult, sample: &LossSample) -> Result<Self> {
        let models = fit.observation_models(sample)?;
        let pairs = models
            .iter()
            .zip(&sample.losses)
            .map(|(m, &y)| m.cdf_pair(y))
            .collect::<Result<Vec<_>>>()?;
        Self::from_cdf_pairs(pairs)
    }
}

fn pairs_from(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    sample
        .iter()
        .map(|&y| {
            let u = cdf(y);
            (u, 1.0 - u)
        })
        .collect()
}

/// `D = max_i max(i/n - u_(i), u_(i) - (i-1)/n)`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(EdfStatistics::from_cdf_pairs(pairs_from(sample, cdf))?.ks)
}

/// `1/(12n) + Σ (u_(i) - (2i-1)/(2n))²`.
pub fn cvm_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(EdfStatistics::from_cdf_pairs(pairs_from(sample, cdf))?.cvm)
}

/// `-n - (1/n) Σ (2i-1) [ln u_(i) + ln(1 - u_(n+1-i))]`.
pub fn ad_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(EdfStatistics::from_cdf_pairs(pairs_from(sample, cdf))?.ad)
}

/// Asymptotic Kolmogorov tail probability `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.3 {
        // The alternating series converges slowly here; the complementary
        // theta series is essentially exact instead.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (0..50)
            .map(|k| (-((2 * k + 1) as f64).powi(2) * c).exp())
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS p-value for statistic `d` at effective sample size `n`, with the
/// small-sample correction `λ = (√n + 0.12 + 0.11/√n) d`.
pub fn kolmogorov_pvalue(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample KS test against a continuous cdf: `(D, p)`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let d = ks_statistic(sample, cdf)?;
    Ok((d, kolmogorov_pvalue(d, sample.len() as f64)))
}

/// Two-sample KS test: `(D, p)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("two-sample KS needs two non-empty samples"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok((d, kolmogorov_pvalue(d, ne)))
}

// ---------------------------------------------------------------------------
// Parametric bootstrap
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub ks: f64,
    pub cvm: f64,
    pub ad: f64,
    pub p_ks: f64,
    pub p_cvm: f64,
    pub p_ad: f64,
    pub qq_correlation: f64,
    pub n_bootstrap: usize,
    /// Replicates whose refit failed; they are excluded from the p-values.
    pub n_dropped: usize,
    /// More than 10% of the replicates were dropped.
    pub unreliable: bool,
    pub n_clamped: usize,
    pub seed: u64,
}

impl GofReport {
    pub fn p_value(&self, s: Statistic) -> f64 {
        match s {
            Statistic::Ks => self.p_ks,
            Statistic::Cvm => self.p_cvm,
            Statistic::Ad => self.p_ad,
        }
    }
}

/// Refits `fit`'s structure (family, regression design) to new losses.
pub fn refit(fit: &FitResult, sample: &LossSample, options: &FitOptions) -> Result<FitResult> {
    match &fit.structure {
        Structure::Univariate => inference::fit_univariate(fit.family, &sample.losses, options),
        Structure::GlmgaRegression { spec } => inference::fit_regression(spec, sample, options),
        Structure::ComparatorRegression { columns, intercept } => {
            inference::fit_comparator_regression(fit.family, columns, *intercept, sample, options)
        }
    }
}

/// Bootstrap distribution of the three EDF statistics: for each replicate
/// `b`, losses are simulated from the fitted model with seed derived from
/// `(seed, b)`, the model is refitted and the statistics recomputed.
/// `None` marks a failed refit. Order follows `b` regardless of threads.
pub fn bootstrap_statistics(
    fit: &FitResult,
    sample: &LossSample,
    n_bootstrap: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<Vec<Option<EdfStatistics>>> {
    let models = fit.observation_models(sample)?;
    let options = options.without_std_errors();
    Ok((0..n_bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::seeded(rng::derive_seed(seed, &[b as u64]));
            let losses = models
                .iter()
                .map(|m| m.sample_rng(1, &mut r).map(|v| v[0]))
                .collect::<Result<Vec<f64>>>()
                .ok()?;
            let mut sim = sample.clone();
            sim.losses = losses;
            let refitted = refit(fit, &sim, &options).ok()?;
            EdfStatistics::from_fit(&refitted, &sim).ok()
        })
        .collect())
}

fn add_one_pvalue(observed: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&t| t >= observed).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

/// Bootstrap p-value of one statistic. Returns `(p, n_dropped, unreliable)`.
pub fn bootstrap_pvalue(
    statistic: Statistic,
    fit: &FitResult,
    sample: &LossSample,
    n_bootstrap: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<(f64, usize, bool)> {
    let r = gof_report(fit, sample, n_bootstrap, seed, options)?;
    Ok((r.p_value(statistic), r.n_dropped, r.unreliable))
}

/// Full goodness-of-fit report for a fit: statistics, bootstrap p-values
/// and the normal QQ correlation of the quantile residuals.
pub fn gof_report(
    fit: &FitResult,
    sample: &LossSample,
    n_bootstrap: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<GofReport> {
    if n_bootstrap < 99 {
        return Err(Error::Config(format!("bootstrap needs B >= 99, got {n_bootstrap}")));
    }
    let observed = EdfStatistics::from_fit(fit, sample)?;
    let boot = bootstrap_statistics(fit, sample, n_bootstrap, seed, options)?;
    let ok: Vec<EdfStatistics> = boot.iter().flatten().copied().collect();
    let n_dropped = boot.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::Estimation("every bootstrap refit failed".into()));
    }
    let p = |s: Statistic| {
        let reps: Vec<f64> = ok.iter().map(|e| e.get(s)).collect();
        add_one_pvalue(observed.get(s), &reps)
    };
    let residuals = inference::quantile_residuals(fit, sample)?;
    Ok(GofReport {
        ks: observed.ks,
        cvm: observed.cvm,
        ad: observed.ad,
        p_ks: p(Statistic::Ks),
        p_cvm: p(Statistic::Cvm),
        p_ad: p(Statistic::Ad),
        qq_correlation: qq_correlation(&residuals.residuals)?,
        n_bootstrap,
        n_dropped,
        unreliable: n_dropped as f64 > MAX_DROPPED_FRACTION * n_bootstrap as f64,
        n_clamped: observed.n_clamped + residuals.n_clamped,
        seed,
    })
}

// ---------------------------------------------------------------------------
// QQ diagnostics
// ---------------------------------------------------------------------------

/// Normal plotting positions `Φ^{-1}((i - 0.375)/(n + 0.25))`, i = 1..n.
pub fn normal_plotting_positions(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            specfun::std_normal_quantile((i as f64 - 0.375) / (n as f64 + 0.25))
                .expect("plotting position lies in (0, 1)")
        })
        .collect()
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between sorted residuals and normal plotting positions.
///
/// Residuals are matched to positions in the given order after sorting in
/// ascending order, so perfect residuals give 1.
pub fn qq_correlation(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 3 {
        return Err(Error::domain("QQ correlation needs at least 3 residuals"));
    }
    let mut r = residuals.to_vec();
    r.sort_by(f64::total_cmp);
    pearson(&r, &normal_plotting_positions(r.len()))
        .ok_or_else(|| Error::domain("QQ correlation is undefined for constant residuals"))
}

/// Correlation of the residuals, in the order given, with the ascending
/// plotting positions. Unlike [`qq_correlation`] this does not sort, so a
/// reversed perfect sequence gives -1.
pub fn qq_correlation_unsorted(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 3 {
        return Err(Error::domain("QQ correlation needs at least 3 residuals"));
    }
    pearson(residuals, &normal_plotting_positions(residuals.len()))
        .ok_or_else(|| Error::domain("QQ correlation is undefined for constant residuals"))
}

/// Pareto QQ pairs `(ln y_(i), -ln(1 - i/(n+1)))`.
pub fn pareto_qq(data: &[f64]) -> Result<Vec<(f64, f64)>> {
    if data.iter().any(|y| !(*y > 0.0)) {
        return Err(Error::domain("Pareto QQ data needs positive losses"));
    }
    let mut s = data.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    Ok(s.iter()
        .enumerate()
        .map(|(i, y)| (y.ln(), -(-((i + 1) as f64) / (n + 1.0)).ln_1p()))
        .collect())
}

// ---------------------------------------------------------------------------
// VaR backtest and rankings
// ---------------------------------------------------------------------------

/// Sample quantile by linear interpolation of order statistics (type 7):
/// `h = (n-1)p`, `Q = y_(⌊h⌋) + (h - ⌊h⌋)(y_(⌊h⌋+1) - y_(⌊h⌋))`, 0-based.
pub fn empirical_quantile(data: &[f64], p: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::domain("empirical quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("quantile level must lie in [0,1], got {p}")));
    }
    let mut s = data.to_vec();
    s.sort_by(f64::total_cmp);
    let h = (s.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    Ok(s[lo] + (h - lo as f64) * (s[hi] - s[lo]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarBacktestRow {
    pub model: String,
    pub level: f64,
    pub empirical_var: f64,
    pub model_var: f64,
    /// `100 (model - empirical) / empirical`.
    pub diff_pct: f64,
    /// Rank by `|diff_pct|` among the models at this level, starting at 1.
    pub rank: usize,
    pub warning: Option<String>,
}

/// Compares model quantiles with the type-7 empirical quantile at each level.
pub fn var_backtest(data: &[f64], models: &[(String, Model)], levels: &[f64]) -> Result<Vec<VarBacktestRow>> {
    if models.is_empty() {
        return Err(Error::Config("VaR backtest needs at least one model".into()));
    }
    let n = data.len() as f64;
    let mut rows = Vec::new();
    for &level in levels {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain(format!("risk level must lie in (0,1), got {level}")));
        }
        let empirical = empirical_quantile(data, level)?;
        let warning = (level > 1.0 - 1.0 / n || level < 1.0 / n).then(|| {
            format!("level {level} lies beyond the resolution of {n} observations")
        });
        let mut block: Vec<VarBacktestRow> = models
            .iter()
            .map(|(name, m)| {
                let model_var = m.quantile(level)?;
                Ok(VarBacktestRow {
                    model: name.clone(),
                    level,
                    empirical_var: empirical,
                    model_var,
                    diff_pct: 100.0 * (model_var - empirical) / empirical,
                    rank: 0,
                    warning: warning.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..block.len()).collect();
        order.sort_by(|&i, &j| {
            block[i]
                .diff_pct
                .abs()
                .total_cmp(&block[j].diff_pct.abs())
                .then_with(|| block[i].model.cmp(&block[j].model))
        });
        for (r, &i) in order.iter().enumerate() {
            block[i].rank = r + 1;
        }
        rows.extend(block);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub model: String,
    pub family: Family,
    pub n_params: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub aic_rank: usize,
    pub bic_rank: usize,
}

/// Rows sorted by AIC, each carrying both its AIC and BIC rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRanking {
    pub by_aic: Vec<RankRow>,
    /// Model names in BIC order.
    pub bic_order: Vec<String>,
}

/// Ranks fits by AIC and by BIC; ties go to fewer parameters, then name.
pub fn rank_models(fits: &[(String, &FitResult)]) -> Result<ModelRanking> {
    if fits.is_empty() {
        return Err(Error::Config("nothing to rank".into()));
    }
    let order_by = |key: &dyn Fn(&FitResult) -> f64| {
        let mut idx: Vec<usize> = (0..fits.len()).collect();
        idx.sort_by(|&i, &j| {
            key(fits[i].1)
                .total_cmp(&key(fits[j].1))
                .then(fits[i].1.n_params.cmp(&fits[j].1.n_params))
                .then_with(|| fits[i].0.cmp(&fits[j].0))
        });
        idx
    };
    let aic_order = order_by(&|f| f.aic);
    let bic_order = order_by(&|f| f.bic);
    let mut aic_rank = vec![0; fits.len()];
    let mut bic_rank = vec![0; fits.len()];
    for (r, &i) in aic_order.iter().enumerate() {
        aic_rank[i] = r + 1;
    }
    for (r, &i) in bic_order.iter().enumerate() {
        bic_rank[i] = r + 1;
    }
    Ok(ModelRanking {
        by_aic: aic_order
            .iter()
            .map(|&i| RankRow {
                model: fits[i].0.clone(),
                family: fits[i].1.family,
                n_params: fits[i].1.n_params,
                log_likelihood: fits[i].1.log_likelihood,
                aic: fits[i].1.aic,
                bic: fits[i].1.bic,
                aic_rank: aic_rank[i],
                bic_rank: bic_rank[i],
            })
            .collect(),
        bic_order: bic_order.iter().map(|&i| fits[i].0.clone()).collect(),
    })
}
