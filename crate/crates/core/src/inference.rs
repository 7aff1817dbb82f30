//! Maximum-likelihood fitting: univariate families, the GLMGA regression
//! with log links on σ and b, comparator regressions, observed-information
//! standard errors and quantile residuals.
//!
//! Positive parameters are optimized on the log scale. The GLMGA regression
//! is
//!
//! ```text
//! ln σ_i = x_{σ,i}ᵀ β,   ln b_i = x_{b,i}ᵀ α,   ln a = η
//! ```
//!
//! and its log-likelihood is the sum of GLMGA log densities at the
//! per-observation parameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::competitors::LossDistribution;
use crate::data::LossSample;
use crate::error::{Error, Result};
use crate::family::{Family, Model};
use crate::glmga::{log_density_parts, GlmgaParams};
use crate::optim::{self, NelderMeadOptions};
use crate::specfun::{self, ln_beta_pos};

/// GLMGA fits with `a` below this are flagged as sitting on the boundary.
pub const BOUNDARY_SHAPE: f64 = 1e-4;

/// Probabilities are clamped to `[CLAMP, 1 - CLAMP]` before `Φ^{-1}`.
pub const RESIDUAL_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub optimizer: NelderMeadOptions,
    /// Skipping the Hessian saves time in bootstrap and simulation loops.
    pub compute_std_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            optimizer: NelderMeadOptions::default(),
            compute_std_errors: true,
        }
    }
}

impl FitOptions {
    pub fn without_std_errors(mut self) -> Self {
        self.compute_std_errors = false;
        self
    }
}

/// Covariate columns entering the σ and b links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub sigma_columns: Vec<String>,
    pub b_columns: Vec<String>,
    pub sigma_intercept: bool,
    pub b_intercept: bool,
}

impl RegressionSpec {
    pub fn new(sigma_columns: &[&str], b_columns: &[&str]) -> Self {
        Self {
            sigma_columns: sigma_columns.iter().map(|s| s.to_string()).collect(),
            b_columns: b_columns.iter().map(|s| s.to_string()).collect(),
            sigma_intercept: true,
            b_intercept: true,
        }
    }

    /// Intercepts only, which is the univariate GLMGA.
    pub fn intercepts_only() -> Self {
        Self::new(&[], &[])
    }

    pub fn n_beta(&self) -> usize {
        self.sigma_columns.len() + self.sigma_intercept as usize
    }

    pub fn n_alpha(&self) -> usize {
        self.b_columns.len() + self.b_intercept as usize
    }

    pub fn n_params(&self) -> usize {
        self.n_beta() + self.n_alpha() + 1
    }

    fn validate(&self, sample: &LossSample) -> Result<()> {
        for (link, cols) in [("sigma", &self.sigma_columns), ("b", &self.b_columns)] {
            for (i, c) in cols.iter().enumerate() {
                if cols[..i].contains(c) {
                    return Err(Error::Config(format!("column '{c}' listed twice in the {link} link")));
                }
                if sample.covariate(c).is_none() {
                    return Err(Error::Config(format!(
                        "{link}-link column '{c}' is not among the sample covariates [{}]",
                        sample.covariate_names.join(", ")
                    )));
                }
            }
        }
        Ok(())
    }

    fn coefficient_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_params());
        if self.sigma_intercept {
            names.push("beta[intercept]".to_string());
        }
        names.extend(self.sigma_columns.iter().map(|c| format!("beta[{c}]")));
        if self.b_intercept {
            names.push("alpha[intercept]".to_string());
        }
        names.extend(self.b_columns.iter().map(|c| format!("alpha[{c}]")));
        names.push("eta".to_string());
        names
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionCoefficients {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// `ln a`.
    pub eta: f64,
}

impl RegressionCoefficients {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.extend_from_slice(&self.alpha);
        v.push(self.eta);
        v
    }

    pub fn from_slice(spec: &RegressionSpec, v: &[f64]) -> Result<Self> {
        if v.len() != spec.n_params() {
            return Err(Error::Config(format!(
                "expected {} regression coefficients, got {}",
                spec.n_params(),
                v.len()
            )));
        }
        let nb = spec.n_beta();
        let na = spec.n_alpha();
        Ok(Self {
            beta: v[..nb].to_vec(),
            alpha: v[nb..nb + na].to_vec(),
            eta: v[nb + na],
        })
    }

    fn check(&self, spec: &RegressionSpec) -> Result<()> {
        if self.beta.len() != spec.n_beta() || self.alpha.len() != spec.n_alpha() {
            return Err(Error::Config(format!(
                "coefficient lengths ({}, {}) do not match the spec ({}, {})",
                self.beta.len(),
                self.alpha.len(),
                spec.n_beta(),
                spec.n_alpha()
            )));
        }
        if self.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("regression coefficients must be finite"));
        }
        Ok(())
    }
}

/// How the fitted parameters map onto observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    Univariate,
    GlmgaRegression { spec: RegressionSpec },
    /// Covariates enter one parameter of a comparator family: the lognormal
    /// location, the log of the gamma and GB2 scales, the log of GlogM's σ.
    ComparatorRegression { columns: Vec<String>, intercept: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub structure: Structure,
    pub parameter_names: Vec<String>,
    /// Natural parameters for univariate fits; coefficients (plus natural
    /// nuisance parameters) for regressions.
    pub estimates: Vec<f64>,
    /// Absent when the observed information is not positive definite or
    /// was not requested.
    pub std_errors: Option<Vec<f64>>,
    /// Optimizer coordinates at the optimum.
    pub unconstrained: Vec<f64>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_obs: usize,
    pub n_params: usize,
    pub converged: bool,
    pub n_restarts_used: usize,
    pub final_simplex_size: f64,
    pub n_evals: usize,
    pub hessian_positive_definite: Option<bool>,
    pub boundary: bool,
    /// Quantities reported alongside the estimates: alternative
    /// parameterizations and residual diagnostics.
    pub derived: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl FitResult {
    /// The fitted distribution of a univariate fit.
    pub fn model(&self) -> Result<Model> {
        match self.structure {
            Structure::Univariate => Model::from_unconstrained(self.family, &self.unconstrained),
            _ => Err(Error::Config("regression fits have one model per observation".into())),
        }
    }

    pub fn coefficients(&self) -> Option<RegressionCoefficients> {
        match &self.structure {
            Structure::GlmgaRegression { spec } => {
                RegressionCoefficients::from_slice(spec, &self.unconstrained).ok()
            }
            _ => None,
        }
    }

    /// The fitted distribution of every observation in `sample`.
    pub fn observation_models(&self, sample: &LossSample) -> Result<Vec<Model>> {
        let n = sample.len();
        match &self.structure {
            Structure::Univariate => Ok(vec![self.model()?; n]),
            Structure::GlmgaRegression { spec } => {
                let coef = RegressionCoefficients::from_slice(spec, &self.unconstrained)?;
                let (xs, xb) = designs(spec, sample)?;
                let a = coef.eta.exp();
                (0..n)
                    .map(|i| {
                        let p = GlmgaParams::new(xs.dot(i, &coef.beta).exp(), a, xb.dot(i, &coef.alpha).exp())?;
                        Ok(Model::Glmga(p))
                    })
                    .collect()
            }
            Structure::ComparatorRegression { columns, intercept } => {
                let x = Design::build(sample, columns, *intercept, "scale")?;
                let k = x.k;
                (0..n)
                    .map(|i| {
                        comparator_unconstrained(self.family, x.dot(i, &self.unconstrained[..k]), &self.unconstrained[k..])
                            .and_then(|u| Model::from_unconstrained(self.family, &u))
                    })
                    .collect()
            }
        }
    }
}

pub fn aic(log_likelihood: f64, n_params: usize) -> f64 {
    -2.0 * log_likelihood + 2.0 * n_params as f64
}

pub fn bic(log_likelihood: f64, n_params: usize, n_obs: usize) -> f64 {
    -2.0 * log_likelihood + n_params as f64 * (n_obs as f64).ln()
}

/// Hill estimate of the extreme value index from the `k` largest values.
pub fn hill_estimator(data: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= data.len() {
        return Err(Error::domain(format!("Hill estimator needs 0 < k < n, got k={k}, n={}", data.len())));
    }
    if data.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::domain("Hill estimator needs positive data"));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let threshold = sorted[k].ln();
    Ok(sorted[..k].iter().map(|v| v.ln() - threshold).sum::<f64>() / k as f64)
}

// ---------------------------------------------------------------------------
// Design matrices
// ---------------------------------------------------------------------------

/// Row-major design matrix.
#[derive(Debug, Clone)]
struct Design {
    k: usize,
    x: Vec<f64>,
}

impl Design {
    fn build(sample: &LossSample, columns: &[String], intercept: bool, link: &str) -> Result<Self> {
        let n = sample.len();
        let mut cols: Vec<(&str, &[f64])> = Vec::new();
        let ones = vec![1.0; n];
        if intercept {
            cols.push(("intercept", &ones));
        }
        for c in columns {
            let v = sample.covariate(c).ok_or_else(|| {
                Error::Config(format!("{link}-link column '{c}' is not among the sample covariates"))
            })?;
            cols.push((c, v));
        }
        check_rank(&cols, link)?;
        let k = cols.len();
        let mut x = Vec::with_capacity(n * k);
        for i in 0..n {
            for (_, col) in &cols {
                x.push(col[i]);
            }
        }
        Ok(Self { k, x })
    }

    #[inline]
    fn dot(&self, i: usize, coef: &[f64]) -> f64 {
        self.x[i * self.k..(i + 1) * self.k]
            .iter()
            .zip(coef)
            .map(|(x, c)| x * c)
            .sum()
    }
}

/// Modified Gram-Schmidt; names the first column that lies in the span of
/// the preceding ones.
fn check_rank(cols: &[(&str, &[f64])], link: &str) -> Result<()> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (j, (name, col)) in cols.iter().enumerate() {
        // Scale by the largest entry first so squared norms cannot overflow.
        let scale = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut v: Vec<f64> = col.iter().map(|x| if scale > 0.0 { x / scale } else { 0.0 }).collect();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for q in &basis {
            let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= proj * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 || norm <= 1e-10 * norm0 {
            let others: Vec<&str> = cols[..j].iter().map(|(n, _)| *n).collect();
            return Err(Error::Estimation(format!(
                "{link}-link design is rank deficient: column '{name}' is collinear with [{}]",
                others.join(", ")
            )));
        }
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    Ok(())
}

fn designs(spec: &RegressionSpec, sample: &LossSample) -> Result<(Design, Design)> {
    spec.validate(sample)?;
    Ok((
        Design::build(sample, &spec.sigma_columns, spec.sigma_intercept, "sigma")?,
        Design::build(sample, &spec.b_columns, spec.b_intercept, "b")?,
    ))
}

// ---------------------------------------------------------------------------
// GLMGA likelihoods
// ---------------------------------------------------------------------------

/// `-Σ ln f(y_i; σ_i, a, b_i)`; `+inf` outside the representable range.
fn glmga_regression_nll(ln_y: &[f64], xs: &Design, xb: &Design, theta: &[f64]) -> f64 {
    let (beta, rest) = theta.split_at(xs.k);
    let (alpha, eta) = rest.split_at(xb.k);
    let a = eta[0].exp();
    if !(a > 0.0 && a.is_finite()) {
        return f64::INFINITY;
    }
    let lnb_a = ln_beta_pos(a, 0.5);
    let mut total = 0.0;
    for (i, &ly) in ln_y.iter().enumerate() {
        let ln_sigma = xs.dot(i, beta);
        let sigma = ln_sigma.exp();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return f64::INFINITY;
        }
        total += log_density_parts(ln_sigma, sigma, a, xb.dot(i, alpha), lnb_a, ly);
    }
    if total.is_nan() {
        f64::INFINITY
    } else {
        -total
    }
}

/// Negative log-likelihood of the GLMGA regression at given coefficients.
pub fn neg_log_likelihood(
    spec: &RegressionSpec,
    coeffs: &RegressionCoefficients,
    sample: &LossSample,
) -> Result<f64> {
    coeffs.check(spec)?;
    let (xs, xb) = designs(spec, sample)?;
    let a = coeffs.eta.exp();
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::numeric(format!("a = exp({}) is not representable", coeffs.eta)));
    }
    let lnb_a = ln_beta_pos(a, 0.5);
    let mut total = 0.0;
    for (i, &y) in sample.losses.iter().enumerate() {
        let ln_sigma = xs.dot(i, &coeffs.beta);
        let ln_b = xb.dot(i, &coeffs.alpha);
        let sigma = ln_sigma.exp();
        if !(sigma > 0.0 && sigma.is_finite() && ln_b.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite linear predictor at observation {i} (ln σ = {ln_sigma}, ln b = {ln_b})"
            )));
        }
        let v = log_density_parts(ln_sigma, sigma, a, ln_b, lnb_a, y.ln());
        if !v.is_finite() {
            return Err(Error::numeric(format!("log density is not finite at observation {i}")));
        }
        total += v;
    }
    Ok(-total)
}

// ---------------------------------------------------------------------------
// Starting values
// ---------------------------------------------------------------------------

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn mean_var(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let m = v.clone().sum::<f64>() / n;
    let s2 = v.map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, s2)
}

/// Extreme value index from the top decile, clamped to a sane range.
fn tail_index_guess(data: &[f64]) -> f64 {
    let k = (data.len() / 10).max(2).min(data.len() - 1);
    hill_estimator(data, k).unwrap_or(0.5).clamp(0.04, 4.0)
}

/// Cheap starting point in unconstrained coordinates.
fn initial_point(family: Family, data: &[f64]) -> Result<Vec<f64>> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ln_med = median_sorted(&sorted).ln();
    let xi = tail_index_guess(data);
    let logs = data.iter().map(|y| y.ln());
    let (lm, lv) = mean_var(logs);
    let sd = lv.sqrt().max(1e-6);
    Ok(match family {
        // Median of GLMGA(σ, 1, b) is (3/2 / b)^σ... solved for b.
        Family::Glmga => {
            let s = 0.5 * xi;
            vec![s.ln(), 0.0, 1.5f64.ln() - ln_med / s]
        }
        // erfc(s) = 1/2 at s = 0.476936...
        Family::Glogm => {
            let s = 0.5 * xi;
            let s_half: f64 = 0.476_936_276_204_469_9;
            vec![s.ln(), (2.0 * s_half * s_half).ln() + ln_med / s]
        }
        Family::Gb2 => unreachable!("GB2 starts from a GLMGA fit"),
        Family::Lomax => {
            let shape = 1.0 / xi;
            let scale = ln_med.exp() / (2f64.powf(1.0 / shape) - 1.0);
            vec![scale.ln(), shape.ln()]
        }
        Family::Loggamma => {
            if sorted[0] <= 1.0 {
                return Err(Error::Estimation(
                    "the log-gamma family needs every loss above 1".into(),
                ));
            }
            vec![(lm * lm / lv).ln(), (lm / lv).ln()]
        }
        Family::Frechet => {
            let shape = std::f64::consts::PI / (sd * 6f64.sqrt());
            vec![shape.ln(), lm - 0.577_215_664_901_532_9 / shape]
        }
        Family::Lognormal => vec![lm, sd.ln()],
        Family::Gamma => {
            let (m, v) = mean_var(data.iter().copied());
            vec![(m * m / v).ln(), (v / m).ln()]
        }
    })
}

fn check_sample(data: &[f64], n_params: usize) -> Result<()> {
    if data.len() < n_params + 1 {
        return Err(Error::Estimation(format!(
            "need at least {} observations to fit {n_params} parameters, got {}",
            n_params + 1,
            data.len()
        )));
    }
    if let Some(y) = data.iter().find(|y| !(**y > 0.0 && y.is_finite())) {
        return Err(Error::domain(format!("losses must be positive and finite, got {y}")));
    }
    if data.iter().all(|&y| y == data[0]) {
        return Err(Error::Estimation("all losses are equal; the sample is degenerate".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct Optimum {
    theta: Vec<f64>,
    nll: f64,
    res: optim::OptimResult,
    /// Covariance in optimizer coordinates, when positive definite.
    cov: Option<Vec<Vec<f64>>>,
    hessian_pd: Option<bool>,
}

fn optimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], options: &FitOptions) -> Result<Optimum> {
    let start = f(x0);
    if !start.is_finite() {
        return Err(Error::Estimation(
            "the likelihood is not finite at the starting values".into(),
        ));
    }
    let res = optim::minimize(&f, x0, &options.optimizer);
    if !res.fx.is_finite() {
        return Err(Error::Estimation("optimizer ended at a non-finite likelihood".into()));
    }
    let (cov, hessian_pd) = if options.compute_std_errors {
        match optim::information_matrix(&f, &res.x) {
            Ok(h) => match optim::invert_spd(&h) {
                Some(inv) => {
                    let d = inv.nrows();
                    let rows = (0..d).map(|i| (0..d).map(|j| inv[(i, j)]).collect()).collect();
                    let ok = (0..d).all(|i| inv[(i, i)] > 0.0);
                    (ok.then_some(rows), Some(ok))
                }
                None => (None, Some(false)),
            },
            Err(_) => (None, Some(false)),
        }
    } else {
        (None, None)
    };
    Ok(Optimum {
        theta: res.x.clone(),
        nll: res.fx,
        res,
        cov,
        hessian_pd,
    })
}

struct Assembled {
    family: Family,
    structure: Structure,
    names: Vec<String>,
    estimates: Vec<f64>,
    /// Multiplier turning an optimizer-coordinate SE into a reported SE.
    se_scale: Vec<f64>,
    n_obs: usize,
    boundary: bool,
    derived: BTreeMap<String, f64>,
}

fn assemble(opt: Optimum, a: Assembled) -> FitResult {
    let p = a.estimates.len();
    let ll = -opt.nll;
    let mut notes = Vec::new();
    let std_errors = opt.cov.as_ref().map(|cov| {
        (0..p).map(|j| cov[j][j].sqrt() * a.se_scale[j]).collect::<Vec<f64>>()
    });
    if opt.hessian_pd == Some(false) {
        notes.push("observed information is not positive definite; standard errors omitted".into());
    }
    if !opt.res.converged {
        notes.push("optimizer did not converge within the restart budget".into());
    }
    if a.boundary {
        notes.push(format!("shape parameter a is below {BOUNDARY_SHAPE}; the fit sits on the boundary"));
    }
    FitResult {
        family: a.family,
        structure: a.structure,
        parameter_names: a.names,
        estimates: a.estimates,
        std_errors,
        unconstrained: opt.theta,
        log_likelihood: ll,
        aic: aic(ll, p),
        bic: bic(ll, p, a.n_obs),
        n_obs: a.n_obs,
        n_params: p,
        converged: opt.res.converged,
        n_restarts_used: opt.res.n_restarts_used,
        final_simplex_size: opt.res.final_simplex_size,
        n_evals: opt.res.n_evals,
        hessian_positive_definite: opt.hessian_pd,
        boundary: a.boundary,
        derived: a.derived,
        notes,
    }
}

fn univariate_objective(family: Family, data: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
    let ln_y: Vec<f64> = if family == Family::Glmga {
        data.iter().map(|y| y.ln()).collect()
    } else {
        Vec::new()
    };
    move |theta: &[f64]| {
        if family == Family::Glmga {
            let sigma = theta[0].exp();
            let a = theta[1].exp();
            if !(sigma > 0.0 && sigma.is_finite() && a > 0.0 && a.is_finite() && theta[2].is_finite()) {
                return f64::INFINITY;
            }
            let lnb_a = ln_beta_pos(a, 0.5);
            let s: f64 = ln_y
                .iter()
                .map(|&ly| log_density_parts(theta[0], sigma, a, theta[2], lnb_a, ly))
                .sum();
            return if s.is_nan() { f64::INFINITY } else { -s };
        }
        match Model::from_unconstrained(family, theta) {
            Ok(m) => -m.log_likelihood(data),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Maximum-likelihood fit of a univariate family.
pub fn fit_univariate(family: Family, data: &[f64], options: &FitOptions) -> Result<FitResult> {
    check_sample(data, family.n_params())?;
    let x0 = if family == Family::Gb2 {
        // GLMGA is the ν = 1/2 slice of GB2, so starting from the GLMGA
        // optimum guarantees the GB2 fit is at least as good.
        let g = fit_univariate(Family::Glmga, data, &options.without_std_errors())?;
        Model::Gb2(crate::competitors::Gb2Params::from_glmga(&match g.model()? {
            Model::Glmga(p) => p,
            _ => unreachable!(),
        }))
        .to_unconstrained()
    } else {
        initial_point(family, data)?
    };
    let f = univariate_objective(family, data);
    let opt = optimize(&f, &x0, options)?;
    let model = Model::from_unconstrained(family, &opt.theta)
        .map_err(|e| Error::Estimation(format!("fitted parameters are invalid: {e}")))?;
    let estimates = model.params();
    let se_scale = (0..family.n_params())
        .map(|j| if family.is_log_scaled(j) { estimates[j] } else { 1.0 })
        .collect();
    let mut derived = BTreeMap::new();
    let boundary = match model {
        Model::Glmga(p) => p.a < BOUNDARY_SHAPE,
        Model::Gb2(p) => {
            derived.insert("sigma_from_p".into(), -1.0 / p.p);
            p.nu < BOUNDARY_SHAPE || p.tau < BOUNDARY_SHAPE
        }
        Model::Glogm(p) => {
            derived.insert("mu".into(), p.display_mu());
            false
        }
        _ => false,
    };
    Ok(assemble(
        opt,
        Assembled {
            family,
            structure: Structure::Univariate,
            names: family.param_names().iter().map(|s| s.to_string()).collect(),
            estimates,
            se_scale,
            n_obs: data.len(),
            boundary,
            derived,
        },
    ))
}

/// Maximum-likelihood fit of the GLMGA regression.
///
/// Starts from the univariate GLMGA fit: intercepts take its `ln σ` and
/// `ln b`, slopes start at zero and `η` at its `ln a`.
pub fn fit_regression(spec: &RegressionSpec, sample: &LossSample, options: &FitOptions) -> Result<FitResult> {
    let (xs, xb) = designs(spec, sample)?;
    check_sample(&sample.losses, spec.n_params())?;
    let uni = fit_univariate(Family::Glmga, &sample.losses, &options.without_std_errors())?;
    let mut x0 = vec![0.0; spec.n_params()];
    if spec.sigma_intercept {
        x0[0] = uni.unconstrained[0];
    }
    if spec.b_intercept {
        x0[spec.n_beta()] = uni.unconstrained[2];
    }
    x0[spec.n_params() - 1] = uni.unconstrained[1];
    fit_regression_from(spec, sample, &xs, &xb, &x0, options)
}

/// As [`fit_regression`] but from caller-supplied starting coefficients.
pub fn fit_regression_with_start(
    spec: &RegressionSpec,
    sample: &LossSample,
    start: &RegressionCoefficients,
    options: &FitOptions,
) -> Result<FitResult> {
    start.check(spec)?;
    let (xs, xb) = designs(spec, sample)?;
    check_sample(&sample.losses, spec.n_params())?;
    fit_regression_from(spec, sample, &xs, &xb, &start.to_vec(), options)
}

fn fit_regression_from(
    spec: &RegressionSpec,
    sample: &LossSample,
    xs: &Design,
    xb: &Design,
    x0: &[f64],
    options: &FitOptions,
) -> Result<FitResult> {
    let ln_y: Vec<f64> = sample.losses.iter().map(|y| y.ln()).collect();
    let f = |theta: &[f64]| glmga_regression_nll(&ln_y, xs, xb, theta);
    let opt = optimize(f, x0, options)?;
    let eta = *opt.theta.last().expect("eta present");
    let mut derived = BTreeMap::new();
    derived.insert("a".into(), eta.exp());
    let p = spec.n_params();
    let estimates = opt.theta.clone();
    Ok(assemble(
        opt,
        Assembled {
            family: Family::Glmga,
            structure: Structure::GlmgaRegression { spec: spec.clone() },
            names: spec.coefficient_names(),
            estimates,
            se_scale: vec![1.0; p],
            n_obs: sample.len(),
            boundary: eta.exp() < BOUNDARY_SHAPE,
            derived,
        },
    ))
}

/// Index of the natural parameter that carries the covariates in a
/// comparator regression.
fn comparator_link(family: Family) -> Result<usize> {
    match family {
        Family::Lognormal => Ok(0),
        Family::Gamma => Ok(1),
        Family::Glogm => Ok(0),
        Family::Gb2 => Ok(0),
        other => Err(Error::Config(format!(
            "{other} regression is not implemented (available: glmga, glogm, gb2, lognormal, gamma)"
        ))),
    }
}

/// Optimizer coordinates of one observation's model from its linear
/// predictor and the shared nuisance coordinates.
fn comparator_unconstrained(family: Family, lin: f64, extras: &[f64]) -> Result<Vec<f64>> {
    let link = comparator_link(family)?;
    let mut u = extras.to_vec();
    u.insert(link, lin);
    Ok(u)
}

/// Regression for a comparator family. The linked parameter is the
/// lognormal `μ_i = xᵀβ`, gamma `ln β_i = xᵀβ`, GB2 `ln μ_i = xᵀβ` or GlogM
/// `ln σ_i = xᵀβ`; the remaining parameters are shared.
pub fn fit_comparator_regression(
    family: Family,
    columns: &[String],
    intercept: bool,
    sample: &LossSample,
    options: &FitOptions,
) -> Result<FitResult> {
    if family == Family::Glmga {
        return Err(Error::Config("use fit_regression for the GLMGA regression".into()));
    }
    let link = comparator_link(family)?;
    let x = Design::build(sample, columns, intercept, "scale")?;
    let k = x.k;
    let n_params = k + family.n_params() - 1;
    check_sample(&sample.losses, n_params)?;
    let uni = fit_univariate(family, &sample.losses, &options.without_std_errors())?;
    let mut x0 = vec![0.0; k];
    if intercept {
        x0[0] = uni.unconstrained[link];
    }
    x0.extend(uni.unconstrained.iter().enumerate().filter(|(j, _)| *j != link).map(|(_, v)| *v));

    let losses = &sample.losses;
    let f = |theta: &[f64]| {
        let (coef, extras) = theta.split_at(k);
        let mut total = 0.0;
        let mut u = extras.to_vec();
        u.insert(link, 0.0);
        for (i, &y) in losses.iter().enumerate() {
            u[link] = x.dot(i, coef);
            match Model::from_unconstrained(family, &u).and_then(|m| m.log_pdf(y)) {
                Ok(v) if !v.is_nan() => total += v,
                _ => return f64::INFINITY,
            }
        }
        -total
    };
    let opt = optimize(f, &x0, options)?;

    let link_name = family.param_names()[link];
    let mut names: Vec<String> = Vec::new();
    if intercept {
        names.push(format!("{link_name}[intercept]"));
    }
    names.extend(columns.iter().map(|c| format!("{link_name}[{c}]")));
    let mut estimates = opt.theta[..k].to_vec();
    let mut se_scale = vec![1.0; k];
    let extra_idx = (0..family.n_params()).filter(|j| *j != link);
    for (pos, j) in extra_idx.enumerate() {
        names.push(family.param_names()[j].to_string());
        let t = opt.theta[k + pos];
        let v = if family.is_log_scaled(j) { t.exp() } else { t };
        estimates.push(v);
        se_scale.push(if family.is_log_scaled(j) { v } else { 1.0 });
    }
    Ok(assemble(
        opt,
        Assembled {
            family,
            structure: Structure::ComparatorRegression {
                columns: columns.to_vec(),
                intercept,
            },
            names,
            estimates,
            se_scale,
            n_obs: sample.len(),
            boundary: false,
            derived: BTreeMap::new(),
        },
    ))
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileResiduals {
    pub residuals: Vec<f64>,
    /// Observations whose fitted cdf had to be clamped away from 0 or 1.
    pub n_clamped: usize,
}

/// `r_i = Φ^{-1}(F(y_i))` under the fitted model, with `F` clamped to
/// `[1e-12, 1 - 1e-12]`.
pub fn quantile_residuals(fit: &FitResult, sample: &LossSample) -> Result<QuantileResiduals> {
    let models = fit.observation_models(sample)?;
    let mut n_clamped = 0;
    let residuals = models
        .iter()
        .zip(&sample.losses)
        .map(|(m, &y)| {
            let (f, sf) = m.cdf_pair(y)?;
            residual_from_pair(f, sf, &mut n_clamped)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantileResiduals { residuals, n_clamped })
}

/// Residual from `(F, 1 - F)`, using the smaller side for accuracy.
pub(crate) fn residual_from_pair(f: f64, sf: f64, n_clamped: &mut usize) -> Result<f64> {
    if f < RESIDUAL_CLAMP || sf < RESIDUAL_CLAMP {
        *n_clamped += 1;
    }
    if f <= sf {
        specfun::std_normal_quantile(f.max(RESIDUAL_CLAMP))
    } else {
        Ok(-specfun::std_normal_quantile(sf.max(RESIDUAL_CLAMP))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aic_bic_arithmetic() {
        assert!((aic(-784.97, 3) - 1575.94).abs() < 1e-9);
        assert!((bic(-10.0, 2, 100) - (20.0 + 2.0 * 100f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn hill_on_exact_pareto_quantiles() {
        // Pareto(α=2) quantiles: ξ = 1/2.
        let n = 20000;
        let data: Vec<f64> = (1..=n).map(|i| (1.0 - i as f64 / (n as f64 + 1.0)).powf(-0.5)).collect();
        let xi = hill_estimator(&data, 2000).unwrap();
        assert!((xi - 0.5).abs() < 0.01, "{xi}");
    }

    #[test]
    fn single_observation_nll() {
        let sample = LossSample::new(vec![2.3]).unwrap();
        let spec = RegressionSpec::intercepts_only();
        let coef = RegressionCoefficients { beta: vec![-1.2], alpha: vec![0.4], eta: 0.3 };
        let nll = neg_log_likelihood(&spec, &coef, &sample).unwrap();
        let p = GlmgaParams::new((-1.2f64).exp(), 0.3f64.exp(), 0.4f64.exp()).unwrap();
        assert!((nll + p.log_pdf(2.3).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn collinear_columns_named() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y2: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let sample = LossSample::with_covariates(
            (1..=20).map(|i| i as f64).collect(),
            vec!["x".into(), "x2".into()],
            vec![x, y2],
        )
        .unwrap();
        let err = fit_regression(&RegressionSpec::new(&["x", "x2"], &[]), &sample, &FitOptions::default())
            .unwrap_err();
        match err {
            Error::Estimation(msg) => assert!(msg.contains("'x2'") && msg.contains("x"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_sample() {
        assert!(matches!(
            fit_univariate(Family::Glmga, &[2.0; 10], &FitOptions::default()),
            Err(Error::Estimation(_))
        ));
        assert!(matches!(
            fit_univariate(Family::Glmga, &[1.0, 2.0, 3.0], &FitOptions::default()),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn residual_midpoint() {
        let mut c = 0;
        assert_eq!(residual_from_pair(0.5, 0.5, &mut c).unwrap(), 0.0);
        assert!(residual_from_pair(0.0, 1.0, &mut c).unwrap() < -7.0);
        assert_eq!(c, 1);
    }
}
