use std::fs;
use std::io::Write;

use lossforge::data::{ingest_csv, LossSample};
use lossforge::family::{Family, Model, NOT_IMPLEMENTED};
use lossforge::gof::{self, pareto_qq};
use lossforge::inference::{self, FitOptions, FitResult, RegressionSpec};
use lossforge::report::{self, format_float, Metadata, NamedFit, NamedGof, ReportBundle};
use lossforge::rng;
use lossforge::simlab::{self, SimConfig};
use lossforge::{Error, Result};

use crate::{CompareArgs, FitArgs, GofArgs, InputArgs, OutputArgs, RegressArgs, RegressionCols, RiskArgs, SampleArgs, SimulateArgs};

/// Families that have a comparator regression.
const REGRESSION_COMPARATORS: [Family; 4] = [Family::Glogm, Family::Gb2, Family::Lognormal, Family::Gamma];

fn load(input: &InputArgs, columns: &[String], seed: Option<u64>, output: &OutputArgs) -> Result<(LossSample, Metadata)> {
    let ingested = ingest_csv(&input.input, &input.loss_col, columns)?;
    for r in &ingested.rejected {
        eprintln!("warning: line {} rejected: {}", r.line, r.reason);
    }
    let mut meta = Metadata::new(seed, output.deterministic);
    meta.source_path = ingested.sample.source_path.clone();
    meta.n_obs = Some(ingested.sample.len());
    meta.n_rejected_rows = Some(ingested.rejected.len());
    Ok((ingested.sample, meta))
}

fn write_text(path: &str, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{path}: {e}")))
}

fn emit(bundle: &ReportBundle, output: &OutputArgs) -> Result<()> {
    let json = bundle.to_json()?;
    match &output.out {
        Some(path) => write_text(path, &json),
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn write_residuals(path: &str, residuals: &[f64]) -> Result<()> {
    let mut s = String::from("index,residual\n");
    for (i, r) in residuals.iter().enumerate() {
        s.push_str(&format!("{i},{}\n", format_float(*r)));
    }
    write_text(path, &s)
}

/// Records the residual QQ correlation on the fit and optionally writes the
/// residuals.
fn attach_residuals(fit: &mut FitResult, sample: &LossSample, path: Option<&str>) -> Result<()> {
    let res = inference::quantile_residuals(fit, sample)?;
    if res.n_clamped > 0 {
        fit.notes.push(format!("{} residuals clamped at the cdf bounds", res.n_clamped));
    }
    fit.derived.insert("residual_qq_correlation".into(), gof::qq_correlation(&res.residuals)?);
    if let Some(p) = path {
        write_residuals(p, &res.residuals)?;
    }
    Ok(())
}

fn model_from_args(family: Family, sigma: Option<f64>, a: Option<f64>, b: Option<f64>, params: &[f64]) -> Result<Model> {
    if !params.is_empty() {
        return Model::from_params(family, params);
    }
    match (family, sigma, a, b) {
        (Family::Glmga, Some(s), Some(a), Some(b)) => Model::from_params(family, &[s, a, b]),
        (Family::Glmga, ..) => Err(Error::Config("GLMGA needs --sigma, --a and --b (or --params)".into())),
        _ => Err(Error::Config(format!(
            "give {family} parameters with --params {}",
            family.param_names().join(",")
        ))),
    }
}

fn glmga_spec(cols: &RegressionCols) -> RegressionSpec {
    RegressionSpec {
        sigma_columns: cols.sigma_cols.clone(),
        b_columns: cols.b_cols.clone(),
        sigma_intercept: true,
        b_intercept: true,
    }
}

fn glmga_regression_name(spec: &RegressionSpec) -> String {
    let side = |c: &[String]| if c.is_empty() { "1".to_string() } else { format!("1+{}", c.join("+")) };
    format!("glmga(sigma~{}, b~{})", side(&spec.sigma_columns), side(&spec.b_columns))
}

fn comparator_columns(cols: &RegressionCols) -> Vec<String> {
    if cols.covariates.is_empty() {
        cols.all_columns()
    } else {
        cols.covariates.clone()
    }
}

/// Fits `family` either univariately or as a regression on `cols`.
fn fit_family(family: Family, cols: &RegressionCols, sample: &LossSample, options: &FitOptions) -> Result<(String, FitResult)> {
    if !cols.is_regression() {
        return Ok((family.name().to_string(), inference::fit_univariate(family, &sample.losses, options)?));
    }
    if family == Family::Glmga {
        let spec = glmga_spec(cols);
        return Ok((glmga_regression_name(&spec), inference::fit_regression(&spec, sample, options)?));
    }
    let columns = comparator_columns(cols);
    let fit = inference::fit_comparator_regression(family, &columns, true, sample, options)?;
    Ok((format!("{family}(~1+{})", columns.join("+")), fit))
}

pub fn fit(a: FitArgs) -> Result<()> {
    let (sample, meta) = load(&a.input, &[], a.seed, &a.output)?;
    let mut fit = inference::fit_univariate(a.family, &sample.losses, &FitOptions::default())?;
    attach_residuals(&mut fit, &sample, a.residuals.as_deref())?;
    let mut bundle = ReportBundle::new("fit", meta);
    bundle.fits.push(NamedFit { name: a.family.name().into(), fit });
    emit(&bundle, &a.output)
}

pub fn regress(a: RegressArgs) -> Result<()> {
    if !a.cols.is_regression() {
        return Err(Error::Config("regress needs --sigma-cols, --b-cols or --covariates".into()));
    }
    let (sample, meta) = load(&a.input, &a.cols.all_columns(), a.seed, &a.output)?;
    let (name, mut fit) = fit_family(a.family, &a.cols, &sample, &FitOptions::default())?;
    attach_residuals(&mut fit, &sample, a.residuals.as_deref())?;
    let mut bundle = ReportBundle::new("regress", meta);
    bundle.fits.push(NamedFit { name, fit });
    emit(&bundle, &a.output)
}

pub fn risk(a: RiskArgs) -> Result<()> {
    let mut bundle;
    let model = if let Some(path) = &a.input {
        let input = InputArgs { input: path.clone(), loss_col: a.loss_col.clone() };
        let (sample, meta) = load(&input, &[], None, &a.output)?;
        bundle = ReportBundle::new("risk", meta);
        let fit = inference::fit_univariate(a.family, &sample.losses, &FitOptions::default())?;
        let m = fit.model()?;
        bundle.fits.push(NamedFit { name: a.family.name().into(), fit });
        m
    } else {
        bundle = ReportBundle::new("risk", Metadata::new(None, a.output.deterministic));
        model_from_args(a.family, a.sigma, a.a, a.b, &a.params)?
    };
    bundle.risk = report::risk_table(&model, &a.levels)?;
    if a.family != Family::Glmga {
        bundle.notes.push(format!("TVaR, stop-loss and mean excess are only tabulated for glmga, not {}", a.family));
    }
    for r in &bundle.risk {
        if r.tvar.is_none() && a.family == Family::Glmga {
            bundle.notes.push(format!("TVaR at level {} does not exist (sigma >= 1/2)", r.level));
        }
    }
    emit(&bundle, &a.output)
}

fn write_pareto_qq(path: &str, sample: &LossSample, bin_col: Option<&str>, edges: &[f64]) -> Result<()> {
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("--bin-edges must be strictly ascending".into()));
    }
    let label = |k: usize| -> String {
        match k {
            _ if edges.is_empty() => "all".into(),
            0 => format!("(-inf,{})", edges[0]),
            k if k == edges.len() => format!("[{},inf)", edges[k - 1]),
            k => format!("[{},{})", edges[k - 1], edges[k]),
        }
    };
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    match bin_col {
        Some(col) => {
            let x = sample
                .covariate(col)
                .ok_or_else(|| Error::Config(format!("bin column '{col}' was not loaded")))?;
            let mut bins = vec![Vec::new(); edges.len() + 1];
            for (y, v) in sample.losses.iter().zip(x) {
                bins[edges.partition_point(|e| e <= v)].push(*y);
            }
            groups.extend(bins.into_iter().enumerate().filter(|(_, ys)| !ys.is_empty()).map(|(k, ys)| (label(k), ys)));
        }
        None => groups.push(("all".into(), sample.losses.clone())),
    }
    let mut s = String::from("bin,ln_loss,exponential_quantile\n");
    for (g, ys) in &groups {
        for (lx, q) in pareto_qq(ys)? {
            s.push_str(&format!("\"{g}\",{},{}\n", format_float(lx), format_float(q)));
        }
    }
    write_text(path, &s)
}

pub fn gof(a: GofArgs) -> Result<()> {
    let mut columns = a.cols.all_columns();
    if let Some(c) = &a.bin_col {
        if !columns.contains(c) {
            columns.push(c.clone());
        }
    }
    let (sample, meta) = load(&a.input, &columns, Some(a.seed), &a.output)?;
    let mut bundle = ReportBundle::new("gof", meta);
    let options = FitOptions::default();
    let mut backtest_models = Vec::new();
    for (k, family) in a.family.iter().enumerate() {
        let (name, fit) = fit_family(*family, &a.cols, &sample, &options)?;
        let seed = rng::derive_seed(a.seed, &[k as u64]);
        let report = gof::gof_report(&fit, &sample, a.bootstrap_b, seed, &options)?;
        if report.unreliable {
            bundle.notes.push(format!("{name}: {} of {} bootstrap refits failed; p-values unreliable", report.n_dropped, report.n_bootstrap));
        }
        if let Ok(m) = fit.model() {
            backtest_models.push((name.clone(), m));
        }
        bundle.gof.push(NamedGof { name: name.clone(), report });
        bundle.fits.push(NamedFit { name, fit });
    }
    if !backtest_models.is_empty() && !a.levels.is_empty() {
        bundle.backtest = gof::var_backtest(&sample.losses, &backtest_models, &a.levels)?;
    }
    if let Some(path) = &a.emit_pareto_qq {
        write_pareto_qq(path, &sample, a.bin_col.as_deref(), &a.bin_edges)?;
    }
    emit(&bundle, &a.output)
}

pub fn compare(a: CompareArgs) -> Result<()> {
    let (sample, meta) = load(&a.input, &a.cols.all_columns(), Some(a.seed), &a.output)?;
    let mut bundle = ReportBundle::new("compare", meta);
    let regression = a.cols.is_regression();
    let families: Vec<Family> = if a.families.is_empty() {
        if regression {
            std::iter::once(Family::Glmga).chain(REGRESSION_COMPARATORS).collect()
        } else {
            Family::ALL.to_vec()
        }
    } else {
        a.families.clone()
    };
    let options = FitOptions::default();
    let mut fits: Vec<(String, FitResult)> = Vec::new();
    for family in families {
        if regression && family != Family::Glmga && !REGRESSION_COMPARATORS.contains(&family) {
            bundle.not_implemented.push(format!("{family} regression"));
            continue;
        }
        match fit_family(family, &a.cols, &sample, &options) {
            Ok((name, mut fit)) => {
                attach_residuals(&mut fit, &sample, None)?;
                fits.push((name, fit));
            }
            Err(e) if !e.is_usage() || matches!(e, Error::Domain(_)) => {
                bundle.notes.push(format!("{family}: not fitted: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    if fits.is_empty() {
        return Err(Error::Estimation("no family could be fitted".into()));
    }
    bundle.not_implemented.extend(NOT_IMPLEMENTED.iter().map(|s| s.to_string()));
    let named: Vec<(String, &FitResult)> = fits.iter().map(|(n, f)| (n.clone(), f)).collect();
    bundle.ranking = Some(gof::rank_models(&named)?);
    if !regression && !a.levels.is_empty() {
        let models = fits
            .iter()
            .map(|(n, f)| Ok((n.clone(), f.model()?)))
            .collect::<Result<Vec<_>>>()?;
        bundle.backtest = gof::var_backtest(&sample.losses, &models, &a.levels)?;
    }
    if a.bootstrap_b > 0 {
        for (k, (name, fit)) in fits.iter().enumerate() {
            let seed = rng::derive_seed(a.seed, &[k as u64]);
            let report = gof::gof_report(fit, &sample, a.bootstrap_b, seed, &options)?;
            bundle.gof.push(NamedGof { name: name.clone(), report });
        }
    }
    bundle.fits = fits.into_iter().map(|(name, fit)| NamedFit { name, fit }).collect();
    emit(&bundle, &a.output)
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| Error::Io(format!("{}: {e}", a.config)))?;
    let mut config: SimConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", a.config)))?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(r) = a.replications {
        config.n_replications = r;
    }
    let report = simlab::run_simulation(&config)?;
    let mut bundle = ReportBundle::new("simulate", Metadata::new(Some(config.seed), a.output.deterministic));
    for (n, err) in &report.size_errors {
        bundle.notes.push(format!("n={n}: {err}"));
    }
    if let Some(path) = &a.csv {
        write_text(path, &report.to_csv()?)?;
    }
    bundle.simulation = Some(report);
    emit(&bundle, &a.output)
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let model = model_from_args(a.family, a.sigma, a.a, a.b, &a.params)?;
    let draws = match model {
        Model::Glmga(g) => g.sample_with(a.method.into(), a.n, a.seed),
        other => other.sample_rng(a.n, &mut rng::seeded(a.seed))?,
    };
    let mut s = String::from("loss\n");
    for v in draws {
        s.push_str(&format!("{v}\n"));
    }
    match &a.out {
        Some(p) => write_text(p, &s),
        None => std::io::stdout()
            .write_all(s.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}
