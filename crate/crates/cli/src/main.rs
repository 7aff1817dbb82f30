//! `lossforge` command-line tool.
//!
//! Exit status: 0 on success, 1 for usage, configuration and input errors,
//! 2 for numerical or estimation failures.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lossforge::family::Family;
use lossforge::glmga::SamplingMethod;
use lossforge::Error;

#[derive(Parser, Debug)]
#[command(name = "lossforge", version, about = "GLMGA loss modelling: fitting, regression, risk measures, goodness of fit and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a univariate loss distribution.
    Fit(FitArgs),
    /// Fit a GLMGA regression (or a comparator regression).
    Regress(RegressArgs),
    /// VaR, TVaR, stop-loss premium and mean excess at given levels.
    Risk(RiskArgs),
    /// Goodness-of-fit statistics with parametric-bootstrap p-values.
    Gof(GofArgs),
    /// Fit several families and rank them by AIC and BIC.
    Compare(CompareArgs),
    /// Monte Carlo study of the regression estimators.
    Simulate(SimulateArgs),
    /// Draw random losses.
    Sample(SampleArgs),
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: String,
    /// Column holding the losses.
    #[arg(long = "loss-col", default_value = "loss")]
    loss_col: String,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<String>,
    /// Omit the timestamp so repeated runs give identical bytes.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = parse_family, default_value = "glmga")]
    family: Family,
    /// Write quantile residuals as CSV.
    #[arg(long)]
    residuals: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct RegressionCols {
    /// Covariates in the σ link (GLMGA).
    #[arg(long = "sigma-cols", value_delimiter = ',')]
    sigma_cols: Vec<String>,
    /// Covariates in the b link (GLMGA).
    #[arg(long = "b-cols", value_delimiter = ',')]
    b_cols: Vec<String>,
    /// Covariates of the comparator regressions.
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
}

impl RegressionCols {
    fn is_regression(&self) -> bool {
        !(self.sigma_cols.is_empty() && self.b_cols.is_empty() && self.covariates.is_empty())
    }

    fn all_columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for c in self.sigma_cols.iter().chain(&self.b_cols).chain(&self.covariates) {
            if !cols.contains(c) {
                cols.push(c.clone());
            }
        }
        cols
    }
}

#[derive(Args, Debug)]
struct RegressArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = parse_family, default_value = "glmga")]
    family: Family,
    #[command(flatten)]
    cols: RegressionCols,
    #[arg(long)]
    residuals: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RiskArgs {
    #[arg(long, value_parser = parse_family, default_value = "glmga")]
    family: Family,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Natural parameters in the family's order, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// Fit the family to this CSV first instead of taking parameters.
    #[arg(long)]
    input: Option<String>,
    #[arg(long = "loss-col", default_value = "loss")]
    loss_col: String,
    #[arg(long, value_delimiter = ',', default_value = "0.95,0.99")]
    levels: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GofArgs {
    #[command(flatten)]
    input: InputArgs,
    /// One or more families, comma separated.
    #[arg(long, value_parser = parse_family, value_delimiter = ',', default_value = "glmga")]
    family: Vec<Family>,
    #[command(flatten)]
    cols: RegressionCols,
    #[arg(long = "bootstrap-B", default_value_t = 1000)]
    bootstrap_b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// VaR backtest levels.
    #[arg(long, value_delimiter = ',', default_value = "0.95,0.99")]
    levels: Vec<f64>,
    /// Write Pareto QQ pairs (ln y, -ln(1 - i/(n+1))) as CSV.
    #[arg(long = "emit-pareto-qq")]
    emit_pareto_qq: Option<String>,
    /// Covariate used to group the Pareto QQ pairs.
    #[arg(long = "bin-col")]
    bin_col: Option<String>,
    /// Ascending bin edges for `--bin-col`.
    #[arg(long = "bin-edges", value_delimiter = ',', allow_hyphen_values = true)]
    bin_edges: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Families to compare (default: all implemented).
    #[arg(long = "family", value_parser = parse_family, value_delimiter = ',')]
    families: Vec<Family>,
    #[command(flatten)]
    cols: RegressionCols,
    #[arg(long, value_delimiter = ',', default_value = "0.95,0.99")]
    levels: Vec<f64>,
    /// Bootstrap replicates for goodness of fit; 0 skips the bootstrap.
    #[arg(long = "bootstrap-B", default_value_t = 0)]
    bootstrap_b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// JSON simulation configuration.
    #[arg(long)]
    config: String,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configuration's replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Write the summary rows as CSV.
    #[arg(long)]
    csv: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Method {
    TwoGamma,
    GammaMixture,
    HalfNormalGamma,
}

impl From<Method> for SamplingMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::TwoGamma => SamplingMethod::TwoGamma,
            Method::GammaMixture => SamplingMethod::GammaMixture,
            Method::HalfNormalGamma => SamplingMethod::HalfNormalGamma,
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, value_parser = parse_family, default_value = "glmga")]
    family: Family,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// GLMGA representation used for sampling.
    #[arg(long, value_enum, default_value = "two-gamma")]
    method: Method,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<String>,
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("LOSSFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("LOSSFORGE_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot configure {n} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), Error> {
    configure_threads()?;
    match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Regress(a) => commands::regress(a),
        Command::Risk(a) => commands::risk(a),
        Command::Gof(a) => commands::gof(a),
        Command::Compare(a) => commands::compare(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sample(a) => commands::sample(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lossforge: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
