use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lossforge::gof::rank_models;
use lossforge::report::ReportBundle;
use tempfile::TempDir;

fn lossforge(args: &[&str]) -> Output {
    lossforge_env(args, &[])
}

fn lossforge_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lossforge"));
    cmd.args(args).env_remove("LOSSFORGE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Draws a GLMGA sample to `losses.csv` through the CLI.
fn sample_file(dir: &TempDir, n: usize) -> PathBuf {
    let p = path(dir, "losses.csv");
    let n = n.to_string();
    let o = lossforge(&["sample", "--sigma", "0.3", "--a", "2", "--b", "1", "--n", &n, "--seed", "3", "--out", s(&p)]);
    stdout(&o);
    p
}

fn regression_file(dir: &TempDir) -> PathBuf {
    let p = path(dir, "reg.csv");
    let draws = std::fs::read_to_string(sample_file(dir, 300)).unwrap();
    let mut text = String::from("loss,x1,x2\n");
    for (i, line) in draws.lines().skip(1).enumerate() {
        let x1 = ((i * 37) % 101) as f64 / 50.0 - 1.0;
        let x2 = ((i * 53) % 97) as f64 / 48.0 - 1.0;
        let y: f64 = line.parse().unwrap();
        text.push_str(&format!("{},{x1},{x2}\n", y * (0.3 * x1).exp()));
    }
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(lossforge(&["--help"]).status.code(), Some(0));
    assert_eq!(lossforge(&["bogus"]).status.code(), Some(1));
    assert_eq!(lossforge(&["fit", "--input", "x.csv", "--family", "weibull"]).status.code(), Some(1));
    assert_eq!(lossforge(&["fit", "--input", "/definitely/not/here.csv"]).status.code(), Some(1));
    assert_eq!(lossforge(&["risk", "--sigma", "0.3"]).status.code(), Some(1));
}

#[test]
fn estimation_failure_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "flat.csv");
    std::fs::write(&p, "loss\n".to_string() + &"5\n".repeat(30)).unwrap();
    let o = lossforge(&["fit", "--input", s(&p)]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_thread_count_is_a_configuration_error() {
    let o = lossforge_env(&["risk", "--sigma", "0.2", "--a", "1", "--b", "1"], &[("LOSSFORGE_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fit_reports_parameters_and_residuals() {
    let dir = TempDir::new().unwrap();
    let input = sample_file(&dir, 400);
    let res = path(&dir, "res.csv");
    let out = stdout(&lossforge(&["fit", "--input", s(&input), "--residuals", s(&res), "--deterministic"]));
    let bundle = ReportBundle::from_json(&out).unwrap();
    let fit = &bundle.fits[0].fit;
    assert_eq!(fit.parameter_names, ["sigma", "a", "b"]);
    assert!((fit.estimates[0] - 0.3).abs() < 0.1);
    assert_eq!(bundle.metadata.n_obs, Some(400));
    assert_eq!(bundle.metadata.timestamp, None);
    assert_eq!(std::fs::read_to_string(res).unwrap().lines().count(), 401);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = sample_file(&dir, 200);
    let args = ["gof", "--input", s(&input), "--bootstrap-B", "99", "--seed", "5", "--deterministic"];
    let a = stdout(&lossforge(&args));
    let b = stdout(&lossforge(&args));
    assert_eq!(a, b);
    let c = stdout(&lossforge_env(&args, &[("LOSSFORGE_THREADS", "1")]));
    assert_eq!(a, c);
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "sim.json");
    std::fs::write(
        &cfg,
        r#"{"true_coefficients": {"beta": [-1.0, 0.5], "alpha": [1.0, 0.5], "eta": 0.0},
            "sample_sizes": [80], "n_replications": 6, "seed": 1}"#,
    )
    .unwrap();
    let csv = path(&dir, "sim.csv");
    let args = ["simulate", "--config", s(&cfg), "--seed", "7", "--deterministic", "--csv", s(&csv)];
    let a = stdout(&lossforge(&args));
    let b = stdout(&lossforge(&args));
    assert_eq!(a, b);
    let bundle = ReportBundle::from_json(&a).unwrap();
    assert_eq!(bundle.simulation.unwrap().config.seed, 7);
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 1 + 5);
}

#[test]
fn risk_table_orders_tvar_above_var() {
    let out = stdout(&lossforge(&["risk", "--family", "glmga", "--sigma", "0.2", "--a", "1", "--b", "1", "--levels", "0.95,0.99"]));
    let bundle = ReportBundle::from_json(&out).unwrap();
    assert_eq!(bundle.risk.len(), 2);
    for row in &bundle.risk {
        assert!(row.tvar.unwrap() >= row.var);
        assert!(row.stop_loss_at_var.unwrap() >= 0.0);
    }
    let lognormal = stdout(&lossforge(&["risk", "--family", "lognormal", "--params", "-0.5,1.0"]));
    assert_eq!(ReportBundle::from_json(&lognormal).unwrap().risk.len(), 2);
}

#[test]
fn compare_round_trips_through_json() {
    let dir = TempDir::new().unwrap();
    let input = sample_file(&dir, 300);
    let out = stdout(&lossforge(&["compare", "--input", s(&input), "--deterministic"]));
    let bundle = ReportBundle::from_json(&out).unwrap();
    assert!(bundle.not_implemented.iter().any(|f| f == "weibull"));
    let refs: Vec<(String, &_)> = bundle.fits.iter().map(|f| (f.name.clone(), &f.fit)).collect();
    assert_eq!(rank_models(&refs).unwrap(), bundle.ranking.clone().unwrap());
    assert_eq!(ReportBundle::from_json(&bundle.to_json().unwrap()).unwrap(), bundle);
}

#[test]
fn regression_comparison_lists_all_models() {
    let dir = TempDir::new().unwrap();
    let input = regression_file(&dir);
    let out = stdout(&lossforge(&[
        "compare", "--input", s(&input), "--sigma-cols", "x1", "--b-cols", "x2", "--covariates", "x1,x2",
        "--deterministic",
    ]));
    let bundle = ReportBundle::from_json(&out).unwrap();
    let ranking = bundle.ranking.unwrap();
    assert_eq!(ranking.by_aic.len(), 5);
    let glmga = ranking.by_aic.iter().find(|r| r.model.starts_with("glmga")).unwrap();
    assert_eq!(glmga.n_params, 5);
}

#[test]
fn regress_with_glmga_and_comparator() {
    let dir = TempDir::new().unwrap();
    let input = regression_file(&dir);
    let out = stdout(&lossforge(&["regress", "--input", s(&input), "--sigma-cols", "x1", "--b-cols", "x2"]));
    let fit = &ReportBundle::from_json(&out).unwrap().fits[0].fit;
    assert_eq!(fit.parameter_names, ["beta[intercept]", "beta[x1]", "alpha[intercept]", "alpha[x2]", "eta"]);
    let out = stdout(&lossforge(&["regress", "--input", s(&input), "--family", "lognormal", "--covariates", "x1"]));
    assert_eq!(ReportBundle::from_json(&out).unwrap().fits[0].fit.n_params, 3);
    assert_eq!(lossforge(&["regress", "--input", s(&input)]).status.code(), Some(1));
}

#[test]
fn pareto_qq_is_grouped_by_bins() {
    let dir = TempDir::new().unwrap();
    let input = regression_file(&dir);
    let qq = path(&dir, "qq.csv");
    stdout(&lossforge(&[
        "gof", "--input", s(&input), "--bootstrap-B", "99", "--emit-pareto-qq", s(&qq), "--bin-col", "x1",
        "--bin-edges", "-0.5,0.5",
    ]));
    let text = std::fs::read_to_string(qq).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.remove(0), "bin,ln_loss,exponential_quantile");
    assert_eq!(lines.len(), 300);
    assert!(lines.iter().any(|l| l.starts_with("\"(-inf,-0.5)\"")));
    assert!(lines.iter().any(|l| l.starts_with("\"[0.5,inf)\"")));
}

#[test]
fn rejected_rows_are_counted() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "dirty.csv");
    let mut text = String::from("loss\n");
    for i in 1..=40 {
        text.push_str(&format!("{}\n", 1.0 + i as f64 / 10.0));
    }
    text.push_str("-3\nabc\n");
    std::fs::write(&p, text).unwrap();
    let o = lossforge(&["fit", "--input", s(&p), "--family", "lognormal"]);
    let bundle = ReportBundle::from_json(&stdout(&o)).unwrap();
    assert_eq!(bundle.metadata.n_rejected_rows, Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rejected"));
}
