//! The `fcgam` command line: argument parsing, command dispatch, manifests.
//!
//! Every command writes its outputs plus a `manifest.json` into `--out-dir`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::copula::{kendall_tau, theta_from_tau, FrankTheta};
use crate::error::{Error, Result};
use crate::inference::{credible_intervals, default_transforms, posterior_sample};
use crate::io::{read_dataset, read_fit_path, read_table_path, write_dataset, write_fit_json, write_intervals};
use crate::model::{
    conditional_summaries, fit, predictors, quantile_residuals, FitOptions, GradientMode, Summary, ThetaMode,
};
use crate::optim::BfgsOptions;
use crate::ratio::{ratio_cdf, ratio_median, ratio_pdf_lambda, ratio_quantile, RatioLaw};
use crate::simlab::{run_study, write_tidy_csv, Method, SimConfig, StudyId, StudyOptions};
use crate::specfun::QuadratureConfig;
use crate::stats::ks_statistic;

/// Default for `--seed`.
pub const DEFAULT_SEED: u64 = 20_200_617;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain { .. }
        | Error::Dimension { .. }
        | Error::InvalidData(_)
        | Error::RankDeficient { .. }
        | Error::Usage(_)
        | Error::Csv(_)
        | Error::Json(_) => EXIT_INPUT,
        Error::Optimizer(_) => EXIT_NONCONVERGENCE,
        Error::QuadratureNonConvergence { .. }
        | Error::Bracket(_)
        | Error::Divergence(_)
        | Error::IndefiniteInformation { .. }
        | Error::Io(_) => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fcgam",
    version,
    about = "Frank-copula regression for ratios of gamma components"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Directory for results and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,
    /// Gauss-Kronrod points per panel (15 or 31).
    #[arg(long, global = true, default_value_t = 15)]
    pub quad_nodes: usize,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub quad_abs_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub quad_rel_tol: f64,
    #[arg(long, global = true, default_value_t = 200)]
    pub quad_max_subdivisions: usize,
}

impl Common {
    fn quadrature(&self) -> Result<QuadratureConfig> {
        QuadratureConfig::new(
            self.quad_nodes,
            self.quad_abs_tol,
            self.quad_rel_tol,
            self.quad_max_subdivisions,
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum-likelihood fit with posterior percentile intervals.
    Fit(FitArgs),
    /// Conditional quantiles and means of R at new covariate rows.
    Predict(PredictArgs),
    /// Draw a data set from a simulation scenario.
    Simulate(SimulateArgs),
    /// Replicated simulation study.
    Study(StudyArgs),
    /// Density and CDF of R on a grid, plus medians across Λ.
    DensityGrid(GridArgs),
    /// Kendall's τ from θ, or θ from τ.
    Tau(TauArgs),
    /// Quantile residuals of a fitted model.
    Residuals(ResidualArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientArg {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// CSV with columns u, v and numeric covariates.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "constant")]
    pub theta_mode: ThetaMode,
    /// Credible level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Posterior draws for the intervals.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Regularize an indefinite information matrix instead of failing.
    #[arg(long)]
    pub ridge_fallback: bool,
    #[arg(long, value_enum, default_value = "analytic")]
    pub gradient: GradientArg,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    /// fit.json from `fcgam fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// CSV with the fit's covariate columns (u, v are ignored).
    #[arg(long)]
    pub input: PathBuf,
    /// Probability levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,0.9")]
    pub quantiles: Vec<f64>,
    /// Also report the conditional mean.
    #[arg(long)]
    pub mean: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioArgs {
    /// Scenario: 1, 2, 3a or 3b.
    #[arg(long)]
    pub study: String,
    /// θ intercept from the scenario grid (1: -1,-5,-10; 2: 1,5,10).
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
}

impl ScenarioArgs {
    fn config(&self, replications: usize, seed: u64) -> Result<SimConfig> {
        SimConfig::preset(self.study.parse::<StudyId>()?, self.theta0, self.n, replications, seed)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StudyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    /// Test rows per replication (defaults to n).
    #[arg(long)]
    pub test_size: Option<usize>,
    /// Methods, comma separated (FCGAM, FCGAM.modeled, LN, LN.LSS, GA, GA.LSS, GB2).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long)]
    pub no_coverage: bool,
    #[arg(long)]
    pub no_median_rmse: bool,
    #[arg(long)]
    pub no_ratio_loglik: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Values of Λ = λ_U/λ_V, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub shape_u: f64,
    #[arg(long, default_value_t = 2.0)]
    pub shape_v: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-10,1,10")]
    pub theta: Vec<f64>,
    /// Grid points per curve.
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Largest r on the grid (default: far enough out to hold all but 1e-6 of the mass).
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Λ values for the median sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1,2,4")]
    pub median_lambda: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TauArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "tau")]
    pub theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tau: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResidualArgs {
    #[arg(long)]
    pub fit: PathBuf,
    /// CSV with u, v and the fit's covariates.
    #[arg(long)]
    pub input: PathBuf,
}

/// What a command produced, for the manifest.
struct Outcome {
    outputs: Vec<String>,
    status: &'static str,
    exit: i32,
    notes: BTreeMap<String, Value>,
}

impl Outcome {
    fn ok(outputs: Vec<String>) -> Self {
        Outcome {
            outputs,
            status: "ok",
            exit: EXIT_OK,
            notes: BTreeMap::new(),
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(dir, name)?))
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a Value,
    config_sha256: String,
    outputs: &'a [String],
    status: &'a str,
    exit_code: i32,
    notes: &'a BTreeMap<String, Value>,
}

fn write_manifest(dir: &Path, command: &str, seed: u64, config: &Value, outcome: &Outcome) -> Result<()> {
    // `Value` objects keep their keys sorted, so the text is canonical.
    let canonical = serde_json::to_string(config)?;
    let hash = Sha256::digest(canonical.as_bytes());
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        config_sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
        outputs: &outcome.outputs,
        status: outcome.status,
        exit_code: outcome.exit,
        notes: &outcome.notes,
    };
    let mut w = create(dir, "manifest.json")?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command; errors are returned for the caller to map.
pub fn execute(cli: &Cli) -> Result<i32> {
    let common = &cli.common;
    fs::create_dir_all(&common.out_dir)?;
    let pool = match common.jobs {
        Some(0) => return Err(Error::Usage("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let dir = common.out_dir.as_path();
    let (name, config, outcome) = pool.install(|| -> Result<(&str, Value, Outcome)> {
        Ok(match &cli.command {
            Command::Fit(a) => ("fit", config_json(common, a)?, cmd_fit(common, a, dir)?),
            Command::Predict(a) => ("predict", config_json(common, a)?, cmd_predict(common, a, dir)?),
            Command::Simulate(a) => ("simulate", config_json(common, a)?, cmd_simulate(common, a, dir)?),
            Command::Study(a) => ("study", config_json(common, a)?, cmd_study(common, a, dir)?),
            Command::DensityGrid(a) => (
                "density-grid",
                config_json(common, a)?,
                cmd_density_grid(common, a, dir)?,
            ),
            Command::Tau(a) => ("tau", config_json(common, a)?, cmd_tau(a, dir)?),
            Command::Residuals(a) => ("residuals", config_json(common, a)?, cmd_residuals(common, a, dir)?),
        })
    })?;
    write_manifest(dir, name, common.seed, &config, &outcome)?;
    Ok(outcome.exit)
}

fn config_json<A: Serialize>(common: &Common, args: &A) -> Result<Value> {
    Ok(json!({ "common": common, "args": args }))
}

fn cmd_fit(common: &Common, a: &FitArgs, dir: &Path) -> Result<Outcome> {
    let data = read_dataset(&a.input)?;
    let opts = FitOptions {
        bfgs: BfgsOptions {
            max_iter: a.max_iter,
            ..BfgsOptions::default()
        },
        gradient: match a.gradient {
            GradientArg::Analytic => GradientMode::Analytic,
            GradientArg::FiniteDifference => GradientMode::FiniteDifference,
        },
        ridge_fallback: a.ridge_fallback,
        ..FitOptions::default()
    };
    info!("fitting {} rows, theta {}", data.n(), a.theta_mode);
    let f = fit(&data, a.theta_mode, None, &opts)?;
    write_fit_json(&f, create(dir, "fit.json")?)?;
    let mut outcome = Outcome::ok(vec!["fit.json".into()]);
    outcome.notes.insert("loglik".into(), json!(f.loglik));
    outcome.notes.insert("bic".into(), json!(f.bic));
    outcome.notes.insert("iterations".into(), json!(f.iterations));
    if !f.converged {
        warn!("fit did not converge: {}", f.message);
        outcome.status = "not converged";
        outcome.exit = EXIT_NONCONVERGENCE;
        outcome.notes.insert("message".into(), json!(f.message));
        return Ok(outcome);
    }
    if let Some(info) = &f.information {
        if info.ridge > 0.0 {
            outcome.notes.insert("ridge".into(), json!(info.ridge));
        }
    }
    let sample = posterior_sample(&f, a.draws, common.seed)?;
    let intervals = credible_intervals(&sample, a.level, &default_transforms(&f))?;
    write_intervals(&intervals, create(dir, "intervals.csv")?)?;
    outcome.outputs.push("intervals.csv".into());
    Ok(outcome)
}

fn cmd_predict(common: &Common, a: &PredictArgs, dir: &Path) -> Result<Outcome> {
    let f = read_fit_path(&a.fit)?;
    let table = read_table_path(&a.input, false)?;
    let want = &f.column_names[1..];
    if table.covariate_names != want {
        return Err(Error::InvalidData(format!(
            "covariate columns [{}] do not match the fit's [{}]",
            table.covariate_names.join(", "),
            want.join(", ")
        )));
    }
    for &p in &a.quantiles {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Usage(format!("quantile level {p} must lie in (0, 1)")));
        }
    }
    let x = table.design()?;
    let cfg = common.quadrature()?;
    let mut what: Vec<Summary> = a.quantiles.iter().map(|&p| Summary::Quantile(p)).collect();
    if a.mean {
        what.push(Summary::Mean);
    }
    let summaries = conditional_summaries(&f.coefficients, &x, &what, &cfg)?;
    let rows: Vec<Vec<f64>> = summaries
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let p = predictors(&f.coefficients, x.row(i))?;
            let mut out = vec![p.capital_lambda, p.theta, kendall_tau(FrankTheta::new(p.theta)?)];
            out.extend(s);
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut w = csv_writer(dir, "predictions.csv")?;
    let mut header = vec!["row".to_string(), "capital_lambda".into(), "theta".into(), "tau".into()];
    header.extend(a.quantiles.iter().map(|p| format!("q{p}")));
    if a.mean {
        header.push("mean".into());
    }
    w.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(r.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(Outcome::ok(vec!["predictions.csv".into()]))
}

fn cmd_simulate(common: &Common, a: &SimulateArgs, dir: &Path) -> Result<Outcome> {
    let cfg = a.scenario.config(1, common.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let x = crate::simlab::generate_covariates(cfg.n, &mut rng);
    let data = crate::simlab::generate_dataset(&cfg.truth, x, &mut rng)?;
    write_dataset(&data, create(dir, "data.csv")?)?;
    serde_json::to_writer_pretty(create(dir, "truth.json")?, &cfg.truth)?;
    Ok(Outcome::ok(vec!["data.csv".into(), "truth.json".into()]))
}

fn cmd_study(common: &Common, a: &StudyArgs, dir: &Path) -> Result<Outcome> {
    let mut cfg = a.scenario.config(a.replications, common.seed)?;
    if let Some(t) = a.test_size {
        if t == 0 {
            return Err(Error::Usage("--test-size must be positive".into()));
        }
        cfg.test_size = t;
    }
    let mut opts = StudyOptions::for_study(cfg.study);
    if let Some(ms) = &a.methods {
        opts.methods = ms.iter().map(|m| m.parse::<Method>()).collect::<Result<_>>()?;
    }
    opts.level = a.level;
    opts.posterior_draws = a.draws;
    opts.coverage = !a.no_coverage;
    opts.median_rmse = !a.no_median_rmse;
    opts.ratio_loglik = !a.no_ratio_loglik;
    opts.quadrature = common.quadrature()?;
    info!("study {}: n = {}, {} replications", cfg.study, cfg.n, cfg.replications);
    let report = run_study(&cfg, &opts)?;
    write_tidy_csv(&report, create(dir, "replications.csv")?)?;
    let mut w = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut w, &report.summary)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    let mut outcome = Outcome::ok(vec!["replications.csv".into(), "summary.json".into()]);
    let s = &report.summary;
    outcome.notes.insert("excluded".into(), json!(s.excluded));
    outcome.notes.insert("exclusion_rate".into(), json!(s.exclusion_rate));
    if s.exclusion_rate >= 0.02 {
        warn!("{} of {} replications excluded", s.excluded, s.replications);
        outcome.status = "too many excluded replications";
        outcome.exit = EXIT_NONCONVERGENCE;
    }
    Ok(outcome)
}

/// `r` on `[0, r_max]`, evenly spaced in `t = Λr / (1 + Λr)` so both the peak
/// and the heavy right tail get points.
fn grid_points(points: usize, lambda: f64, r_max: f64) -> Vec<f64> {
    let t_max = lambda * r_max / (1.0 + lambda * r_max);
    (0..points)
        .map(|j| {
            let t = t_max * j as f64 / (points - 1) as f64;
            t / (lambda * (1.0 - t))
        })
        .collect()
}

fn cmd_density_grid(common: &Common, a: &GridArgs, dir: &Path) -> Result<Outcome> {
    if a.points < 3 {
        return Err(Error::Usage("--points must be at least 3".into()));
    }
    let cfg = common.quadrature()?;
    let mut cells = Vec::new();
    for &l in &a.lambda {
        for &t in &a.theta {
            cells.push(RatioLaw::new(l, a.shape_u, a.shape_v, t)?);
        }
    }
    let curves: Vec<Vec<[f64; 3]>> = cells
        .par_iter()
        .map(|law| {
            let r_max = match a.r_max {
                Some(r) if r > 0.0 => r,
                Some(r) => return Err(Error::Usage(format!("--r-max {r} must be positive"))),
                None => ratio_quantile(law, 1.0 - 1e-6, &cfg)?,
            };
            grid_points(a.points, law.capital_lambda(), r_max)
                .into_iter()
                .map(|r| {
                    if r == 0.0 {
                        // The density vanishes at the origin only for δ_U > 1.
                        let p0 = if law.shape_u() > 1.0 { 0.0 } else { f64::NAN };
                        return Ok([0.0, p0, 0.0]);
                    }
                    Ok([r, ratio_pdf_lambda(law, r, &cfg)?, ratio_cdf(law, r, &cfg)?])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut w = csv_writer(dir, "density_grid.csv")?;
    w.write_record(["capital_lambda", "shape_u", "shape_v", "theta", "r", "pdf", "cdf"])?;
    for (law, curve) in cells.iter().zip(&curves) {
        for p in curve {
            w.write_record(
                [
                    law.capital_lambda(),
                    law.shape_u(),
                    law.shape_v(),
                    law.theta(),
                    p[0],
                    p[1],
                    p[2],
                ]
                .map(|v| v.to_string()),
            )?;
        }
    }
    w.flush()?;
    let mut w = csv_writer(dir, "medians.csv")?;
    w.write_record(["capital_lambda", "shape_u", "shape_v", "theta", "median"])?;
    let medians: Vec<(RatioLaw, f64)> = a
        .median_lambda
        .iter()
        .flat_map(|&l| a.theta.iter().map(move |&t| (l, t)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(l, t)| {
            let law = RatioLaw::new(l, a.shape_u, a.shape_v, t)?;
            Ok((law, ratio_median(&law, &cfg)?))
        })
        .collect::<Result<_>>()?;
    for (law, m) in medians {
        w.write_record([law.capital_lambda(), law.shape_u(), law.shape_v(), law.theta(), m].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(Outcome::ok(vec!["density_grid.csv".into(), "medians.csv".into()]))
}

fn cmd_tau(a: &TauArgs, dir: &Path) -> Result<Outcome> {
    let pairs: Vec<(f64, f64)> = match (&a.theta, &a.tau) {
        (Some(th), None) => th
            .iter()
            .map(|&t| Ok((t, kendall_tau(FrankTheta::new(t)?))))
            .collect::<Result<_>>()?,
        (None, Some(ta)) => ta.iter().map(|&t| Ok((theta_from_tau(t)?, t))).collect::<Result<_>>()?,
        _ => return Err(Error::Usage("give exactly one of --theta or --tau".into())),
    };
    let mut w = csv_writer(dir, "tau.csv")?;
    w.write_record(["theta", "tau"])?;
    for (th, t) in &pairs {
        w.write_record([th.to_string(), t.to_string()])?;
        println!("theta = {th:>10.6}  tau = {t:>9.6}");
    }
    w.flush()?;
    Ok(Outcome::ok(vec!["tau.csv".into()]))
}

fn cmd_residuals(common: &Common, a: &ResidualArgs, dir: &Path) -> Result<Outcome> {
    let f = read_fit_path(&a.fit)?;
    let data = read_dataset(&a.input)?;
    if data.x().column_names() != f.column_names {
        return Err(Error::InvalidData(format!(
            "data columns [{}] do not match the fit's [{}]",
            data.x().column_names().join(", "),
            f.column_names.join(", ")
        )));
    }
    let res = quantile_residuals(&f.coefficients, &data, &common.quadrature()?)?;
    let mut w = csv_writer(dir, "residuals.csv")?;
    w.write_record(["row", "r", "residual"])?;
    let r = data.ratios();
    for (i, e) in res.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r[i].to_string(), e.to_string()])?;
    }
    w.flush()?;
    let ks = ks_statistic(&res, crate::specfun::std_normal_cdf);
    let mut outcome = Outcome::ok(vec!["residuals.csv".into()]);
    outcome.notes.insert("ks_statistic".into(), json!(ks));
    println!("{} residuals, KS distance to N(0,1) = {ks:.4}", res.len());
    Ok(outcome)
}
