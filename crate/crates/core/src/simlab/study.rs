//! Replicated fit-and-evaluate runs over a scenario.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::benchmark::{fit_benchmark, BenchmarkKind};
use super::{SimConfig, StudyId};
use crate::error::{Error, Result};
use crate::inference::{credible_intervals, posterior_sample, predictive_loglik, ratio_predictive_loglik, Transform};
use crate::model::{conditional_summaries, fit, CoefficientVector, Dataset, FitOptions, Summary, ThetaMode};
use crate::specfun::QuadratureConfig;
use crate::stats::{mean, sd};

/// A model fitted in each replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    Fcgam(ThetaMode),
    Benchmark(BenchmarkKind),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Fcgam(ThetaMode::Constant) => "FCGAM".into(),
            Method::Fcgam(ThetaMode::Modeled) => "FCGAM.modeled".into(),
            Method::Benchmark(k) => k.label().into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fcgam" | "fcgam.constant" => Ok(Method::Fcgam(ThetaMode::Constant)),
            "fcgam.modeled" | "fcgam.modelled" => Ok(Method::Fcgam(ThetaMode::Modeled)),
            _ => s.parse().map(Method::Benchmark),
        }
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.label()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    /// The first copula model in the list is the primary one: its failure
    /// excludes the replication.
    pub methods: Vec<Method>,
    /// Credible level for coverage.
    pub level: f64,
    pub posterior_draws: usize,
    pub coverage: bool,
    /// RMSE of conditional medians on the test rows.
    pub median_rmse: bool,
    /// Held-out log-likelihood of the ratios under the copula models.
    pub ratio_loglik: bool,
    #[serde(skip, default)]
    pub fit: FitOptions,
    #[serde(skip, default)]
    pub quadrature: QuadratureConfig,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            methods: vec![Method::Fcgam(ThetaMode::Constant)],
            level: 0.95,
            posterior_draws: 10_000,
            coverage: true,
            median_rmse: true,
            ratio_loglik: true,
            fit: FitOptions::default(),
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl StudyOptions {
    /// Methods compared in each scenario: the copula model against every
    /// benchmark for the first two, modeled against constant `θ` for the third.
    pub fn for_study(study: StudyId) -> Self {
        let methods = match study {
            StudyId::One | StudyId::Two => std::iter::once(Method::Fcgam(ThetaMode::Constant))
                .chain(BenchmarkKind::ALL.map(Method::Benchmark))
                .collect(),
            StudyId::ThreeA | StudyId::ThreeB => {
                vec![Method::Fcgam(ThetaMode::Modeled), Method::Fcgam(ThetaMode::Constant)]
            }
        };
        StudyOptions {
            methods,
            ..Default::default()
        }
    }

    fn primary(&self) -> Option<Method> {
        self.methods.iter().copied().find(|m| matches!(m, Method::Fcgam(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    /// Why the replication was dropped, if it was.
    pub excluded: Option<String>,
    pub rows: Vec<MetricRow>,
}

impl ReplicationRecord {
    pub fn value(&self, method: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.metric == metric)
            .map(|r| r.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub method: String,
    pub name: String,
    /// `None` where the fitted model cannot represent the generating value.
    pub truth: Option<f64>,
    pub mean: f64,
    pub bias: Option<f64>,
    pub sd: f64,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

/// Share of replications in which `method` scored higher than `against`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRate {
    pub method: String,
    pub against: String,
    pub metric: String,
    pub rate: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub study: StudyId,
    pub n: usize,
    pub test_size: usize,
    pub replications: usize,
    pub excluded: usize,
    pub exclusion_rate: f64,
    pub coefficients: Vec<CoefficientSummary>,
    /// RMSE of conditional medians and predictive log-likelihoods.
    pub metrics: Vec<MeanSd>,
    pub wins: Vec<WinRate>,
    /// Per-method count of failed comparator fits.
    pub failures: BTreeMap<String, usize>,
}

impl StudySummary {
    pub fn metric(&self, method: &str, metric: &str) -> Option<&MeanSd> {
        self.metrics.iter().find(|m| m.method == method && m.metric == metric)
    }

    pub fn coefficient(&self, method: &str, name: &str) -> Option<&CoefficientSummary> {
        self.coefficients.iter().find(|c| c.method == method && c.name == name)
    }

    pub fn win_rate(&self, method: &str, against: &str, metric: &str) -> Option<f64> {
        self.wins
            .iter()
            .find(|w| w.method == method && w.against == against && w.metric == metric)
            .map(|w| w.rate)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: SimConfig,
    pub options: StudyOptions,
    pub records: Vec<ReplicationRecord>,
    pub summary: StudySummary,
}

/// SplitMix64 finalizer, to derive independent seeds from `(seed, index)`.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Natural-scale generating values aligned with the fitted parameter list.
fn natural_truth(truth: &CoefficientVector, mode: ThetaMode) -> Vec<Option<f64>> {
    let mut t: Vec<Option<f64>> = truth.beta_u.iter().chain(&truth.beta_v).map(|v| Some(*v)).collect();
    let slopes_zero = truth.beta_theta[1..].iter().all(|b| *b == 0.0);
    match mode {
        ThetaMode::Modeled => t.extend(truth.beta_theta.iter().map(|v| Some(*v))),
        ThetaMode::Constant => t.push(slopes_zero.then_some(truth.beta_theta[0])),
    }
    t.push(Some(truth.shape_u));
    t.push(Some(truth.shape_v));
    t
}

fn natural_values(c: &CoefficientVector) -> Vec<f64> {
    let mut v: Vec<f64> = c.beta_u.iter().chain(&c.beta_v).copied().collect();
    match c.theta_mode {
        ThetaMode::Modeled => v.extend_from_slice(&c.beta_theta),
        ThetaMode::Constant => v.push(c.beta_theta[0]),
    }
    v.push(c.shape_u);
    v.push(c.shape_v);
    v
}

pub(crate) fn conditional_medians(
    gamma: &CoefficientVector,
    data: &Dataset,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    Ok(conditional_summaries(gamma, data.x(), &[Summary::Quantile(0.5)], cfg)?
        .into_iter()
        .map(|v| v[0])
        .collect())
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

fn run_replication(cfg: &SimConfig, opts: &StudyOptions, rep: usize) -> ReplicationRecord {
    let mut rows = Vec::new();
    let excluded = replication_body(cfg, opts, rep, &mut rows).err().map(|e| {
        warn!("study {} replication {rep} excluded: {e}", cfg.study);
        e.to_string()
    });
    ReplicationRecord {
        replication: rep,
        excluded,
        rows,
    }
}

fn replication_body(cfg: &SimConfig, opts: &StudyOptions, rep: usize, rows: &mut Vec<MetricRow>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let (train, test) = cfg.generate(&mut rng)?;
    let mut push = |method: &Method, metric: String, value: f64| {
        rows.push(MetricRow {
            method: method.label(),
            metric,
            value,
        })
    };
    // Tight tolerances for the reference medians.
    let oracle = opts.quadrature.with_tolerances(1e-13, 1e-10);
    let true_medians = if opts.median_rmse {
        Some(conditional_medians(&cfg.truth, &test, &oracle)?)
    } else {
        None
    };
    for (mi, method) in opts.methods.iter().enumerate() {
        match *method {
            Method::Fcgam(mode) => {
                let f = fit(&train, mode, None, &opts.fit)?;
                if !f.converged {
                    return Err(Error::Optimizer(format!("{method} did not converge: {}", f.message)));
                }
                push(method, "iterations".into(), f.iterations as f64);
                push(method, "loglik".into(), f.loglik);
                let names = CoefficientVector::natural_names(&f.column_names, mode);
                let est = natural_values(&f.coefficients);
                let truth = natural_truth(&cfg.truth, mode);
                for (name, e) in names.iter().zip(&est) {
                    push(method, format!("estimate:{name}"), *e);
                }
                if opts.coverage {
                    let s = posterior_sample(&f, opts.posterior_draws, mix(cfg.seed, (rep * 64 + mi) as u64))?;
                    let transforms: Vec<Transform> = names
                        .iter()
                        .enumerate()
                        .map(|(j, n)| Transform::parameter(n.clone(), j))
                        .collect();
                    for (ci, t) in credible_intervals(&s, opts.level, &transforms)?.iter().zip(&truth) {
                        if let Some(t) = t {
                            let hit = ci.lower <= *t && *t <= ci.upper;
                            push(method, format!("covered:{}", ci.name), if hit { 1.0 } else { 0.0 });
                        }
                    }
                }
                if let Some(tm) = &true_medians {
                    let m = conditional_medians(&f.coefficients, &test, &opts.quadrature)?;
                    push(method, "rmse_median".into(), rmse(&m, tm));
                }
                push(
                    method,
                    "pred_loglik_joint".into(),
                    predictive_loglik(&f.coefficients, &test)?,
                );
                if opts.ratio_loglik {
                    let ll = ratio_predictive_loglik(&f.coefficients, &test, &opts.quadrature)?;
                    push(method, "pred_loglik_ratio".into(), ll);
                }
            }
            Method::Benchmark(kind) => match fit_benchmark(kind, train.x(), &train.ratios()) {
                Ok(b) => {
                    push(method, "converged".into(), if b.converged { 1.0 } else { 0.0 });
                    match b.predictive_loglik(test.x(), &test.ratios()) {
                        Ok(ll) => push(method, "pred_loglik_ratio".into(), ll),
                        Err(e) => {
                            warn!("replication {rep}: {kind} prediction failed: {e}");
                            push(method, "failed".into(), 1.0);
                        }
                    }
                }
                Err(e) => {
                    warn!("replication {rep}: {kind} fit failed: {e}");
                    push(method, "failed".into(), 1.0);
                }
            },
        }
    }
    debug!("study {} replication {rep} done", cfg.study);
    Ok(())
}

/// Runs every replication (in parallel on the current rayon pool) and
/// aggregates. Each replication draws from its own ChaCha stream, so results
/// do not depend on the number of workers.
pub fn run_study(cfg: &SimConfig, opts: &StudyOptions) -> Result<StudyReport> {
    let primary = opts
        .primary()
        .ok_or_else(|| Error::Usage("a study needs at least one FCGAM method".into()))?;
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::Usage(format!(
            "credible level {} must lie in (0, 1)",
            opts.level
        )));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(m) = opts.methods.iter().find(|m| !seen.insert(**m)) {
        return Err(Error::Usage(format!("method {m} listed twice")));
    }
    opts.quadrature.validate()?;
    let records: Vec<ReplicationRecord> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(cfg, opts, rep))
        .collect();
    let summary = summarize(cfg, opts, primary, &records);
    Ok(StudyReport {
        config: cfg.clone(),
        options: opts.clone(),
        records,
        summary,
    })
}

fn mean_sd(method: &str, metric: &str, xs: &[f64]) -> Option<MeanSd> {
    (!xs.is_empty()).then(|| MeanSd {
        method: method.into(),
        metric: metric.into(),
        mean: mean(xs),
        sd: if xs.len() > 1 { sd(xs) } else { 0.0 },
        count: xs.len(),
    })
}

fn summarize(cfg: &SimConfig, opts: &StudyOptions, primary: Method, records: &[ReplicationRecord]) -> StudySummary {
    let kept: Vec<&ReplicationRecord> = records.iter().filter(|r| r.excluded.is_none()).collect();
    let column =
        |method: &str, metric: &str| -> Vec<f64> { kept.iter().filter_map(|r| r.value(method, metric)).collect() };
    let mut coefficients = Vec::new();
    let mut metrics = Vec::new();
    let mut failures = BTreeMap::new();
    let columns: Vec<String> = std::iter::once("intercept".to_string())
        .chain((1..cfg.truth.n_cols()).map(|j| format!("x{j}")))
        .collect();
    for method in &opts.methods {
        let label = method.label();
        match method {
            Method::Fcgam(mode) => {
                let names = CoefficientVector::natural_names(&columns, *mode);
                for (name, truth) in names.iter().zip(natural_truth(&cfg.truth, *mode)) {
                    let est = column(&label, &format!("estimate:{name}"));
                    if est.is_empty() {
                        continue;
                    }
                    let cov = column(&label, &format!("covered:{name}"));
                    coefficients.push(CoefficientSummary {
                        method: label.clone(),
                        name: name.clone(),
                        truth,
                        mean: mean(&est),
                        bias: truth.map(|t| mean(&est) - t),
                        sd: if est.len() > 1 { sd(&est) } else { 0.0 },
                        coverage: (!cov.is_empty()).then(|| mean(&cov)),
                    });
                }
                for metric in ["rmse_median", "pred_loglik_joint", "pred_loglik_ratio", "iterations"] {
                    metrics.extend(mean_sd(&label, metric, &column(&label, metric)));
                }
            }
            Method::Benchmark(_) => {
                metrics.extend(mean_sd(
                    &label,
                    "pred_loglik_ratio",
                    &column(&label, "pred_loglik_ratio"),
                ));
                failures.insert(label.clone(), column(&label, "failed").len());
            }
        }
    }
    let primary_label = primary.label();
    let mut wins = Vec::new();
    for other in opts.methods.iter().filter(|m| **m != primary) {
        let metrics: &[&str] = match other {
            Method::Fcgam(_) => &["pred_loglik_joint", "pred_loglik_ratio"],
            Method::Benchmark(_) => &["pred_loglik_ratio"],
        };
        for metric in metrics {
            let pairs: Vec<(f64, f64)> = kept
                .iter()
                .filter_map(|r| Some((r.value(&primary_label, metric)?, r.value(&other.label(), metric)?)))
                .collect();
            if pairs.is_empty() {
                continue;
            }
            wins.push(WinRate {
                method: primary_label.clone(),
                against: other.label(),
                metric: metric.to_string(),
                rate: pairs.iter().filter(|(a, b)| a > b).count() as f64 / pairs.len() as f64,
                count: pairs.len(),
            });
        }
    }
    let excluded = records.len() - kept.len();
    StudySummary {
        study: cfg.study,
        n: cfg.n,
        test_size: cfg.test_size,
        replications: records.len(),
        excluded,
        exclusion_rate: if records.is_empty() {
            0.0
        } else {
            excluded as f64 / records.len() as f64
        },
        coefficients,
        metrics,
        wins,
        failures,
    }
}

/// Tidy long format: `study, replication, method, metric, value`.
/// Excluded replications appear as a single `excluded` row.
pub fn write_tidy_csv<W: Write>(report: &StudyReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["study", "replication", "method", "metric", "value"])?;
    let study = report.config.study.to_string();
    for r in &report.records {
        let rep = r.replication.to_string();
        if r.excluded.is_some() {
            w.write_record([study.as_str(), &rep, "", "excluded", "1"])?;
            continue;
        }
        for m in &r.rows {
            w.write_record([study.as_str(), &rep, &m.method, &m.metric, &m.value.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio_median;

    fn small(study: StudyId, theta: Option<f64>, reps: usize) -> SimConfig {
        SimConfig::preset(study, theta, 150, reps, 42).unwrap()
    }

    #[test]
    fn study_is_reproducible_across_pool_sizes() {
        let cfg = small(StudyId::One, Some(-5.0), 3);
        let opts = StudyOptions {
            posterior_draws: 1000,
            ratio_loglik: false,
            ..StudyOptions::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_study(&cfg, &opts).unwrap())
        };
        let (a, b) = (run(1), run(3));
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        write_tidy_csv(&a, &mut ca).unwrap();
        write_tidy_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.summary.excluded, 0);
        let s = &a.summary;
        let c = s.coefficient("FCGAM", "beta_u[x1]").unwrap();
        assert_eq!(c.truth, Some(0.4));
        assert!(c.coverage.unwrap() >= 0.0 && c.coverage.unwrap() <= 1.0);
        assert!(s.metric("FCGAM", "rmse_median").unwrap().mean > 0.0);
    }

    #[test]
    fn benchmarks_and_win_rates_are_reported() {
        let cfg = small(StudyId::One, Some(-10.0), 2);
        let opts = StudyOptions {
            coverage: false,
            median_rmse: false,
            ..StudyOptions::for_study(StudyId::One)
        };
        let r = run_study(&cfg, &opts).unwrap();
        for k in BenchmarkKind::ALL {
            assert!(r.summary.metric(k.label(), "pred_loglik_ratio").is_some(), "{k}");
            assert!(r.summary.win_rate("FCGAM", k.label(), "pred_loglik_ratio").is_some());
        }
    }

    #[test]
    fn misspecified_constant_theta_has_no_theta_truth() {
        let cfg = small(StudyId::ThreeA, None, 1);
        let t = natural_truth(&cfg.truth, ThetaMode::Constant);
        assert_eq!(t[10], None);
        let t = natural_truth(&cfg.truth, ThetaMode::Modeled);
        assert_eq!(t[11], Some(1.0));
    }

    #[test]
    fn scale_trick_medians_match_direct_solves() {
        let cfg = small(StudyId::One, Some(-5.0), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (train, _) = cfg.generate(&mut rng).unwrap();
        let sub = train.select(&[0, 1, 2, 3]);
        let q = QuadratureConfig::default();
        let fast = conditional_medians(&cfg.truth, &sub, &q).unwrap();
        for (i, m) in fast.iter().enumerate() {
            let law = crate::model::law_at(&cfg.truth, sub.x().row(i)).unwrap();
            let direct = ratio_median(&law, &q).unwrap();
            assert!((m - direct).abs() < 1e-8 * direct, "{m} vs {direct}");
        }
    }

    #[test]
    fn methods_parse_and_validate() {
        assert_eq!(
            "FCGAM.modeled".parse::<Method>().unwrap(),
            Method::Fcgam(ThetaMode::Modeled)
        );
        assert_eq!("gb2".parse::<Method>().unwrap(), Method::Benchmark(BenchmarkKind::Gb2));
        let cfg = small(StudyId::One, Some(-5.0), 1);
        let opts = StudyOptions {
            methods: vec![Method::Benchmark(BenchmarkKind::Ln)],
            ..Default::default()
        };
        assert!(matches!(run_study(&cfg, &opts), Err(Error::Usage(_))));
    }
}
