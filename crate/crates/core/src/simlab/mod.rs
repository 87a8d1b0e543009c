//! Simulation designs, benchmark ratio models and the study harness.

mod benchmark;
mod study;

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use benchmark::{fit_benchmark, BenchmarkFit, BenchmarkKind};
pub use study::{
    run_study, write_tidy_csv, CoefficientSummary, MeanSd, Method, MetricRow, ReplicationRecord, StudyOptions,
    StudyReport, StudySummary, WinRate,
};

use crate::copula::{sample_pair, FrankTheta, GammaMarginal};
use crate::error::{Error, Result};
use crate::model::{predictors, CoefficientVector, Dataset, DesignMatrix, ThetaMode};

/// Target Pearson correlation between every pair of covariates.
pub const COVARIATE_CORRELATION: f64 = 0.4;

/// Latent Gaussian correlations that give Pearson correlation `r` after
/// `X₃, X₄` are dichotomized at zero.
///
/// For a standard bivariate normal `(Z₁, Z₂)` with correlation `ρ`:
/// `corr(Z₁, 1{Z₂>0}) = ρ √(2/π)` and
/// `corr(1{Z₁>0}, 1{Z₂>0}) = (2/π) arcsin ρ`.
/// Inverting each gives `(ρ_cc, ρ_cb, ρ_bb)` for continuous–continuous,
/// continuous–binary and binary–binary pairs.
pub fn latent_correlations(r: f64) -> (f64, f64, f64) {
    (r, r / FRAC_2_PI.sqrt(), (r * PI / 2.0).sin())
}

fn latent_cholesky() -> Matrix4<f64> {
    let (cc, cb, bb) = latent_correlations(COVARIATE_CORRELATION);
    let m = Matrix4::new(
        1.0, cc, cb, cb, //
        cc, 1.0, cb, cb, //
        cb, cb, 1.0, bb, //
        cb, cb, bb, 1.0,
    );
    m.cholesky()
        .expect("latent covariate correlation is positive definite")
        .l()
}

/// `n` rows of `(X₁, X₂, X₃, X₄)`: two standard normals and two
/// Bernoulli(½) indicators, all pairwise correlated at
/// [`COVARIATE_CORRELATION`]. The returned design includes the intercept.
pub fn generate_covariates<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DesignMatrix {
    let l = latent_cholesky();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let z = l * Vector4::from_fn(|_, _| StandardNormal.sample(rng));
            let ind = |v: f64| if v > 0.0 { 1.0 } else { 0.0 };
            vec![z[0], z[1], ind(z[2]), ind(z[3])]
        })
        .collect();
    DesignMatrix::from_covariates(&rows, (1..=4).map(|j| format!("x{j}")).collect())
        .expect("generated covariates are finite")
}

/// Draws `(u_i, v_i)` row by row from the joint law at `truth`.
pub fn generate_dataset<R: Rng + ?Sized>(truth: &CoefficientVector, x: DesignMatrix, rng: &mut R) -> Result<Dataset> {
    let mut u = Vec::with_capacity(x.n_rows());
    let mut v = Vec::with_capacity(x.n_rows());
    for i in 0..x.n_rows() {
        let p = predictors(truth, x.row(i))?;
        let mu = GammaMarginal::new(p.lambda_u, truth.shape_u)?;
        let mv = GammaMarginal::new(p.lambda_v, truth.shape_v)?;
        let (a, b) = sample_pair(&mu, &mv, FrankTheta::new(p.theta)?, rng);
        u.push(a);
        v.push(b);
    }
    Dataset::new(u, v, x)
}

/// The simulation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StudyId {
    /// Negative, covariate-free association.
    #[serde(rename = "1")]
    One,
    /// Positive, covariate-free association, equal shapes.
    #[serde(rename = "2")]
    Two,
    /// Association depending on all four covariates.
    #[serde(rename = "3a")]
    ThreeA,
    /// The first scenario at `θ = −1`, refitted with and without modeled `θ`.
    #[serde(rename = "3b")]
    ThreeB,
}

impl StudyId {
    /// Intercepts of `θ` used by the scenario grid.
    pub fn theta_grid(&self) -> &'static [f64] {
        match self {
            StudyId::One => &[-1.0, -5.0, -10.0],
            StudyId::Two => &[1.0, 5.0, 10.0],
            StudyId::ThreeA => &[0.0],
            StudyId::ThreeB => &[-1.0],
        }
    }
}

impl fmt::Display for StudyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyId::One => "1",
            StudyId::Two => "2",
            StudyId::ThreeA => "3a",
            StudyId::ThreeB => "3b",
        })
    }
}

impl FromStr for StudyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches("study").trim_start_matches('-') {
            "1" => Ok(StudyId::One),
            "2" => Ok(StudyId::Two),
            "3a" => Ok(StudyId::ThreeA),
            "3b" => Ok(StudyId::ThreeB),
            _ => Err(Error::Usage(format!("unknown study '{s}' (1, 2, 3a, 3b)"))),
        }
    }
}

/// One simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub study: StudyId,
    /// Training rows per replication.
    pub n: usize,
    /// Test rows per replication.
    pub test_size: usize,
    pub replications: usize,
    /// Generating parameters on the design `(1, X₁, …, X₄)`.
    pub truth: CoefficientVector,
    pub seed: u64,
}

impl SimConfig {
    /// Scenario preset; `theta0` is the `θ` intercept and must be in the
    /// scenario's grid (ignored for 3a and 3b).
    pub fn preset(study: StudyId, theta0: Option<f64>, n: usize, replications: usize, seed: u64) -> Result<Self> {
        let beta_u = vec![0.0, 0.4, -0.4, 0.2, -0.2];
        let grid = study.theta_grid();
        let theta0 = match (study, theta0) {
            (StudyId::ThreeA | StudyId::ThreeB, _) => grid[0],
            (_, None) => grid[1],
            (_, Some(t)) if grid.contains(&t) => t,
            (_, Some(t)) => {
                return Err(Error::Usage(format!("study {study} has theta0 in {grid:?}, not {t}")));
            }
        };
        let (beta_v, shape_v) = match study {
            StudyId::Two => (vec![0.0, 0.2, -0.2, 0.4, -0.4], 2.0),
            _ => (vec![0.0, -0.2, 0.2, -0.4, 0.4], 6.0),
        };
        let (beta_theta, mode) = match study {
            StudyId::ThreeA => (vec![0.0, 1.0, -1.0, 0.5, -0.5], ThetaMode::Modeled),
            _ => (vec![theta0, 0.0, 0.0, 0.0, 0.0], ThetaMode::Constant),
        };
        if n < 20 || replications == 0 {
            return Err(Error::Usage(format!(
                "need n ≥ 20 and at least one replication (n = {n})"
            )));
        }
        Ok(SimConfig {
            study,
            n,
            test_size: n,
            replications,
            truth: CoefficientVector::new(beta_u, beta_v, beta_theta, 2.0, shape_v, mode)?,
            seed,
        })
    }

    /// Training and test sets from the same stream.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Dataset, Dataset)> {
        let xt = generate_covariates(self.n, rng);
        let train = generate_dataset(&self.truth, xt, rng)?;
        let xs = generate_covariates(self.test_size, rng);
        let test = generate_dataset(&self.truth, xs, rng)?;
        Ok((train, test))
    }
}
