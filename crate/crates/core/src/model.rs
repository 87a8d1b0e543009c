//! The FCGAM regression: covariates drive `log λ_U`, `log λ_V` and `θ`
//! linearly, shapes `δ_U, δ_V > 1` are global.
//!
//! Optimization works on the free vector
//! `[β_U, β_V, β_θ (intercept only when θ is constant), ζ_U, ζ_V]`
//! with `δ = 1 + exp(ζ)`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{frank_ln_density_grad, frank_ln_density_raw, theta_from_tau};
use crate::error::{Error, Result};
use crate::inference::{observed_information, Information};
use crate::optim::{bfgs, central_gradient, BfgsOptions};
use crate::ratio::{ratio_cdf, ratio_mean, ratio_quantile, RatioLaw};
use crate::specfun::{digamma, ln_gamma, ln_std_gamma_density, lower_regularized, normal_quantile, QuadratureConfig};
use crate::stats::kendall_tau_b;

/// Linear predictors beyond this magnitude are treated as a diverging fit.
pub const ETA_LIMIT: f64 = 700.0;

/// Row-major `n × (p+1)` design with a leading intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    cols: usize,
    values: Vec<f64>,
    names: Vec<String>,
}

impl DesignMatrix {
    /// Prepends the intercept to the given covariate rows.
    pub fn from_covariates(rows: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        let p = names.len();
        let mut values = Vec::with_capacity(rows.len() * (p + 1));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Dimension {
                    expected: p,
                    found: row.len(),
                });
            }
            values.push(1.0);
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::InvalidData(format!(
                        "row {}: covariate {} is not finite",
                        i + 1,
                        names[j]
                    )));
                }
                values.push(x);
            }
        }
        Ok(DesignMatrix {
            n: rows.len(),
            cols: p + 1,
            values,
            names,
        })
    }

    pub fn intercept_only(n: usize) -> Self {
        DesignMatrix {
            n,
            cols: 1,
            values: vec![1.0; n],
            names: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    /// Number of columns including the intercept.
    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.names
    }

    /// `["intercept", covariate names...]`.
    pub fn column_names(&self) -> Vec<String> {
        std::iter::once("intercept".to_string())
            .chain(self.names.iter().cloned())
            .collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        DesignMatrix {
            n: rows.len(),
            cols: self.cols,
            values,
            names: self.names.clone(),
        }
    }

    pub(crate) fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.cols, &self.values)
    }

    /// Rejects designs whose columns are (numerically) linearly dependent.
    pub fn check_rank(&self) -> Result<()> {
        let sv = self.to_matrix().singular_values();
        let (max, min) = (sv.max(), sv.min());
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition < 1e10) {
            return Err(Error::RankDeficient { condition });
        }
        Ok(())
    }
}

/// Paired positive components with their covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    u: Vec<f64>,
    v: Vec<f64>,
    x: DesignMatrix,
}

impl Dataset {
    pub fn new(u: Vec<f64>, v: Vec<f64>, x: DesignMatrix) -> Result<Self> {
        if u.len() != v.len() || u.len() != x.n_rows() {
            return Err(Error::Dimension {
                expected: x.n_rows(),
                found: if u.len() != x.n_rows() { u.len() } else { v.len() },
            });
        }
        for (i, (&a, &b)) in u.iter().zip(&v).enumerate() {
            if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "row {}: u = {a}, v = {b}; both must be positive and finite",
                    i + 1
                )));
            }
        }
        Ok(Dataset { u, v, x })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn x(&self) -> &DesignMatrix {
        &self.x
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a / b).collect()
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Dataset {
            u: rows.iter().map(|&i| self.u[i]).collect(),
            v: rows.iter().map(|&i| self.v[i]).collect(),
            x: self.x.select(rows),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Self> {
        if self.x.cols != other.x.cols || self.x.names != other.x.names {
            return Err(Error::Dimension {
                expected: self.x.cols,
                found: other.x.cols,
            });
        }
        let mut values = self.x.values.clone();
        values.extend_from_slice(&other.x.values);
        Ok(Dataset {
            u: [self.u.as_slice(), other.u.as_slice()].concat(),
            v: [self.v.as_slice(), other.v.as_slice()].concat(),
            x: DesignMatrix {
                n: self.n() + other.n(),
                cols: self.x.cols,
                values,
                names: self.x.names.clone(),
            },
        })
    }
}

/// Whether `θ` depends on the covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    Constant,
    Modeled,
}

impl std::str::FromStr for ThetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(ThetaMode::Constant),
            "modeled" | "modelled" => Ok(ThetaMode::Modeled),
            other => Err(Error::Usage(format!(
                "unknown theta mode '{other}' (constant | modeled)"
            ))),
        }
    }
}

impl std::fmt::Display for ThetaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ThetaMode::Constant => "constant",
            ThetaMode::Modeled => "modeled",
        })
    }
}

/// Full parameter set `γ = (β_U, β_V, β_θ, δ_U, δ_V)`.
///
/// `beta_theta` always has one entry per design column; its slopes are
/// exactly zero in [`ThetaMode::Constant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub beta_u: Vec<f64>,
    pub beta_v: Vec<f64>,
    pub beta_theta: Vec<f64>,
    pub shape_u: f64,
    pub shape_v: f64,
    pub theta_mode: ThetaMode,
}

impl CoefficientVector {
    pub fn new(
        beta_u: Vec<f64>,
        beta_v: Vec<f64>,
        beta_theta: Vec<f64>,
        shape_u: f64,
        shape_v: f64,
        theta_mode: ThetaMode,
    ) -> Result<Self> {
        let k = beta_u.len();
        if k == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        for b in [&beta_v, &beta_theta] {
            if b.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    found: b.len(),
                });
            }
        }
        if beta_u.iter().chain(&beta_v).chain(&beta_theta).any(|x| !x.is_finite()) {
            return Err(Error::domain("CoefficientVector", "coefficients must be finite"));
        }
        if !(shape_u > 1.0 && shape_v > 1.0 && shape_u.is_finite() && shape_v.is_finite()) {
            return Err(Error::domain(
                "CoefficientVector",
                format!("shapes ({shape_u}, {shape_v}) must both exceed 1"),
            ));
        }
        if theta_mode == ThetaMode::Constant && beta_theta[1..].iter().any(|&b| b != 0.0) {
            return Err(Error::domain(
                "CoefficientVector",
                "constant theta requires zero theta slopes",
            ));
        }
        Ok(CoefficientVector {
            beta_u,
            beta_v,
            beta_theta,
            shape_u,
            shape_v,
            theta_mode,
        })
    }

    /// Design width `p + 1`.
    pub fn n_cols(&self) -> usize {
        self.beta_u.len()
    }

    pub fn n_free(&self) -> usize {
        n_free(self.n_cols(), self.theta_mode)
    }

    /// `β_Λ = β_U − β_V`.
    pub fn beta_lambda(&self) -> Vec<f64> {
        self.beta_u.iter().zip(&self.beta_v).map(|(a, b)| a - b).collect()
    }

    pub fn to_free(&self) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.n_free());
        f.extend_from_slice(&self.beta_u);
        f.extend_from_slice(&self.beta_v);
        match self.theta_mode {
            ThetaMode::Constant => f.push(self.beta_theta[0]),
            ThetaMode::Modeled => f.extend_from_slice(&self.beta_theta),
        }
        f.push((self.shape_u - 1.0).ln());
        f.push((self.shape_v - 1.0).ln());
        f
    }

    pub fn from_free(free: &[f64], n_cols: usize, mode: ThetaMode) -> Result<Self> {
        if free.len() != n_free(n_cols, mode) {
            return Err(Error::Dimension {
                expected: n_free(n_cols, mode),
                found: free.len(),
            });
        }
        let k = n_cols;
        let beta_u = free[..k].to_vec();
        let beta_v = free[k..2 * k].to_vec();
        let (beta_theta, rest) = match mode {
            ThetaMode::Constant => {
                let mut bt = vec![0.0; k];
                bt[0] = free[2 * k];
                (bt, 2 * k + 1)
            }
            ThetaMode::Modeled => (free[2 * k..3 * k].to_vec(), 3 * k),
        };
        CoefficientVector::new(
            beta_u,
            beta_v,
            beta_theta,
            1.0 + free[rest].exp(),
            1.0 + free[rest + 1].exp(),
            mode,
        )
    }

    /// Labels of the free parameters, e.g. `beta_u[x1]`, `zeta_u`.
    pub fn free_names(column_names: &[String], mode: ThetaMode) -> Vec<String> {
        let mut names = Vec::new();
        for block in ["beta_u", "beta_v"] {
            names.extend(column_names.iter().map(|c| format!("{block}[{c}]")));
        }
        match mode {
            ThetaMode::Constant => names.push(format!("beta_theta[{}]", column_names[0])),
            ThetaMode::Modeled => names.extend(column_names.iter().map(|c| format!("beta_theta[{c}]"))),
        }
        names.push("zeta_u".into());
        names.push("zeta_v".into());
        names
    }

    /// Labels of the natural-scale parameters (shapes instead of `ζ`).
    pub fn natural_names(column_names: &[String], mode: ThetaMode) -> Vec<String> {
        let mut names = Self::free_names(column_names, mode);
        let k = names.len();
        names[k - 2] = "shape_u".into();
        names[k - 1] = "shape_v".into();
        names
    }
}

fn n_free(k: usize, mode: ThetaMode) -> usize {
    match mode {
        ThetaMode::Constant => 2 * k + 3,
        ThetaMode::Modeled => 3 * k + 2,
    }
}

/// Per-row distribution parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predictors {
    pub lambda_u: f64,
    pub lambda_v: f64,
    pub theta: f64,
    /// `Λ = λ_U / λ_V`.
    pub capital_lambda: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn predictors(gamma: &CoefficientVector, x_row: &[f64]) -> Result<Predictors> {
    if x_row.len() != gamma.n_cols() {
        return Err(Error::Dimension {
            expected: gamma.n_cols(),
            found: x_row.len(),
        });
    }
    let eta_u = dot(&gamma.beta_u, x_row);
    let eta_v = dot(&gamma.beta_v, x_row);
    let theta = dot(&gamma.beta_theta, x_row);
    for (name, eta) in [("eta_u", eta_u), ("eta_v", eta_v), ("theta", theta)] {
        if !(eta.abs() <= ETA_LIMIT) {
            return Err(Error::Divergence(format!("{name} = {eta} exceeds the predictor limit")));
        }
    }
    Ok(Predictors {
        lambda_u: eta_u.exp(),
        lambda_v: eta_v.exp(),
        theta,
        capital_lambda: (eta_u - eta_v).exp(),
    })
}

/// The law of `R` at one covariate row.
pub fn law_at(gamma: &CoefficientVector, x_row: &[f64]) -> Result<RatioLaw> {
    let p = predictors(gamma, x_row)?;
    RatioLaw::new(p.capital_lambda, gamma.shape_u, gamma.shape_v, p.theta)
}

/// Parameters unpacked from the free vector for fast row loops.
struct Unpacked<'a> {
    beta_u: &'a [f64],
    beta_v: &'a [f64],
    beta_theta: &'a [f64],
    shape_u: f64,
    shape_v: f64,
}

fn unpack(free: &[f64], k: usize, mode: ThetaMode) -> Unpacked<'_> {
    let t_len = if mode == ThetaMode::Constant { 1 } else { k };
    let z = 2 * k + t_len;
    Unpacked {
        beta_u: &free[..k],
        beta_v: &free[k..2 * k],
        beta_theta: &free[2 * k..z],
        shape_u: 1.0 + free[z].exp(),
        shape_v: 1.0 + free[z + 1].exp(),
    }
}

/// Log joint density of one row; `None` when a predictor diverges.
#[inline]
fn row_loglik(eta_u: f64, eta_v: f64, theta: f64, du: f64, dv: f64, glu: f64, glv: f64, u: f64, v: f64) -> Option<f64> {
    if !(eta_u.abs() <= ETA_LIMIT && eta_v.abs() <= ETA_LIMIT && theta.abs() <= ETA_LIMIT) {
        return None;
    }
    let xu = eta_u.exp() * u;
    let xv = eta_v.exp() * v;
    let a = lower_regularized(du, xu);
    let b = lower_regularized(dv, xv);
    let ln_fu = eta_u + ln_std_gamma_density(du, xu, glu);
    let ln_fv = eta_v + ln_std_gamma_density(dv, xv, glv);
    Some(frank_ln_density_raw(theta, a, b) + ln_fu + ln_fv)
}

fn theta_at(beta_theta: &[f64], row: &[f64]) -> f64 {
    if beta_theta.len() == 1 {
        beta_theta[0]
    } else {
        dot(beta_theta, row)
    }
}

/// `−ℓ` at a free vector; `+∞` for infeasible or underflowing points.
pub(crate) fn neg_loglik_free(free: &[f64], data: &Dataset, mode: ThetaMode) -> f64 {
    let k = data.x.n_cols();
    let p = unpack(free, k, mode);
    let (glu, glv) = (ln_gamma(p.shape_u), ln_gamma(p.shape_v));
    if !(p.shape_u.is_finite() && p.shape_v.is_finite()) {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for i in 0..data.n() {
        let row = data.x.row(i);
        let l = row_loglik(
            dot(p.beta_u, row),
            dot(p.beta_v, row),
            theta_at(p.beta_theta, row),
            p.shape_u,
            p.shape_v,
            glu,
            glv,
            data.u[i],
            data.v[i],
        );
        match l {
            Some(l) if l.is_finite() => total += l,
            _ => return f64::INFINITY,
        }
    }
    -total
}

/// Analytic gradient of [`neg_loglik_free`]. The shape derivative of the
/// incomplete gamma function is the only finite-difference ingredient.
pub(crate) fn neg_loglik_grad_free(free: &[f64], data: &Dataset, mode: ThetaMode) -> Vec<f64> {
    let k = data.x.n_cols();
    let p = unpack(free, k, mode);
    let (du, dv) = (p.shape_u, p.shape_v);
    let (glu, glv) = (ln_gamma(du), ln_gamma(dv));
    let (psi_u, psi_v) = (digamma(du), digamma(dv));
    let (hu, hv) = (1e-5 * du, 1e-5 * dv);
    let t_len = p.beta_theta.len();
    let mut g = vec![0.0; free.len()];
    let mut d_shape_u = 0.0;
    let mut d_shape_v = 0.0;
    for i in 0..data.n() {
        let row = data.x.row(i);
        let eta_u = dot(p.beta_u, row);
        let eta_v = dot(p.beta_v, row);
        let theta = theta_at(p.beta_theta, row);
        let xu = eta_u.exp() * data.u[i];
        let xv = eta_v.exp() * data.v[i];
        let a = lower_regularized(du, xu);
        let b = lower_regularized(dv, xv);
        let (_, dl_da, dl_db, dl_dt) = frank_ln_density_grad(theta, a, b);
        // x g(δ, x) = ∂P(δ, x)/∂ ln x
        let da_deta = (ln_std_gamma_density(du, xu, glu) + xu.ln()).exp();
        let db_deta = (ln_std_gamma_density(dv, xv, glv) + xv.ln()).exp();
        let d_eta_u = dl_da * da_deta + du - xu;
        let d_eta_v = dl_db * db_deta + dv - xv;
        for j in 0..k {
            g[j] -= d_eta_u * row[j];
            g[k + j] -= d_eta_v * row[j];
        }
        if t_len == 1 {
            g[2 * k] -= dl_dt;
        } else {
            for j in 0..k {
                g[2 * k + j] -= dl_dt * row[j];
            }
        }
        let da_dshape = (lower_regularized(du + hu, xu) - lower_regularized(du - hu, xu)) / (2.0 * hu);
        let db_dshape = (lower_regularized(dv + hv, xv) - lower_regularized(dv - hv, xv)) / (2.0 * hv);
        d_shape_u += dl_da * da_dshape + xu.ln() - psi_u;
        d_shape_v += dl_db * db_dshape + xv.ln() - psi_v;
    }
    let z = 2 * k + t_len;
    g[z] = -d_shape_u * (du - 1.0);
    g[z + 1] = -d_shape_v * (dv - 1.0);
    g
}

/// `−Σ log f_{U,V}(u_i, v_i | x_i)`; `+∞` (with a warning) if any row's
/// density underflows.
pub fn neg_loglik(gamma: &CoefficientVector, data: &Dataset) -> Result<f64> {
    if gamma.n_cols() != data.x.n_cols() {
        return Err(Error::Dimension {
            expected: data.x.n_cols(),
            found: gamma.n_cols(),
        });
    }
    let v = neg_loglik_free(&gamma.to_free(), data, gamma.theta_mode);
    if v == f64::INFINITY {
        warn!("neg_loglik: at least one row has zero density or a diverging predictor");
    }
    Ok(v)
}

/// How the optimizer obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Closed-form derivatives (finite differences only for `∂P/∂δ`).
    Analytic,
    /// Central differences of the objective, step `1e-6 · max(1, |x|)`.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub bfgs: BfgsOptions,
    pub gradient: GradientMode,
    /// Compute `Ĵ` and its inverse after convergence.
    pub information: bool,
    /// Relative step for the finite-difference Hessian.
    pub hessian_step: f64,
    /// Add a small ridge to an indefinite `Ĵ` instead of failing.
    pub ridge_fallback: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bfgs: BfgsOptions::default(),
            gradient: GradientMode::Analytic,
            information: true,
            hessian_step: 1e-4,
            ridge_fallback: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: CoefficientVector,
    pub loglik: f64,
    /// Observed information and its inverse on the free scale.
    pub information: Option<Information>,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub bic: f64,
    pub n_obs: usize,
    pub message: String,
    pub column_names: Vec<String>,
}

impl FitResult {
    pub fn free_names(&self) -> Vec<String> {
        CoefficientVector::free_names(&self.column_names, self.coefficients.theta_mode)
    }

    pub fn n_free(&self) -> usize {
        self.coefficients.n_free()
    }

    /// Law of `R` at a new covariate row `(1, x_1, …, x_p)`.
    pub fn predict_law(&self, x_new: &[f64]) -> Result<RatioLaw> {
        predict_law(self, x_new)
    }
}

pub(crate) fn objective_gradient(free: &[f64], data: &Dataset, mode: ThetaMode, how: GradientMode) -> Vec<f64> {
    match how {
        GradientMode::Analytic => neg_loglik_grad_free(free, data, mode),
        GradientMode::FiniteDifference => central_gradient(|z| neg_loglik_free(z, data, mode), free, 1e-6),
    }
}

/// Maximum-likelihood fit.
///
/// Non-convergence is not an error: the best iterate comes back with
/// `converged = false`.
pub fn fit(data: &Dataset, mode: ThetaMode, init: Option<&CoefficientVector>, opts: &FitOptions) -> Result<FitResult> {
    let k = data.x.n_cols();
    let n_par = n_free(k, mode);
    if data.n() <= n_par {
        return Err(Error::InvalidData(format!(
            "{} rows cannot identify {n_par} free parameters",
            data.n()
        )));
    }
    data.x.check_rank()?;
    let start = match init {
        Some(c) => {
            if c.n_cols() != k {
                return Err(Error::Dimension {
                    expected: k,
                    found: c.n_cols(),
                });
            }
            let mut c = c.clone();
            if mode == ThetaMode::Constant {
                c.beta_theta[1..].iter_mut().for_each(|b| *b = 0.0);
            }
            c.theta_mode = mode;
            c
        }
        None => initial_values(data, mode)?,
    };
    let x0 = start.to_free();
    let out = bfgs(
        |z| neg_loglik_free(z, data, mode),
        |z| objective_gradient(z, data, mode, opts.gradient),
        &x0,
        &opts.bfgs,
    );
    if !out.f.is_finite() {
        return Err(Error::Divergence(format!("objective not finite: {}", out.message)));
    }
    let coefficients = CoefficientVector::from_free(&out.x, k, mode)?;
    let loglik = -out.f;
    let information = if opts.information && out.converged {
        Some(observed_information(&coefficients, data, opts)?)
    } else {
        None
    };
    Ok(FitResult {
        loglik,
        bic: n_par as f64 * (data.n() as f64).ln() - 2.0 * loglik,
        information,
        converged: out.converged,
        iterations: out.iterations,
        gradient_norm: out.grad_max_norm(),
        n_obs: data.n(),
        message: out.message,
        column_names: data.x.column_names(),
        coefficients,
    })
}

/// Gamma GLM with log link for the mean, by iteratively reweighted least
/// squares. For the gamma family the working weights are constant, so each
/// step is an ordinary least-squares solve. Returns `(β_mean, shape)`.
pub(crate) fn gamma_glm(y: &[f64], x: &DesignMatrix) -> Result<(Vec<f64>, f64)> {
    let n = y.len();
    let k = x.n_cols();
    let xm = x.to_matrix();
    let xtx = xm.transpose() * &xm;
    let chol = xtx.cholesky().ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
    })?;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut beta = DVector::zeros(k);
    beta[0] = mean_y.ln();
    for _ in 0..100 {
        let eta = &xm * &beta;
        let z = DVector::from_iterator(n, (0..n).map(|i| eta[i] + (y[i] - eta[i].exp()) / eta[i].exp()));
        let next = chol.solve(&(xm.transpose() * z));
        let step = (&next - &beta).amax();
        beta = next;
        if !beta.iter().all(|b| b.is_finite()) {
            return Err(Error::Divergence("gamma GLM start diverged".into()));
        }
        if step < 1e-10 {
            break;
        }
    }
    let eta = &xm * &beta;
    let dof = (n - k).max(1) as f64;
    let phi = (0..n)
        .map(|i| ((y[i] - eta[i].exp()) / eta[i].exp()).powi(2))
        .sum::<f64>()
        / dof;
    Ok((beta.as_slice().to_vec(), (1.0 / phi).max(1.05)))
}

/// Starting point: per-component gamma GLMs for the rates, moment shapes, and
/// `θ` from Kendall's τ of the fitted probability-integral transforms.
pub fn initial_values(data: &Dataset, mode: ThetaMode) -> Result<CoefficientVector> {
    for (name, y) in [("u", &data.u), ("v", &data.v)] {
        if y.iter().all(|&a| a == y[0]) {
            return Err(Error::InvalidData(format!("component {name} is constant")));
        }
    }
    let k = data.x.n_cols();
    let rate_coefs = |y: &[f64]| -> Result<(Vec<f64>, f64)> {
        let (b, shape) = gamma_glm(y, &data.x)?;
        let mut rate: Vec<f64> = b.iter().map(|v| -v).collect();
        rate[0] += shape.ln();
        Ok((rate, shape))
    };
    let (beta_u, shape_u) = rate_coefs(&data.u)?;
    let (beta_v, shape_v) = rate_coefs(&data.v)?;
    let pit = |beta: &[f64], shape: f64, y: &[f64]| -> Vec<f64> {
        (0..data.n())
            .map(|i| lower_regularized(shape, dot(beta, data.x.row(i)).exp() * y[i]))
            .collect()
    };
    let a = pit(&beta_u, shape_u, &data.u);
    let b = pit(&beta_v, shape_v, &data.v);
    let tau = kendall_tau_b(&a, &b).clamp(-0.95, 0.95);
    let theta0 = theta_from_tau(tau)?;
    let mut beta_theta = vec![0.0; k];
    beta_theta[0] = theta0;
    CoefficientVector::new(beta_u, beta_v, beta_theta, shape_u, shape_v, mode)
}

pub fn predict_law(fit: &FitResult, x_new: &[f64]) -> Result<RatioLaw> {
    law_at(&fit.coefficients, x_new)
}

/// Conditional `p`-quantile of `R` at a covariate row.
pub fn conditional_quantile(gamma: &CoefficientVector, x_row: &[f64], p: f64, cfg: &QuadratureConfig) -> Result<f64> {
    ratio_quantile(&law_at(gamma, x_row)?, p, cfg)
}

/// A per-row summary of the law of `R` that scales as `1/Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Summary {
    Quantile(f64),
    Mean,
}

fn summarize_law(law: &RatioLaw, what: &[Summary], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    what.iter()
        .map(|s| match *s {
            Summary::Quantile(p) => ratio_quantile(law, p, cfg),
            Summary::Mean => ratio_mean(law, cfg),
        })
        .collect()
}

/// Quantiles and means of `R` at every row of `x`.
///
/// With constant `θ` the law is a scale family in `Λ`, so each summary is
/// computed once at `Λ = 1` and divided by `Λ_i`.
pub fn conditional_summaries(
    gamma: &CoefficientVector,
    x: &DesignMatrix,
    what: &[Summary],
    cfg: &QuadratureConfig,
) -> Result<Vec<Vec<f64>>> {
    if gamma.n_cols() != x.n_cols() {
        return Err(Error::Dimension {
            expected: x.n_cols(),
            found: gamma.n_cols(),
        });
    }
    if gamma.beta_theta[1..].iter().all(|b| *b == 0.0) {
        let base = summarize_law(
            &RatioLaw::new(1.0, gamma.shape_u, gamma.shape_v, gamma.beta_theta[0])?,
            what,
            cfg,
        )?;
        (0..x.n_rows())
            .map(|i| {
                let l = predictors(gamma, x.row(i))?.capital_lambda;
                Ok(base.iter().map(|b| b / l).collect())
            })
            .collect()
    } else {
        (0..x.n_rows())
            .into_par_iter()
            .map(|i| summarize_law(&law_at(gamma, x.row(i))?, what, cfg))
            .collect()
    }
}

/// `Φ⁻¹(F̂_R(r_i | x_i))` with the CDF clamped to `[1e-12, 1 − 1e-12]`.
pub fn quantile_residuals(gamma: &CoefficientVector, data: &Dataset, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    if gamma.n_cols() != data.x.n_cols() {
        return Err(Error::Dimension {
            expected: data.x.n_cols(),
            found: gamma.n_cols(),
        });
    }
    (0..data.n())
        .into_par_iter()
        .map(|i| {
            let law = law_at(gamma, data.x.row(i))?;
            let f = ratio_cdf(&law, data.u[i] / data.v[i], cfg)?;
            Ok(normal_quantile(f.clamp(1e-12, 1.0 - 1e-12)))
        })
        .collect()
}
