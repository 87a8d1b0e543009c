//! File formats: covariate/outcome CSV in, fit JSON and interval CSV out.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{CredibleInterval, Information};
use crate::model::{CoefficientVector, Dataset, DesignMatrix, FitResult, ThetaMode};

/// Schema tag written into every fit file.
pub const FIT_SCHEMA: &str = "fcgam.fit/1";

/// A parsed CSV: covariate columns, plus `u` and `v` when present.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub covariate_names: Vec<String>,
    pub covariates: Vec<Vec<f64>>,
    pub u: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.covariates.len()
    }

    pub fn design(&self) -> Result<DesignMatrix> {
        if self.covariate_names.is_empty() {
            return Ok(DesignMatrix::intercept_only(self.n_rows()));
        }
        DesignMatrix::from_covariates(&self.covariates, self.covariate_names.clone())
    }

    pub fn into_dataset(self) -> Result<Dataset> {
        let x = self.design()?;
        match (self.u, self.v) {
            (Some(u), Some(v)) => Dataset::new(u, v, x),
            _ => Err(Error::InvalidData("columns 'u' and 'v' are required".into())),
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::InvalidData(format!("cannot open {}: {e}", path.display())))
}

/// Reads a header-led CSV; `u`, `v` are optional unless `require_outcomes`.
/// Every other column is a numeric covariate. Missing or malformed cells are
/// rejected with their row and column.
pub fn read_table<R: Read>(reader: R, require_outcomes: bool) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::InvalidData(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::InvalidData("empty header".into()));
    }
    for (i, h) in headers.iter().enumerate() {
        if h.is_empty() {
            return Err(Error::InvalidData(format!("header column {} is empty", i + 1)));
        }
        if headers[..i].contains(h) {
            return Err(Error::InvalidData(format!("duplicate column '{h}'")));
        }
    }
    let iu = headers.iter().position(|h| h == "u");
    let iv = headers.iter().position(|h| h == "v");
    if require_outcomes && (iu.is_none() || iv.is_none()) {
        return Err(Error::InvalidData(format!(
            "header must contain columns 'u' and 'v' (found: {})",
            headers.join(", ")
        )));
    }
    let cov_idx: Vec<usize> = (0..headers.len()).filter(|&i| Some(i) != iu && Some(i) != iv).collect();
    let mut table = Table {
        covariate_names: cov_idx.iter().map(|&i| headers[i].clone()).collect(),
        covariates: Vec::new(),
        u: iu.map(|_| Vec::new()),
        v: iv.map(|_| Vec::new()),
    };
    for (r, rec) in rdr.records().enumerate() {
        let row = r + 1;
        let rec = rec.map_err(|e| Error::InvalidData(format!("data row {row}: {e}")))?;
        if rec.len() != headers.len() {
            return Err(Error::InvalidData(format!(
                "data row {row}: expected {} fields, found {}",
                headers.len(),
                rec.len()
            )));
        }
        let cell = |i: usize| -> Result<f64> {
            let s = &rec[i];
            let col = &headers[i];
            if s.is_empty() || matches!(s, "NA" | "na" | "NaN" | "nan" | "." | "null") {
                return Err(Error::InvalidData(format!(
                    "data row {row}, column '{col}': missing value (rows with missing data must be removed)"
                )));
            }
            let v: f64 = s
                .parse()
                .map_err(|_| Error::InvalidData(format!("data row {row}, column '{col}': '{s}' is not a number")))?;
            if !v.is_finite() {
                return Err(Error::InvalidData(format!(
                    "data row {row}, column '{col}': value {s} is not finite"
                )));
            }
            Ok(v)
        };
        for (idx, out) in [(iu, &mut table.u), (iv, &mut table.v)] {
            if let (Some(i), Some(out)) = (idx, out.as_mut()) {
                let v = cell(i)?;
                if v <= 0.0 {
                    return Err(Error::InvalidData(format!(
                        "data row {row}, column '{}': {v} is not positive",
                        headers[i]
                    )));
                }
                out.push(v);
            }
        }
        table
            .covariates
            .push(cov_idx.iter().map(|&i| cell(i)).collect::<Result<_>>()?);
    }
    if table.covariates.is_empty() {
        return Err(Error::InvalidData("no data rows".into()));
    }
    Ok(table)
}

pub fn read_table_path(path: &Path, require_outcomes: bool) -> Result<Table> {
    read_table(open(path)?, require_outcomes)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    read_table_path(path, true)?.into_dataset()
}

/// Writes `u, v, <covariates>` in the format [`read_table`] accepts.
pub fn write_dataset<W: Write>(d: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["u".to_string(), "v".to_string()];
    header.extend(d.x().covariate_names().iter().cloned());
    w.write_record(&header)?;
    for i in 0..d.n() {
        let mut rec = vec![d.u()[i].to_string(), d.v()[i].to_string()];
        rec.extend(d.x().row(i)[1..].iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Serialized form of a [`FitResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub schema: String,
    pub version: String,
    pub theta_mode: ThetaMode,
    /// Design columns, intercept first.
    pub columns: Vec<String>,
    pub coefficients: CoefficientVector,
    pub beta_lambda: Vec<f64>,
    /// Kendall's τ, when `θ` is constant.
    pub tau: Option<f64>,
    pub loglik: f64,
    pub bic: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub message: String,
    /// Free-scale parameter labels (`zeta = ln(δ − 1)` for the shapes).
    pub free_names: Vec<String>,
    pub free_point: Vec<f64>,
    pub standard_errors: Option<Vec<f64>>,
    /// Observed information on the free scale.
    pub hessian: Option<Vec<Vec<f64>>>,
    pub covariance: Option<Vec<Vec<f64>>>,
    pub hessian_asymmetry: Option<f64>,
    pub ridge: Option<f64>,
}

fn rows_of(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix_from(rows: &[Vec<f64>], k: usize, what: &str) -> Result<nalgebra::DMatrix<f64>> {
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidData(format!("fit file: {what} must be {k} × {k}")));
    }
    Ok(nalgebra::DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

impl FitFile {
    pub fn from_fit(fit: &FitResult) -> Self {
        let c = &fit.coefficients;
        let info = fit.information.as_ref();
        FitFile {
            schema: FIT_SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            theta_mode: c.theta_mode,
            columns: fit.column_names.clone(),
            coefficients: c.clone(),
            beta_lambda: c.beta_lambda(),
            tau: (c.theta_mode == ThetaMode::Constant)
                .then(|| crate::copula::kendall_tau(crate::copula::FrankTheta::new(c.beta_theta[0]).expect("finite"))),
            loglik: fit.loglik,
            bic: fit.bic,
            n_obs: fit.n_obs,
            converged: fit.converged,
            iterations: fit.iterations,
            gradient_norm: fit.gradient_norm,
            message: fit.message.clone(),
            free_names: fit.free_names(),
            free_point: c.to_free(),
            standard_errors: info.map(|i| i.standard_errors()),
            hessian: info.map(|i| rows_of(&i.hessian)),
            covariance: info.map(|i| rows_of(&i.covariance)),
            hessian_asymmetry: info.map(|i| i.asymmetry),
            ridge: info.map(|i| i.ridge),
        }
    }

    pub fn into_fit(self) -> Result<FitResult> {
        if self.schema != FIT_SCHEMA {
            return Err(Error::InvalidData(format!(
                "fit file schema '{}' is not '{FIT_SCHEMA}'",
                self.schema
            )));
        }
        let c = &self.coefficients;
        // Re-validate through the constructor.
        let coefficients = CoefficientVector::new(
            c.beta_u.clone(),
            c.beta_v.clone(),
            c.beta_theta.clone(),
            c.shape_u,
            c.shape_v,
            c.theta_mode,
        )?;
        if self.columns.len() != coefficients.n_cols() {
            return Err(Error::Dimension {
                expected: coefficients.n_cols(),
                found: self.columns.len(),
            });
        }
        let k = coefficients.n_free();
        let information = match (self.hessian, self.covariance) {
            (Some(h), Some(cov)) => Some(Information {
                hessian: matrix_from(&h, k, "hessian")?,
                covariance: matrix_from(&cov, k, "covariance")?,
                asymmetry: self.hessian_asymmetry.unwrap_or(0.0),
                ridge: self.ridge.unwrap_or(0.0),
                free_point: coefficients.to_free(),
            }),
            _ => None,
        };
        Ok(FitResult {
            coefficients,
            loglik: self.loglik,
            information,
            converged: self.converged,
            iterations: self.iterations,
            gradient_norm: self.gradient_norm,
            bic: self.bic,
            n_obs: self.n_obs,
            message: self.message,
            column_names: self.columns,
        })
    }
}

pub fn write_fit_json<W: Write>(fit: &FitResult, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &FitFile::from_fit(fit))?;
    Ok(())
}

pub fn read_fit_json<R: Read>(reader: R) -> Result<FitResult> {
    let file: FitFile =
        serde_json::from_reader(reader).map_err(|e| Error::InvalidData(format!("malformed fit file: {e}")))?;
    file.into_fit()
}

pub fn read_fit_path(path: &Path) -> Result<FitResult> {
    read_fit_json(open(path)?)
}

/// `name, estimate, lower, upper, level`.
pub fn write_intervals<W: Write>(intervals: &[CredibleInterval], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "estimate", "lower", "upper", "level"])?;
    for ci in intervals {
        w.write_record([
            ci.name.clone(),
            ci.estimate.to_string(),
            ci.lower.to_string(),
            ci.upper.to_string(),
            ci.level.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
