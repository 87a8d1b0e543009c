//! Observed information, Gaussian posterior draws and percentile intervals.

use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::copula::{kendall_tau, FrankTheta};
use crate::error::{Error, Result};
use crate::model::{
    law_at, neg_loglik, objective_gradient, CoefficientVector, Dataset, FitOptions, FitResult, ThetaMode,
};
use crate::optim::hessian_from_gradient;
use crate::ratio::ratio_ln_pdf;
use crate::specfun::QuadratureConfig;
use crate::stats::percentile_sorted;

/// Draws generated per RNG stream.
const BLOCK: usize = 1024;

/// `Ĵ` (Hessian of `−ℓ` on the free scale) and its inverse.
#[derive(Debug, Clone)]
pub struct Information {
    pub hessian: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    /// Max-abs asymmetry of the raw finite-difference Jacobian.
    pub asymmetry: f64,
    /// Ridge added to make `Ĵ` positive definite; zero normally.
    pub ridge: f64,
    pub free_point: Vec<f64>,
}

impl Information {
    /// Standard errors on the free scale.
    pub fn standard_errors(&self) -> Vec<f64> {
        self.covariance.diagonal().iter().map(|v| v.sqrt()).collect()
    }
}

/// Finite-difference Hessian of `−ℓ` at `gamma` on the free scale, checked
/// for positive definiteness.
pub fn observed_information(gamma: &CoefficientVector, data: &Dataset, opts: &FitOptions) -> Result<Information> {
    let mode = gamma.theta_mode;
    let x = gamma.to_free();
    let (mut h, asymmetry) = hessian_from_gradient(
        |z| objective_gradient(z, data, mode, opts.gradient),
        &x,
        opts.hessian_step,
    );
    if !h.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence("observed information has non-finite entries".into()));
    }
    let mut ridge = 0.0;
    let chol = match h.clone().cholesky() {
        Some(c) => c,
        None => {
            let eig = SymmetricEigen::new(h.clone());
            let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            eigenvalues.sort_by(f64::total_cmp);
            let min_eigenvalue = eigenvalues[0];
            if !opts.ridge_fallback {
                return Err(Error::IndefiniteInformation {
                    min_eigenvalue,
                    eigenvalues,
                });
            }
            ridge = 1e-6 * h.trace() / h.nrows() as f64;
            warn!(
                "observed information is indefinite (smallest eigenvalue {min_eigenvalue:e}); adding ridge {ridge:e}; \
                 intervals from this fit are not trustworthy"
            );
            for i in 0..h.nrows() {
                h[(i, i)] += ridge;
            }
            h.clone().cholesky().ok_or(Error::IndefiniteInformation {
                min_eigenvalue,
                eigenvalues,
            })?
        }
    };
    let inv = chol.inverse();
    let covariance = (&inv + inv.transpose()) * 0.5;
    Ok(Information {
        hessian: h,
        covariance,
        asymmetry,
        ridge,
        free_point: x,
    })
}

/// Draws from `N(γ̂, Ĵ⁻¹)` on the free scale, with shapes back-transformed.
#[derive(Debug, Clone)]
pub struct PosteriorSample {
    /// Natural-scale parameter labels (shapes rather than `ζ`).
    pub names: Vec<String>,
    pub free_names: Vec<String>,
    /// Fitted point on the natural scale.
    pub center: Vec<f64>,
    /// `m × k`, natural scale.
    pub draws: Vec<Vec<f64>>,
    /// `m × k`, free scale.
    pub free_draws: Vec<Vec<f64>>,
    pub seed: u64,
}

fn natural_from_free(free: &[f64]) -> Vec<f64> {
    let mut v = free.to_vec();
    let k = v.len();
    v[k - 2] = 1.0 + v[k - 2].exp();
    v[k - 1] = 1.0 + v[k - 1].exp();
    v
}

/// `m` posterior draws. Each block of draws has its own ChaCha stream, so the
/// output does not depend on how many threads run.
pub fn posterior_sample(fit: &FitResult, m: usize, seed: u64) -> Result<PosteriorSample> {
    let info = fit
        .information
        .as_ref()
        .ok_or_else(|| Error::Optimizer("fit carries no information matrix; posterior is undefined".into()))?;
    let chol = info.covariance.clone().cholesky().ok_or_else(|| {
        let eig = SymmetricEigen::new(info.covariance.clone());
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        Error::IndefiniteInformation {
            min_eigenvalue: eigenvalues[0],
            eigenvalues,
        }
    })?;
    let l = chol.l();
    let mean = DVector::from_column_slice(&info.free_point);
    let k = mean.len();
    let n_blocks = m.div_ceil(BLOCK);
    let free_draws: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BLOCK.min(m - b * BLOCK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let z = DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(&mut rng)));
                out.push((&mean + &l * z).as_slice().to_vec());
            }
            out
        })
        .collect();
    let draws = free_draws.iter().map(|d| natural_from_free(d)).collect();
    let column_names = &fit.column_names;
    let mode = fit.coefficients.theta_mode;
    Ok(PosteriorSample {
        names: CoefficientVector::natural_names(column_names, mode),
        free_names: CoefficientVector::free_names(column_names, mode),
        center: natural_from_free(&info.free_point),
        draws,
        free_draws,
        seed,
    })
}

/// A per-draw map summarized by a percentile interval.
#[derive(Clone)]
pub struct Transform {
    pub name: String,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("name", &self.name).finish()
    }
}

impl Transform {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Transform {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// Coordinate `index` of the natural-scale draw.
    pub fn parameter(name: impl Into<String>, index: usize) -> Self {
        Transform::new(name, move |d| d[index])
    }

    /// `d[i] − d[j]`, e.g. `β_Λ = β_U − β_V`.
    pub fn difference(name: impl Into<String>, i: usize, j: usize) -> Self {
        Transform::new(name, move |d| d[i] - d[j])
    }

    /// Kendall's τ of the Frank copula at `θ = d[index]`.
    pub fn kendall_tau(name: impl Into<String>, index: usize) -> Self {
        Transform::new(name, move |d| {
            kendall_tau(FrankTheta::new(d[index]).expect("finite theta draw"))
        })
    }

    pub fn apply(&self, draw: &[f64]) -> f64 {
        (self.f)(draw)
    }
}

/// Every natural-scale parameter, each `β_Λj = β_Uj − β_Vj`, and Kendall's τ
/// when `θ` is constant.
pub fn default_transforms(fit: &FitResult) -> Vec<Transform> {
    let mode = fit.coefficients.theta_mode;
    let names = CoefficientVector::natural_names(&fit.column_names, mode);
    let k = fit.column_names.len();
    let mut out: Vec<Transform> = names
        .iter()
        .enumerate()
        .map(|(i, n)| Transform::parameter(n.clone(), i))
        .collect();
    for (j, c) in fit.column_names.iter().enumerate() {
        out.push(Transform::difference(format!("beta_lambda[{c}]"), j, k + j));
    }
    if mode == ThetaMode::Constant {
        out.push(Transform::kendall_tau("tau", 2 * k));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CredibleInterval {
    pub name: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// Equal-tailed percentile intervals of each transform over the draws; the
/// estimate is the transform at the fitted point.
pub fn credible_intervals(s: &PosteriorSample, level: f64, transforms: &[Transform]) -> Result<Vec<CredibleInterval>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Usage(format!("credible level {level} must lie in (0, 1)")));
    }
    if s.draws.len() < 1000 {
        return Err(Error::Usage(format!(
            "{} posterior draws are too few for percentile intervals (need at least 1000)",
            s.draws.len()
        )));
    }
    let alpha = 1.0 - level;
    Ok(transforms
        .iter()
        .map(|t| {
            let mut vals: Vec<f64> = s.draws.iter().map(|d| t.apply(d)).collect();
            vals.sort_by(f64::total_cmp);
            CredibleInterval {
                name: t.name.clone(),
                estimate: t.apply(&s.center),
                lower: percentile_sorted(&vals, alpha / 2.0),
                upper: percentile_sorted(&vals, 1.0 - alpha / 2.0),
                level,
            }
        })
        .collect())
}

/// Joint log-likelihood `ℓ(γ̂; test)` of held-out `(u, v)` pairs.
pub fn predictive_loglik(gamma: &CoefficientVector, test: &Dataset) -> Result<f64> {
    Ok(-neg_loglik(gamma, test)?)
}

/// `Σ log f_R(r_i | x_i)`: the held-out log-likelihood of the ratios alone,
/// comparable with models that only see `R`.
pub fn ratio_predictive_loglik(gamma: &CoefficientVector, test: &Dataset, cfg: &QuadratureConfig) -> Result<f64> {
    let terms: Vec<f64> = (0..test.n())
        .into_par_iter()
        .map(|i| ratio_ln_pdf(&law_at(gamma, test.x().row(i))?, test.u()[i] / test.v()[i], cfg))
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum())
}
