//! Univariate regression models for the ratio alone, used as comparators.
//!
//! All densities are on the scale of `R` so log-likelihoods are comparable
//! with the ratio density of the copula model. Each model is a set of
//! predictor blocks (linear in the covariates or a single scalar) and a
//! row density with its derivative in those predictors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gamma_glm, DesignMatrix};
use crate::optim::{bfgs, BfgsOptions};
use crate::roots::brent;
use crate::specfun::{digamma, ln_beta, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkKind {
    /// Gaussian regression of `log R`, constant variance.
    #[serde(rename = "LN")]
    Ln,
    /// Gaussian regression of `log R` with a log-linear standard deviation.
    #[serde(rename = "LN.LSS")]
    LnLss,
    /// Gamma regression, log link for the mean, constant shape.
    #[serde(rename = "GA")]
    Ga,
    /// Gamma regression with a log-linear coefficient of variation.
    #[serde(rename = "GA.LSS")]
    GaLss,
    /// Ratio of independent gammas: log-linear `Λ`, global shapes.
    #[serde(rename = "GB2")]
    Gb2,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 5] = [
        BenchmarkKind::Ln,
        BenchmarkKind::LnLss,
        BenchmarkKind::Ga,
        BenchmarkKind::GaLss,
        BenchmarkKind::Gb2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            BenchmarkKind::Ln => "LN",
            BenchmarkKind::LnLss => "LN.LSS",
            BenchmarkKind::Ga => "GA",
            BenchmarkKind::GaLss => "GA.LSS",
            BenchmarkKind::Gb2 => "GB2",
        }
    }

    fn blocks(&self) -> &'static [Block] {
        use Block::*;
        match self {
            BenchmarkKind::Ln | BenchmarkKind::Ga => &[Linear, Scalar],
            BenchmarkKind::LnLss | BenchmarkKind::GaLss => &[Linear, Linear],
            BenchmarkKind::Gb2 => &[Linear, Scalar, Scalar],
        }
    }

    /// `log f(r)` and its derivative in each predictor.
    fn row(&self, eta: &[f64], r: f64, grad: &mut [f64]) -> f64 {
        match self {
            BenchmarkKind::Ln | BenchmarkKind::LnLss => {
                let (mu, ln_sigma) = (eta[0], eta[1]);
                let sigma = ln_sigma.exp();
                let y = r.ln();
                let z = (y - mu) / sigma;
                grad[0] = z / sigma;
                grad[1] = z * z - 1.0;
                -0.5 * z * z - ln_sigma - 0.5 * (2.0 * PI).ln() - y
            }
            BenchmarkKind::Ga | BenchmarkKind::GaLss => {
                // σ is the coefficient of variation, so the shape is 1/σ².
                let (ln_mu, ln_sigma) = (eta[0], eta[1]);
                let kappa = (-2.0 * ln_sigma).exp();
                let scaled = r * (-ln_mu).exp();
                let ln_r = r.ln();
                grad[0] = kappa * (scaled - 1.0);
                let d_kappa = kappa.ln() + 1.0 - ln_mu + ln_r - scaled - digamma(kappa);
                grad[1] = -2.0 * kappa * d_kappa;
                kappa * (kappa.ln() - ln_mu) + (kappa - 1.0) * ln_r - kappa * scaled - ln_gamma(kappa)
            }
            BenchmarkKind::Gb2 => {
                let (ln_lambda, du, dv) = (eta[0], eta[1].exp(), eta[2].exp());
                let ln_z = ln_lambda + r.ln();
                let z = ln_z.exp();
                // ln(1 + z), accurate at both ends.
                let l1 = if ln_z > 0.0 {
                    ln_z + (-ln_z).exp().ln_1p()
                } else {
                    z.ln_1p()
                };
                let s = du + dv;
                let psi_s = digamma(s);
                grad[0] = du - s * (1.0 / (1.0 + (-ln_z).exp()));
                grad[1] = du * (ln_z - l1 - digamma(du) + psi_s);
                grad[2] = dv * (psi_s - digamma(dv) - l1);
                du * ln_z - r.ln() - ln_beta(du, dv) - s * l1
            }
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_uppercase().replace(['_', '-'], ".");
        BenchmarkKind::ALL
            .into_iter()
            .find(|k| k.label() == key)
            .ok_or_else(|| Error::Usage(format!("unknown benchmark '{s}' (LN, LN.LSS, GA, GA.LSS, GB2)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Linear,
    Scalar,
}

/// A fitted benchmark; `params` are the predictor blocks laid end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkFit {
    pub kind: BenchmarkKind,
    pub params: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    n_cols: usize,
}

fn n_params(kind: BenchmarkKind, k: usize) -> usize {
    kind.blocks()
        .iter()
        .map(|b| if *b == Block::Linear { k } else { 1 })
        .sum()
}

fn etas(kind: BenchmarkKind, params: &[f64], row: &[f64], out: &mut [f64; 3]) {
    let mut at = 0;
    for (j, b) in kind.blocks().iter().enumerate() {
        out[j] = match b {
            Block::Linear => {
                let v = params[at..at + row.len()].iter().zip(row).map(|(p, x)| p * x).sum();
                at += row.len();
                v
            }
            Block::Scalar => {
                at += 1;
                params[at - 1]
            }
        };
    }
}

fn loglik_and_grad(
    kind: BenchmarkKind,
    params: &[f64],
    x: &DesignMatrix,
    r: &[f64],
    want_grad: bool,
) -> (f64, Vec<f64>) {
    let mut total = 0.0;
    let mut grad = vec![0.0; if want_grad { params.len() } else { 0 }];
    let mut eta = [0.0; 3];
    let mut d = [0.0; 3];
    for (i, &ri) in r.iter().enumerate() {
        let row = x.row(i);
        etas(kind, params, row, &mut eta);
        total += kind.row(&eta, ri, &mut d);
        if want_grad {
            let mut at = 0;
            for (j, b) in kind.blocks().iter().enumerate() {
                match b {
                    Block::Linear => {
                        for (g, xv) in grad[at..at + row.len()].iter_mut().zip(row) {
                            *g += d[j] * xv;
                        }
                        at += row.len();
                    }
                    Block::Scalar => {
                        grad[at] += d[j];
                        at += 1;
                    }
                }
            }
        }
    }
    (total, grad)
}

impl BenchmarkFit {
    /// `Σ log f(r_i | x_i)` on held-out data.
    pub fn predictive_loglik(&self, x: &DesignMatrix, r: &[f64]) -> Result<f64> {
        check(x, r)?;
        if x.n_cols() != self.n_cols {
            return Err(Error::Dimension {
                expected: self.n_cols,
                found: x.n_cols(),
            });
        }
        let ll = loglik_and_grad(self.kind, &self.params, x, r, false).0;
        if ll.is_nan() {
            return Err(Error::Divergence(format!(
                "{} predictive log-likelihood is NaN",
                self.kind
            )));
        }
        Ok(ll)
    }
}

fn check(x: &DesignMatrix, r: &[f64]) -> Result<()> {
    if x.n_rows() != r.len() {
        return Err(Error::Dimension {
            expected: x.n_rows(),
            found: r.len(),
        });
    }
    if let Some(i) = r.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidData(format!(
            "ratio in row {} is {} (must be positive)",
            i + 1,
            r[i]
        )));
    }
    Ok(())
}

/// Least squares of `log r` on the design; returns `(β, RSS)`.
fn ols(x: &DesignMatrix, y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let xm = x.to_matrix();
    let yv = DVector::from_column_slice(y);
    let qr = xm.clone().qr();
    let beta = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &yv))
        .ok_or(Error::RankDeficient {
            condition: f64::INFINITY,
        })?;
    let resid = yv - xm * &beta;
    Ok((beta.as_slice().to_vec(), resid.norm_squared()))
}

/// Maximum-likelihood fit of one benchmark to ratios `r`.
pub fn fit_benchmark(kind: BenchmarkKind, x: &DesignMatrix, r: &[f64]) -> Result<BenchmarkFit> {
    check(x, r)?;
    let k = x.n_cols();
    if r.len() <= n_params(kind, k) {
        return Err(Error::InvalidData(format!(
            "{} rows cannot identify {} parameters",
            r.len(),
            n_params(kind, k)
        )));
    }
    x.check_rank()?;
    let n = r.len() as f64;
    let log_r: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let done = |params: Vec<f64>, converged, iterations| {
        let loglik = loglik_and_grad(kind, &params, x, r, false).0;
        BenchmarkFit {
            kind,
            params,
            loglik,
            converged,
            iterations,
            n_cols: k,
        }
    };
    let (beta_ols, rss) = ols(x, &log_r)?;
    let ln_sigma_ols = 0.5 * (rss / n).ln();
    let start = match kind {
        BenchmarkKind::Ln => {
            let mut p = beta_ols;
            p.push(ln_sigma_ols);
            return Ok(done(p, true, 0));
        }
        BenchmarkKind::LnLss => {
            let mut p = beta_ols;
            p.push(ln_sigma_ols);
            p.extend(std::iter::repeat_n(0.0, k - 1));
            p
        }
        BenchmarkKind::Ga | BenchmarkKind::GaLss => {
            let (beta, _) = gamma_glm(r, x)?;
            let kappa = gamma_shape_mle(x, r, &beta)?;
            let mut p = beta;
            p.push(-0.5 * kappa.ln());
            if kind == BenchmarkKind::Ga {
                return Ok(done(p, true, 0));
            }
            p.extend(std::iter::repeat_n(0.0, k - 1));
            p
        }
        BenchmarkKind::Gb2 => {
            // Equal shapes d with 2ψ'(d) ≈ 2/d matching the residual variance.
            let d = (2.0 * n / rss).clamp(0.5, 50.0);
            let mut p: Vec<f64> = beta_ols.iter().map(|b| -b).collect();
            p.push(d.ln());
            p.push(d.ln());
            p
        }
    };
    let opts = BfgsOptions::default();
    let out = bfgs(
        |p| {
            let ll = loglik_and_grad(kind, p, x, r, false).0;
            if ll.is_finite() {
                -ll
            } else {
                f64::INFINITY
            }
        },
        |p| loglik_and_grad(kind, p, x, r, true).1.iter().map(|g| -g).collect(),
        &start,
        &opts,
    );
    if !out.f.is_finite() {
        return Err(Error::Divergence(format!("{kind}: {}", out.message)));
    }
    Ok(done(out.x, out.converged, out.iterations))
}

/// Shape of a gamma GLM at fixed mean coefficients: root of the profile score
/// `Σ [ln κ + 1 − ln μ_i + ln r_i − r_i/μ_i − ψ(κ)]`, which decreases in `κ`.
fn gamma_shape_mle(x: &DesignMatrix, r: &[f64], beta: &[f64]) -> Result<f64> {
    let n = r.len() as f64;
    let c: f64 = (0..r.len())
        .map(|i| {
            let ln_mu: f64 = beta.iter().zip(x.row(i)).map(|(b, v)| b * v).sum();
            1.0 - ln_mu + r[i].ln() - r[i] * (-ln_mu).exp()
        })
        .sum::<f64>()
        / n;
    let score = |kappa: f64| Ok(kappa.ln() - digamma(kappa) + c);
    let (lo, hi) = (1e-4, 1e8);
    brent(score, lo, hi, score(lo)?, score(hi)?, 0.0, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::central_gradient;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma, Normal};

    fn design(n: usize, seed: u64) -> DesignMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, 1.0).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![nd.sample(&mut rng), nd.sample(&mut rng)]).collect();
        DesignMatrix::from_covariates(&rows, vec!["x1".into(), "x2".into()]).unwrap()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let x = design(40, 1);
        let r: Vec<f64> = (0..40).map(|i| 0.3 + 0.05 * i as f64).collect();
        for kind in BenchmarkKind::ALL {
            let p: Vec<f64> = (0..n_params(kind, 3)).map(|j| 0.1 * (j as f64) - 0.15).collect();
            let (_, an) = loglik_and_grad(kind, &p, &x, &r, true);
            let fd = central_gradient(|q| loglik_and_grad(kind, q, &x, &r, false).0, &p, 1e-6);
            for j in 0..p.len() {
                assert!(
                    (an[j] - fd[j]).abs() < 1e-5 * fd[j].abs().max(1.0),
                    "{kind} {j}: {} vs {}",
                    an[j],
                    fd[j]
                );
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        use crate::specfun::{integrate_half_line, QuadratureConfig};
        let mut g = [0.0; 3];
        for kind in BenchmarkKind::ALL {
            let eta = [0.3, -0.4, 0.6];
            let (mass, _) = integrate_half_line(
                |r| if r > 0.0 { kind.row(&eta, r, &mut g).exp() } else { 0.0 },
                &QuadratureConfig::default(),
            )
            .unwrap();
            assert!((mass - 1.0).abs() < 1e-7, "{kind}: {mass}");
        }
    }

    #[test]
    fn ln_is_least_squares() {
        let x = design(200, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let nd = Normal::new(0.0, 0.5).unwrap();
        let log_r: Vec<f64> = (0..200)
            .map(|i| 0.2 + 0.7 * x.row(i)[1] - 0.3 * x.row(i)[2] + nd.sample(&mut rng))
            .collect();
        let r: Vec<f64> = log_r.iter().map(|v| v.exp()).collect();
        let f = fit_benchmark(BenchmarkKind::Ln, &x, &r).unwrap();
        // Normal equations solved by explicit inversion.
        let xm = x.to_matrix();
        let beta = (xm.transpose() * &xm).try_inverse().unwrap() * xm.transpose() * DVector::from_column_slice(&log_r);
        for j in 0..3 {
            assert!((f.params[j] - beta[j]).abs() < 1e-8);
        }
        // The Gaussian likelihood is maximal at least squares.
        let opt = f.loglik;
        let mut p = f.params.clone();
        p[1] += 1e-3;
        assert!(loglik_and_grad(BenchmarkKind::Ln, &p, &x, &r, false).0 < opt);
    }

    #[test]
    fn ga_intercept_matches_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Gamma::new(3.0, 0.5).unwrap();
        let r: Vec<f64> = (0..500).map(|_| g.sample(&mut rng)).collect();
        let x = DesignMatrix::intercept_only(500);
        let f = fit_benchmark(BenchmarkKind::Ga, &x, &r).unwrap();
        let mean = r.iter().sum::<f64>() / 500.0;
        assert!((f.params[0].exp() - mean).abs() < 1e-8 * mean);
        // Shape near 3 and the profile score vanishes there.
        let kappa = (-2.0 * f.params[1]).exp();
        assert!((kappa - 3.0).abs() < 0.5, "{kappa}");
        let p = f.params.clone();
        let (_, grad) = loglik_and_grad(BenchmarkKind::Ga, &p, &x, &r, true);
        assert!(grad.iter().all(|v| v.abs() < 1e-6), "{grad:?}");
    }

    #[test]
    fn gb2_recovers_lambda_on_independent_ratios() {
        // Λ and the shapes are strongly confounded: at n = 5000 the sampling
        // sd of Λ̂ is about 7%, so use a larger sample.
        let n = 40_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // λ_U = 2, λ_V = 1 so Λ = 2; Gamma takes (shape, scale).
        let gu = Gamma::new(3.0, 0.5).unwrap();
        let gv = Gamma::new(4.0, 1.0).unwrap();
        let r: Vec<f64> = (0..n).map(|_| gu.sample(&mut rng) / gv.sample(&mut rng)).collect();
        let x = DesignMatrix::intercept_only(n);
        let f = fit_benchmark(BenchmarkKind::Gb2, &x, &r).unwrap();
        assert!(f.converged);
        let at_truth = loglik_and_grad(BenchmarkKind::Gb2, &[2f64.ln(), 3f64.ln(), 4f64.ln()], &x, &r, false).0;
        assert!(f.loglik >= at_truth);
        assert!((f.params[0].exp() / 2.0 - 1.0).abs() < 0.05, "{:?}", f.params);
    }

    #[test]
    fn lss_variants_nest_their_simple_versions() {
        let x = design(300, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r: Vec<f64> = (0..300)
            .map(|i| {
                let s = (0.3 * x.row(i)[1]).exp();
                Gamma::new(1.0 / (s * s), s * s * (0.5 * x.row(i)[2]).exp())
                    .unwrap()
                    .sample(&mut rng)
            })
            .collect();
        for (simple, lss) in [
            (BenchmarkKind::Ln, BenchmarkKind::LnLss),
            (BenchmarkKind::Ga, BenchmarkKind::GaLss),
        ] {
            let a = fit_benchmark(simple, &x, &r).unwrap();
            let b = fit_benchmark(lss, &x, &r).unwrap();
            assert!(b.converged);
            assert!(b.loglik >= a.loglik - 1e-6, "{lss}: {} < {}", b.loglik, a.loglik);
        }
    }

    #[test]
    fn labels_round_trip() {
        for k in BenchmarkKind::ALL {
            assert_eq!(k.label().parse::<BenchmarkKind>().unwrap(), k);
        }
        assert!("ga_lss".parse::<BenchmarkKind>().is_ok());
        assert!("eGB2".parse::<BenchmarkKind>().is_err());
    }
}
