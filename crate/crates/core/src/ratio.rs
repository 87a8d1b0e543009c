//! Distribution of `R = U/V` under the Frank–gamma joint law.
//!
//! Every integral runs over `s = F_V(v)` on the unit interval. The Λ-form
//! works with a unit-rate `V`, so `q(s) = P⁻¹(δ_V, s)` and `U`-quantiles
//! enter through `w = r Λ q(s)`.

use serde::{Deserialize, Serialize};

use crate::copula::{frank_h_raw, frank_ln_density_raw, FrankTheta, GammaMarginal};
use crate::error::{Error, Result};
use crate::roots::brent;
use crate::specfun::{
    inc_beta, integrate_fallible, integrate_half_line_fallible, inv_reg_inc_beta, inverse_lower_regularized, ln_beta,
    ln_gamma, lower_regularized, QuadratureConfig,
};

/// `(Λ, δ_U, δ_V, θ)`: everything the law of `R` depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioLaw {
    capital_lambda: f64,
    shape_u: f64,
    shape_v: f64,
    theta: f64,
}

impl RatioLaw {
    pub fn new(capital_lambda: f64, shape_u: f64, shape_v: f64, theta: f64) -> Result<Self> {
        for (name, v) in [
            ("capital_lambda", capital_lambda),
            ("shape_u", shape_u),
            ("shape_v", shape_v),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(
                    "RatioLaw",
                    format!("{name} = {v} must be positive and finite"),
                ));
            }
        }
        if !theta.is_finite() {
            return Err(Error::domain("RatioLaw", format!("theta = {theta} must be finite")));
        }
        Ok(RatioLaw {
            capital_lambda,
            shape_u,
            shape_v,
            theta,
        })
    }

    /// Law of `U/V` for the given marginals and association.
    pub fn from_marginals(mu: &GammaMarginal, mv: &GammaMarginal, t: FrankTheta) -> Result<Self> {
        RatioLaw::new(mu.rate() / mv.rate(), mu.shape(), mv.shape(), t.value())
    }

    pub fn capital_lambda(&self) -> f64 {
        self.capital_lambda
    }

    pub fn shape_u(&self) -> f64 {
        self.shape_u
    }

    pub fn shape_v(&self) -> f64 {
        self.shape_v
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Same law with a different `Λ`.
    pub fn with_lambda(&self, capital_lambda: f64) -> Result<Self> {
        RatioLaw::new(capital_lambda, self.shape_u, self.shape_v, self.theta)
    }
}

fn check_r(function: &'static str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(function, format!("r = {r} must be positive and finite")))
    }
}

/// Initial panel edges in `s`: images under `F_V` of multiples of `q_centre`.
fn s_breaks(shape_v: f64, q_centre: f64) -> Vec<f64> {
    [0.125, 0.35, 1.0, 2.8, 8.0]
        .iter()
        .map(|m| lower_regularized(shape_v, m * q_centre))
        .filter(|s| *s > 1e-300 && *s < 1.0 - 1e-15)
        .collect()
}

/// Where the `s`-integrand of the density carries its mass (unit-rate `V`).
fn pdf_breaks(law: &RatioLaw, r: f64) -> Vec<f64> {
    let q_mode = (law.shape_u + law.shape_v - 1.0).max(0.5) / (1.0 + r * law.capital_lambda);
    let mut b = s_breaks(law.shape_v, q_mode);
    // The conditional density of U at w = rΛq peaks near w ≈ δ_U.
    b.extend(s_breaks(law.shape_v, law.shape_u / (r * law.capital_lambda)));
    b
}

/// Density of `R` from the marginals directly (rates enter separately).
pub fn ratio_pdf_full(
    mu: &GammaMarginal,
    mv: &GammaMarginal,
    t: FrankTheta,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_r("ratio_pdf_full", r)?;
    let theta = t.value();
    let law = RatioLaw::from_marginals(mu, mv, t)?;
    let breaks = pdf_breaks(&law, r);
    let (v, _) = integrate_fallible(
        |s| {
            let q = mv.quantile_unchecked(s);
            let x = r * q;
            if !(x > 0.0) || !x.is_finite() {
                return Ok(0.0);
            }
            let a = mu.cdf_unchecked(x);
            let ln = frank_ln_density_raw(theta, a, s) + q.ln() + mu.ln_pdf_unchecked(x);
            Ok(ln.exp())
        },
        0.0,
        1.0,
        &breaks,
        cfg,
    )?;
    Ok(v.max(0.0))
}

/// Density of `R` in terms of `(Λ, δ_U, δ_V, θ)`.
pub fn ratio_pdf_lambda(law: &RatioLaw, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_r("ratio_pdf_lambda", r)?;
    let RatioLaw {
        capital_lambda,
        shape_u,
        shape_v,
        theta,
    } = *law;
    let gln_u = ln_gamma(shape_u);
    let ln_r = r.ln();
    let breaks = pdf_breaks(law, r);
    let (v, _) = integrate_fallible(
        |s| {
            let q = inverse_lower_regularized(shape_v, s);
            let w = r * capital_lambda * q;
            if !(w > 0.0) || !w.is_finite() {
                return Ok(0.0);
            }
            let a = lower_regularized(shape_u, w);
            let ln = frank_ln_density_raw(theta, a, s) + shape_u * w.ln() - w - gln_u - ln_r;
            Ok(ln.exp())
        },
        0.0,
        1.0,
        &breaks,
        cfg,
    )?;
    Ok(v.max(0.0))
}

/// `ln f_R(r)`; `-∞` where the density underflows.
pub fn ratio_ln_pdf(law: &RatioLaw, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(ratio_pdf_lambda(law, r, cfg)?.ln())
}

/// `P(R ≤ r) = ∫₀¹ ∂C_θ(a, s)/∂s ds` with `a = F_U(r F_V⁻¹(s))` held fixed
/// inside the derivative, i.e. the conditional CDF of `F_U(U)` given `F_V(V) = s`.
pub fn ratio_cdf(law: &RatioLaw, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain("ratio_cdf", format!("r = {r} must be non-negative")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    if r == f64::INFINITY {
        return Ok(1.0);
    }
    let RatioLaw {
        capital_lambda,
        shape_u,
        shape_v,
        theta,
    } = *law;
    let breaks = s_breaks(shape_v, shape_u / (r * capital_lambda));
    let (v, _) = integrate_fallible(
        |s| {
            let q = inverse_lower_regularized(shape_v, s);
            let a = lower_regularized(shape_u, r * capital_lambda * q);
            Ok(frank_h_raw(theta, a, s))
        },
        0.0,
        1.0,
        &breaks,
        cfg,
    )?;
    Ok(v.clamp(0.0, 1.0))
}

/// `p`-quantile of `R`, solved at `Λ = 1` and rescaled: `R·Λ` does not depend on `Λ`.
pub fn ratio_quantile(law: &RatioLaw, p: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("ratio_quantile", format!("p = {p} must lie in (0, 1)")));
    }
    let unit = law.with_lambda(1.0)?;
    let guess = gb2_quantile(&unit, p)?;
    let f = |x: f64| -> Result<f64> { Ok(ratio_cdf(&unit, x, cfg)? - p) };

    let mut lo = guess / 4.0;
    let mut flo = f(lo)?;
    let mut tries = 0;
    while flo > 0.0 {
        tries += 1;
        if tries > 40 {
            return Err(Error::Bracket(format!("no lower bracket for p = {p}")));
        }
        lo /= 4.0;
        flo = f(lo)?;
    }
    let mut hi = guess * 4.0;
    let mut fhi = f(hi)?;
    tries = 0;
    while fhi < 0.0 {
        tries += 1;
        if tries > 40 {
            return Err(Error::Bracket(format!("no upper bracket for p = {p}")));
        }
        hi *= 4.0;
        fhi = f(hi)?;
    }
    let root = brent(f, lo, hi, flo, fhi, 0.0, 1e-10)?;
    Ok(root / law.capital_lambda)
}

pub fn ratio_median(law: &RatioLaw, cfg: &QuadratureConfig) -> Result<f64> {
    ratio_quantile(law, 0.5, cfg)
}

/// `E(R) = ∫₀^∞ r f_R(r) dr`; finite only when `δ_V > 1`.
pub fn ratio_mean(law: &RatioLaw, cfg: &QuadratureConfig) -> Result<f64> {
    if !(law.shape_v > 1.0) {
        return Err(Error::domain(
            "ratio_mean",
            format!("shape_v = {} must exceed 1 for a finite mean", law.shape_v),
        ));
    }
    // Independence mean as the scale for the outer breakpoints.
    let centre = law.shape_u / (law.shape_v - 1.0) / law.capital_lambda;
    let breaks: Vec<f64> = [0.05, 0.25, 1.0, 4.0, 20.0].iter().map(|m| m * centre).collect();
    let (v, _) = integrate_half_line_fallible(|r| Ok(r * ratio_pdf_lambda(law, r, cfg)?), &breaks, cfg)?;
    Ok(v)
}

/// Closed-form density of `R` when `U` and `V` are independent (θ ignored).
pub fn gb2_pdf(law: &RatioLaw, r: f64) -> Result<f64> {
    Ok(gb2_ln_pdf(law, r)?.exp())
}

pub fn gb2_ln_pdf(law: &RatioLaw, r: f64) -> Result<f64> {
    check_r("gb2_pdf", r)?;
    let (l, du, dv) = (law.capital_lambda, law.shape_u, law.shape_v);
    Ok(du * l.ln() + (du - 1.0) * r.ln() - (du + dv) * (l * r).ln_1p() - ln_beta(du, dv))
}

/// `I_{Λr/(1+Λr)}(δ_U, δ_V)`.
pub fn gb2_cdf(law: &RatioLaw, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain("gb2_cdf", format!("r = {r} must be non-negative")));
    }
    let z = law.capital_lambda * r;
    if z <= 1.0 {
        Ok(inc_beta(law.shape_u, law.shape_v, z / (1.0 + z)))
    } else {
        Ok(1.0 - inc_beta(law.shape_v, law.shape_u, 1.0 / (1.0 + z)))
    }
}

pub fn gb2_quantile(law: &RatioLaw, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("gb2_quantile", format!("p = {p} must lie in (0, 1)")));
    }
    // Invert on whichever beta tail keeps x away from 1.
    let odds = if p <= 0.5 {
        let x = inv_reg_inc_beta(law.shape_u, law.shape_v, p)?;
        x / (1.0 - x)
    } else {
        let y = inv_reg_inc_beta(law.shape_v, law.shape_u, 1.0 - p)?;
        (1.0 - y) / y
    };
    Ok(odds / law.capital_lambda)
}
