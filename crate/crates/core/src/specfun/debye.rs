use super::quadrature::{integrate_unit_interval, QuadratureConfig};
use crate::error::{Error, Result};

/// `t / (e^t - 1)`, with its limit 1 at `t = 0`.
#[inline]
pub(crate) fn bose_integrand(t: f64) -> f64 {
    if t.abs() < 1e-300 {
        1.0
    } else {
        t / t.exp_m1()
    }
}

/// Signed integral `∫₀^θ t / (e^t - 1) dt`.
pub fn debye_like_integral(theta: f64) -> Result<f64> {
    if !theta.is_finite() || theta == 0.0 {
        return Err(Error::domain(
            "debye_like_integral",
            format!("theta = {theta} must be finite and non-zero"),
        ));
    }
    let cfg = QuadratureConfig::default().with_tolerances(1e-15, 1e-13);
    let (v, _) = integrate_unit_interval(|s| bose_integrand(theta * s), &cfg)?;
    Ok(theta * v)
}
