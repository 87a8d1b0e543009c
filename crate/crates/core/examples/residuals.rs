//! Randomization-free quantile residuals Φ⁻¹(F(r | x)) and their
//! Kolmogorov–Smirnov distance from the standard normal.
//!
//! cargo run --release --example residuals

use fcgam::model::{fit, quantile_residuals, FitOptions, ThetaMode};
use fcgam::simlab::{SimConfig, StudyId};
use fcgam::specfun::{std_normal_cdf, QuadratureConfig};
use fcgam::stats::{ks_statistic, mean, sd};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fcgam::error::Result<()> {
    let cfg = SimConfig::preset(StudyId::One, Some(-5.0), 500, 1, 21)?;
    let (train, _) = cfg.generate(&mut ChaCha8Rng::seed_from_u64(21))?;
    let f = fit(&train, ThetaMode::Constant, None, &FitOptions::default())?;
    let res = quantile_residuals(&f.coefficients, &train, &QuadratureConfig::default())?;
    println!(
        "n = {}  mean {:.4}  sd {:.4}  KS {:.4}",
        res.len(),
        mean(&res),
        sd(&res),
        ks_statistic(&res, std_normal_cdf)
    );
    Ok(())
}
