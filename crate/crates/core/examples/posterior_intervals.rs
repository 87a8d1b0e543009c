//! Percentile intervals from draws of the asymptotic normal posterior,
//! including β_Λ = β_U − β_V and Kendall's τ.
//!
//! cargo run --release --example posterior_intervals

use fcgam::inference::{credible_intervals, default_transforms, posterior_sample};
use fcgam::model::{fit, FitOptions, ThetaMode};
use fcgam::simlab::{SimConfig, StudyId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fcgam::error::Result<()> {
    let cfg = SimConfig::preset(StudyId::Two, Some(5.0), 400, 1, 3)?;
    let (train, _) = cfg.generate(&mut ChaCha8Rng::seed_from_u64(3))?;
    let f = fit(&train, ThetaMode::Constant, None, &FitOptions::default())?;
    let draws = posterior_sample(&f, 10_000, 99)?;
    for ci in credible_intervals(&draws, 0.95, &default_transforms(&f))? {
        println!(
            "{:>20} {:>9.4}  [{:>8.4}, {:>8.4}]",
            ci.name, ci.estimate, ci.lower, ci.upper
        );
    }
    Ok(())
}
