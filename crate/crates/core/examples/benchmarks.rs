//! The five ratio-scale benchmark regressions against the joint model on
//! held-out data, scored by predictive log-likelihood of r.
//!
//! cargo run --release --example benchmarks

use fcgam::inference::ratio_predictive_loglik;
use fcgam::model::{fit, FitOptions, ThetaMode};
use fcgam::simlab::{fit_benchmark, BenchmarkKind, SimConfig, StudyId};
use fcgam::specfun::QuadratureConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fcgam::error::Result<()> {
    let cfg = SimConfig::preset(StudyId::One, Some(-10.0), 500, 1, 8)?;
    let (train, test) = cfg.generate(&mut ChaCha8Rng::seed_from_u64(8))?;
    let f = fit(&train, ThetaMode::Constant, None, &FitOptions::default())?;
    let q = QuadratureConfig::default();
    println!(
        "{:>8} {:>12}",
        "FCGAM",
        format!("{:.2}", ratio_predictive_loglik(&f.coefficients, &test, &q)?)
    );
    for kind in BenchmarkKind::ALL {
        let b = fit_benchmark(kind, train.x(), &train.ratios())?;
        println!(
            "{:>8} {:>12.2}",
            kind.label(),
            b.predictive_loglik(test.x(), &test.ratios())?
        );
    }
    Ok(())
}
