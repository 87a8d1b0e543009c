//! Conditional quantiles and means of the ratio at new covariate values.
//!
//! cargo run --release --example predict

use fcgam::model::{conditional_summaries, fit, predictors, DesignMatrix, FitOptions, Summary, ThetaMode};
use fcgam::simlab::{SimConfig, StudyId};
use fcgam::specfun::QuadratureConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fcgam::error::Result<()> {
    let cfg = SimConfig::preset(StudyId::One, Some(-10.0), 500, 1, 5)?;
    let (train, _) = cfg.generate(&mut ChaCha8Rng::seed_from_u64(5))?;
    let f = fit(&train, ThetaMode::Constant, None, &FitOptions::default())?;
    let rows = vec![
        vec![0.0, 0.0, 0.0, 0.0],
        vec![1.0, -1.0, 1.0, 0.0],
        vec![-1.0, 1.0, 0.0, 1.0],
    ];
    let x = DesignMatrix::from_covariates(&rows, f.column_names[1..].to_vec())?;
    let what = [
        Summary::Quantile(0.1),
        Summary::Quantile(0.5),
        Summary::Quantile(0.9),
        Summary::Mean,
    ];
    let out = conditional_summaries(&f.coefficients, &x, &what, &QuadratureConfig::default())?;
    for (i, s) in out.iter().enumerate() {
        let p = predictors(&f.coefficients, x.row(i))?;
        println!(
            "x = {:?}  Λ = {:.3}  q10 {:.3}  median {:.3}  q90 {:.3}  mean {:.3}",
            rows[i], p.capital_lambda, s[0], s[1], s[2], s[3]
        );
    }
    Ok(())
}
