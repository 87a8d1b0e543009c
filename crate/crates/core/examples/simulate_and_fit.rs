//! Draw a data set from the first simulation scenario and fit the model by
//! maximum likelihood.
//!
//! cargo run --release --example simulate_and_fit

use fcgam::model::{fit, FitOptions, ThetaMode};
use fcgam::simlab::{SimConfig, StudyId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fcgam::error::Result<()> {
    let cfg = SimConfig::preset(StudyId::One, Some(-5.0), 500, 1, 11)?;
    let (train, _) = cfg.generate(&mut ChaCha8Rng::seed_from_u64(11))?;
    let f = fit(&train, ThetaMode::Constant, None, &FitOptions::default())?;
    println!(
        "converged {} after {} iterations, loglik {:.4}, BIC {:.2}",
        f.converged, f.iterations, f.loglik, f.bic
    );
    let se = f.information.as_ref().map(|i| i.standard_errors()).unwrap_or_default();
    let truth = cfg.truth.to_free();
    for (i, name) in f.free_names().iter().enumerate() {
        println!(
            "{name:>18} {:>9.4} (se {:.4})  truth {:>8.4}",
            f.coefficients.to_free()[i],
            se[i],
            truth[i]
        );
    }
    Ok(())
}
