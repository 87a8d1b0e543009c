//! Covariate-dependent association: fit θ(x) linear in the covariates
//! alongside a constant θ and compare held-out joint log-likelihood.
//!
//! cargo run --release --example modeled_association

use fcgam::inference::predictive_loglik;
use fcgam::model::{fit, FitOptions, ThetaMode};
use fcgam::simlab::{SimConfig, StudyId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fcgam::error::Result<()> {
    let cfg = SimConfig::preset(StudyId::ThreeA, None, 1000, 1, 17)?;
    let (train, test) = cfg.generate(&mut ChaCha8Rng::seed_from_u64(17))?;
    for mode in [ThetaMode::Constant, ThetaMode::Modeled] {
        let f = fit(&train, mode, None, &FitOptions::default())?;
        println!(
            "{mode:>9}: beta_theta {:?}  BIC {:.1}  held-out loglik {:.2}",
            f.coefficients
                .beta_theta
                .iter()
                .map(|b| (b * 100.0).round() / 100.0)
                .collect::<Vec<_>>(),
            f.bic,
            predictive_loglik(&f.coefficients, &test)?
        );
    }
    println!("truth beta_theta {:?}", cfg.truth.beta_theta);
    Ok(())
}
