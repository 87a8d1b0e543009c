//! Density, CDF, quantiles and mean of R = U/V for Frank-dependent gamma
//! components, next to the independent (GB2) case.
//!
//! cargo run --release --example ratio_density

use fcgam::ratio::{gb2_cdf, gb2_pdf, ratio_cdf, ratio_mean, ratio_median, ratio_pdf_lambda, ratio_quantile, RatioLaw};
use fcgam::specfun::QuadratureConfig;

fn main() -> fcgam::error::Result<()> {
    let cfg = QuadratureConfig::default();
    println!(
        "{:>6} {:>8} {:>10} {:>10} {:>10}",
        "theta", "r", "pdf", "cdf", "gb2 pdf"
    );
    for theta in [-10.0, 1.0, 10.0] {
        let law = RatioLaw::new(1.0, 3.0, 2.0, theta)?;
        let indep = RatioLaw::new(1.0, 3.0, 2.0, 0.0)?;
        for r in [0.5, 1.0, 2.0, 4.0] {
            println!(
                "{theta:>6} {r:>8} {:>10.6} {:>10.6} {:>10.6}",
                ratio_pdf_lambda(&law, r, &cfg)?,
                ratio_cdf(&law, r, &cfg)?,
                gb2_pdf(&indep, r)?
            );
        }
        println!(
            "       median {:.6}  q0.9 {:.6}  mean {:.6}  (gb2 cdf at median {:.4})",
            ratio_median(&law, &cfg)?,
            ratio_quantile(&law, 0.9, &cfg)?,
            ratio_mean(&law, &cfg)?,
            gb2_cdf(&indep, ratio_median(&law, &cfg)?)?
        );
    }
    Ok(())
}
