//! Kendall's τ of the Frank copula and its inverse.
//!
//! cargo run --release --example kendall_tau

use fcgam::copula::{kendall_tau, theta_from_tau, FrankTheta};

fn main() -> fcgam::error::Result<()> {
    for theta in [-10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 10.0] {
        let tau = kendall_tau(FrankTheta::new(theta)?);
        println!("theta {theta:>6.1}  tau {tau:>8.4}  back {:>8.4}", theta_from_tau(tau)?);
    }
    Ok(())
}
