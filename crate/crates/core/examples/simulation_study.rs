//! A small replicated study: bias, coverage and median RMSE of the joint
//! model, written as a tidy CSV on stdout.
//!
//! cargo run --release --example simulation_study -- 20

use fcgam::simlab::{run_study, write_tidy_csv, SimConfig, StudyId, StudyOptions};

fn main() -> fcgam::error::Result<()> {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let cfg = SimConfig::preset(StudyId::One, Some(-5.0), 300, reps, 2024)?;
    let opts = StudyOptions {
        posterior_draws: 2000,
        ratio_loglik: false,
        ..StudyOptions::default()
    };
    let report = run_study(&cfg, &opts)?;
    let s = &report.summary;
    eprintln!("{} replications, {} excluded", s.replications, s.excluded);
    for c in s.coefficients.iter().filter(|c| c.coverage.is_some()) {
        eprintln!(
            "{:>16} bias {:>8.4}  coverage {:.2}",
            c.name,
            c.bias.unwrap_or(f64::NAN),
            c.coverage.unwrap()
        );
    }
    if let Some(m) = s.metric("FCGAM", "rmse_median") {
        eprintln!("median RMSE {:.4} ({:.4})", m.mean, m.sd);
    }
    write_tidy_csv(&report, std::io::stdout().lock())
}
