use fcgam::copula::{
    frank_cdf, frank_conditional_cdf, frank_conditional_inverse, frank_density, kendall_tau, theta_from_tau, FrankTheta,
};
use fcgam::model::{CoefficientVector, ThetaMode};
use fcgam::ratio::{ratio_cdf, ratio_pdf_lambda, RatioLaw};
use fcgam::specfun::QuadratureConfig;
use proptest::prelude::*;

fn theta() -> impl Strategy<Value = f64> {
    prop_oneof![-40.0..40.0f64, -1e-6..1e-6f64]
}

fn law() -> impl Strategy<Value = RatioLaw> {
    (0.1..5.0f64, 1.1..6.0f64, 1.1..6.0f64, -15.0..15.0f64).prop_map(|(l, a, b, t)| RatioLaw::new(l, a, b, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn copula_respects_frechet_bounds(t in theta(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let c = frank_cdf(FrankTheta::new(t).unwrap(), a, b).unwrap();
        prop_assert!(c >= (a + b - 1.0).max(0.0) - 1e-12);
        prop_assert!(c <= a.min(b) + 1e-12);
    }

    #[test]
    fn copula_has_uniform_margins(t in theta(), a in 0.0..=1.0f64) {
        let ft = FrankTheta::new(t).unwrap();
        prop_assert!((frank_cdf(ft, a, 1.0).unwrap() - a).abs() < 1e-12);
        prop_assert!((frank_cdf(ft, 1.0, a).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn copula_density_is_positive(t in theta(), a in 0.001..0.999f64, b in 0.001..0.999f64) {
        let d = frank_density(FrankTheta::new(t).unwrap(), a, b).unwrap();
        prop_assert!(d > 0.0 && d.is_finite());
    }

    #[test]
    fn conditional_inverse_round_trips(t in theta(), a in 0.01..0.99f64, w in 0.01..0.99f64) {
        let ft = FrankTheta::new(t).unwrap();
        let b = frank_conditional_inverse(ft, a, w).unwrap();
        // ∂C/∂a at (a, b) is ∂C/∂b at (b, a) by exchangeability
        prop_assert!((frank_conditional_cdf(ft, b, a).unwrap() - w).abs() < 1e-9);
    }

    #[test]
    fn tau_inverts(t in -60.0..60.0f64) {
        prop_assume!(t.abs() > 1e-3);
        let tau = kendall_tau(FrankTheta::new(t).unwrap());
        let back = theta_from_tau(tau).unwrap();
        prop_assert!((back - t).abs() < 1e-6 * t.abs().max(1.0), "{t} → {tau} → {back}");
    }

    #[test]
    fn ratio_pdf_is_nonnegative(law in law(), r in 0.0..20.0f64) {
        let p = ratio_pdf_lambda(&law, r, &QuadratureConfig::default()).unwrap();
        prop_assert!(p >= 0.0 && p.is_finite());
    }

    #[test]
    fn ratio_cdf_is_monotone_and_bounded(law in law(), r in 0.01..10.0f64, step in 0.001..2.0f64) {
        let cfg = QuadratureConfig::default();
        let lo = ratio_cdf(&law, r, &cfg).unwrap();
        let hi = ratio_cdf(&law, r + step, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo - 1e-9, "{lo} {hi}");
    }

    #[test]
    fn free_parameters_round_trip(
        bu in proptest::collection::vec(-3.0..3.0f64, 3),
        bv in proptest::collection::vec(-3.0..3.0f64, 3),
        bt in proptest::collection::vec(-10.0..10.0f64, 3),
        du in 1.001..50.0f64,
        dv in 1.001..50.0f64,
        modeled in any::<bool>(),
    ) {
        let mode = if modeled { ThetaMode::Modeled } else { ThetaMode::Constant };
        let bt = if modeled { bt } else { vec![bt[0], 0.0, 0.0] };
        let g = CoefficientVector::new(bu, bv, bt, du, dv, mode).unwrap();
        let back = CoefficientVector::from_free(&g.to_free(), 3, mode).unwrap();
        prop_assert_eq!(&back.beta_u, &g.beta_u);
        prop_assert_eq!(&back.beta_v, &g.beta_v);
        prop_assert_eq!(&back.beta_theta, &g.beta_theta);
        prop_assert!((back.shape_u - du).abs() < 1e-9 * du);
        prop_assert!((back.shape_v - dv).abs() < 1e-9 * dv);
    }
}
