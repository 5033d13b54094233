use std::f64::consts::PI;

use kramers_core::dispersion::lambda_offaxis;
use kramers_core::factorization::x_cut;
use kramers_core::quadrature::{integrate, integrate_principal_value, QuadratureConfig};
use kramers_core::{GasStatistics, KramersSolution, MomentSet};
use num_complex::Complex64;
use proptest::prelude::*;

fn tight() -> QuadratureConfig {
    QuadratureConfig::for_alpha(-1.0)
}

fn statistics() -> impl Strategy<Value = GasStatistics> {
    prop_oneof![Just(GasStatistics::Bose), Just(GasStatistics::Fermi)]
}

proptest! {
    #[test]
    fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.1f64..4.0, upper in 0.5f64..6.0) {
        let cfg = tight();
        let f = |t: f64| (-k * t * t).exp();
        let g = |t: f64| t.powi(3) - t;
        let combined = integrate(|t| a * f(t) + b * g(t), 0.0, upper, &cfg).unwrap().value;
        let separate = a * integrate(f, 0.0, upper, &cfg).unwrap().value + b * integrate(g, 0.0, upper, &cfg).unwrap().value;
        prop_assert!((combined - separate).abs() < 1e-9 * (1.0 + separate.abs()));
    }

    #[test]
    fn principal_value_is_odd_for_even_densities(pole in 0.05f64..3.0, width in 0.5f64..3.0) {
        let cfg = tight();
        let f = |t: f64| (-width * t * t).exp();
        let plus = integrate_principal_value(f, pole, -6.0, 6.0, &cfg).unwrap().value;
        let minus = integrate_principal_value(f, -pole, -6.0, 6.0, &cfg).unwrap().value;
        prop_assert!((plus + minus).abs() < 1e-9);
    }

    #[test]
    fn principal_value_of_constant(pole in 0.1f64..0.9) {
        let v = integrate_principal_value(|_| 1.0, pole, 0.0, 1.0, &tight()).unwrap().value;
        prop_assert!((v - ((1.0 - pole) / pole).ln()).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_even_and_positive(alpha in -30.0f64..-0.01, mu in -8.0f64..8.0, stat in statistics()) {
        let m = MomentSet::for_alpha(alpha, stat, &QuadratureConfig::for_alpha(alpha)).unwrap();
        let (k, k_neg) = (m.kernel(mu), m.kernel(-mu));
        prop_assert_eq!(k, k_neg);
        prop_assert!(k > 0.0 || mu.abs() > 5.0);
        prop_assert!(k >= 0.0);
        prop_assert_eq!(m.kernel_slope(mu), -m.kernel_slope(-mu));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_normalized(alpha in -30.0f64..-0.01, stat in statistics()) {
        let cfg = QuadratureConfig::for_alpha(alpha);
        let m = MomentSet::for_alpha(alpha, stat, &cfg).unwrap();
        let total = 2.0 * integrate(|t| m.kernel(t), 0.0, cfg.truncation_radius, &cfg).unwrap().value;
        prop_assert!((total - 1.0).abs() < 1e-9);
        let second = 2.0 * integrate(|t| t * t * m.kernel(t), 0.0, cfg.truncation_radius, &cfg).unwrap().value;
        prop_assert!((second - m.lambda2).abs() < 1e-9);
    }

    #[test]
    fn dispersion_schwarz_symmetry(re in -6.0f64..6.0, im in 0.01f64..4.0, stat in statistics()) {
        let cfg = tight();
        let m = MomentSet::for_alpha(-1.0, stat, &cfg).unwrap();
        let z = Complex64::new(re, im);
        let upper = lambda_offaxis(z, &m, &cfg).unwrap();
        let lower = lambda_offaxis(z.conj(), &m, &cfg).unwrap();
        prop_assert!((upper.conj() - lower).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solution_invariants(alpha in -12.0f64..-0.2, stat in statistics(), eta in 0.01f64..7.0, x1 in 0.0f64..8.0) {
        let s = KramersSolution::with_defaults(alpha, stat).unwrap();
        prop_assert!(s.v1 > 0.0);
        let theta = s.table.theta(eta);
        prop_assert!((0.0..=PI).contains(&theta));
        prop_assert!(s.table.xi(eta) <= 0.0);
        prop_assert!(x_cut(eta, &s.table, &s.cfg).unwrap() > 0.0);
        let p = s.profile(x1).unwrap();
        prop_assert!(p.knudsen_defect <= 0.0);
        prop_assert!(p.cv < s.v1 + x1 + 1e-12);
        let a1 = s.continuum_coefficient(eta, 1.0).unwrap();
        let a2 = s.continuum_coefficient(eta, 2.0).unwrap();
        prop_assert!(a1 <= 0.0);
        prop_assert!((a2 - 2.0 * a1).abs() <= 1e-14 * a1.abs());
    }
}
