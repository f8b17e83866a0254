//! Cross-module invariants over random inputs.

use proptest::prelude::*;
use stratawave_core::asymptotics::{branch_expansion, second_order_coefficients, transversality, AkVariant};
use stratawave_core::continuation::{newton_correct, NewtonOptions};
use stratawave_core::dispersion::{bifurcation_points, mu, symbol_scale};
use stratawave_core::elliptic::{GridSpec, PsiOperator};
use stratawave_core::{FluidParams, WaveProfile};

fn fluid() -> impl Strategy<Value = FluidParams> {
    (1.1f64..5.0, 0.05f64..0.9, 1.0f64..20.0, -3.0f64..3.0, -4.0f64..4.0)
        .prop_map(|(rho, frac, g, omega, omega_bar)| FluidParams::new(rho, frac * rho, g, 0.0, omega, omega_bar).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_are_ordered_zeros(p in fluid(), k in 1u32..12) {
        let (l1, l2) = bifurcation_points(k, &p).unwrap();
        prop_assert!(l1 < l2);
        for l in [l1, l2] {
            prop_assert!(mu(k, l, &p).unwrap().abs() < 1e-12 * symbol_scale(k as f64, l, &p));
        }
    }

    #[test]
    fn transversality_is_the_lambda_slope(p in fluid(), k in 1u32..6, i in 1u8..=2) {
        let (l1, l2) = bifurcation_points(k, &p).unwrap();
        let l = if i == 1 { l1 } else { l2 };
        let h = 1e-5 * (1.0 + l.abs());
        let slope = (mu(k, l + h, &p).unwrap() - mu(k, l - h, &p).unwrap()) / (2.0 * h);
        let t = transversality(k, i, &p).unwrap();
        prop_assert!((t - slope).abs() < 1e-6 * slope.abs().max(1.0), "{t} vs {slope}");
        prop_assert_eq!(t.signum(), if i == 1 { -1.0 } else { 1.0 });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn interface_residual_is_even_and_mean_zero(
        p in fluid(),
        k in 1u32..3,
        coeffs in prop::collection::vec(-0.05f64..0.05, 1..6),
        lambda in -3.0f64..3.0,
    ) {
        let profile = WaveProfile::new(k, coeffs).unwrap();
        let op = PsiOperator::new(p, k, GridSpec::new(64, 32).unwrap()).unwrap();
        let out = op.psi(lambda, &profile).unwrap();
        let scale = out.max_abs().max(1e-300);
        prop_assert!(out.mean().abs() < 1e-12 * scale.max(1.0));
        prop_assert!(out.evenness_defect() < 1e-12 * scale.max(1.0));
    }

    #[test]
    fn corrected_points_keep_their_normalisation(s in 0.002f64..0.03) {
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).unwrap();
        let c = second_order_coefficients(1, 1, &p, AkVariant::default()).unwrap();
        let guess = branch_expansion(&c, s, 32).unwrap();
        let opts = NewtonOptions { tol: 1e-10, ..NewtonOptions::default() };
        let (pt, report) = newton_correct(guess.lambda, &guess.profile, s, &p, &opts).unwrap();
        prop_assert_eq!(pt.profile.harmonic(1), -s);
        prop_assert!(report.residual <= 1e-10);
        // λ moves away from Λ quadratically
        prop_assert!((pt.lambda - c.lambda).abs() < 2.0 * s * s);
    }
}
