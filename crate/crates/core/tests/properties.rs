use proptest::prelude::*;
use rabi_kzm::analytics::{excitation_gap, kz_prediction, variances};
use rabi_kzm::kzm::{extract_exponents, log_spaced, loglog_fit, ScalingFit};
use rabi_kzm::ModelParams;

fn exact_fit(slope: f64) -> ScalingFit {
    ScalingFit {
        slope,
        intercept: 0.0,
        slope_stderr: 0.0,
        r_squared: 1.0,
        n_points: 7,
    }
}

proptest! {
    #[test]
    fn exponents_round_trip(nu in 0.05f64..2.0, z in 0.2f64..4.0) {
        let p = kz_prediction(nu, z).unwrap();
        let r = extract_exponents(1.0, &exact_fit(p.slope_delay), &exact_fit(p.slope_length)).unwrap();
        prop_assert!((r.nu - nu).abs() <= 1e-12 * nu.max(1.0));
        prop_assert!((r.z - z).abs() <= 1e-12 * z.max(1.0));
    }

    #[test]
    fn kz_slopes_are_consistent(nu in 0.05f64..2.0, z in 0.2f64..4.0) {
        let p = kz_prediction(nu, z).unwrap();
        // t̂ = τ_Q·b_d and the length is ξ ∼ b_d^{−ν}.
        prop_assert!((p.slope_freeze - (1.0 + p.slope_delay)).abs() < 1e-14);
        prop_assert!((p.slope_length + nu * p.slope_delay).abs() < 1e-14);
    }

    #[test]
    fn loglog_recovers_power_laws(
        slope in -3.0f64..3.0,
        prefactor in 1e-3f64..1e3,
        lo in -2.0f64..1.0,
        span in 0.5f64..3.0,
        count in 3usize..12,
    ) {
        let pts: Vec<(f64, f64)> = log_spaced(lo, lo + span, count)
            .into_iter()
            .map(|x| (x, prefactor * x.powf(slope)))
            .collect();
        let fit = loglog_fit(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!((fit.intercept - prefactor.log10()).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
        prop_assert!(fit.slope_stderr < 1e-9);
    }

    #[test]
    fn fit_slope_ignores_prefactor(slope in -2.0f64..2.0, c in 1e-2f64..1e2, noise in prop::collection::vec(-0.05f64..0.05, 7)) {
        let xs = log_spaced(1.0, 2.5, 7);
        let a: Vec<(f64, f64)> = xs.iter().zip(&noise).map(|(&x, e)| (x, x.powf(slope) * (1.0 + e))).collect();
        let b: Vec<(f64, f64)> = a.iter().map(|&(x, y)| (x, c * y)).collect();
        let (fa, fb) = (loglog_fit(&a).unwrap(), loglog_fit(&b).unwrap());
        prop_assert!((fa.slope - fb.slope).abs() < 1e-12);
        prop_assert!((fa.r_squared - fb.r_squared).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&fa.r_squared));
    }

    #[test]
    fn gap_and_widths_mirror_in_lambda(lambda in 0.1f64..3.0, ratio in 0.05f64..2.0) {
        prop_assume!((ratio - 1.0).abs() > 1e-3);
        let plus = ModelParams::at_ratio(1.0, 1e3, lambda, ratio).unwrap();
        let minus = ModelParams::at_ratio(1.0, 1e3, -lambda, ratio).unwrap();
        let (gp, gm) = (excitation_gap(&plus).unwrap(), excitation_gap(&minus).unwrap());
        prop_assert!((gp - gm).abs() <= 1e-12 * gp.max(1e-12));
        let (vp, vm) = (variances(&plus).unwrap(), variances(&minus).unwrap());
        prop_assert!((vp.dx - vm.dp).abs() <= 1e-12 * vp.dx);
        prop_assert!((vp.dp - vm.dx).abs() <= 1e-12 * vp.dp);
    }
}

#[test]
fn too_few_or_nonpositive_points_are_rejected() {
    assert!(loglog_fit(&[(1.0, 1.0), (10.0, 2.0)]).is_err());
    assert!(loglog_fit(&[(1.0, 1.0), (10.0, 0.0), (100.0, 3.0)]).is_err());
    assert!(extract_exponents(1.0, &exact_fit(0.1), &exact_fit(0.2)).is_err());
}
