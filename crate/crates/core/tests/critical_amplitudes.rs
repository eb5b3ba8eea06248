//! Leading critical amplitudes of the closed forms, measured by fitting
//! close to g̃_c. The gap and width prefactors differ from f_ϖ(λ) and f(λ)
//! by constants that do not depend on λ.

use approx::assert_relative_eq;
use rabi_kzm::analytics::{amplitude_factors, excitation_gap, variances};
use rabi_kzm::kzm::{log_spaced, loglog_fit, ScalingFit};
use rabi_kzm::ModelParams;

const LAMBDAS: [f64; 8] = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];

fn fit(lambda: f64, big_omega: f64, side: f64, f: impl Fn(&ModelParams) -> f64) -> ScalingFit {
    let pts: Vec<(f64, f64)> = log_spaced(-7.0, -5.0, 9)
        .into_iter()
        .map(|e| {
            (
                e,
                f(&ModelParams::at_ratio(1.0, big_omega, lambda, 1.0 + side * e).unwrap()),
            )
        })
        .collect();
    loglog_fit(&pts).unwrap()
}

#[test]
fn gap_amplitude_is_sqrt2_and_2_times_f_gap() {
    for lambda in LAMBDAS {
        let f = amplitude_factors(lambda, 1.0).unwrap().gap;
        let normal = fit(lambda, 1e3, -1.0, |p| excitation_gap(p).unwrap());
        let superradiant = fit(lambda, 1e3, 1.0, |p| excitation_gap(p).unwrap());
        assert_relative_eq!(normal.slope, 0.5, epsilon = 1e-5);
        assert_relative_eq!(superradiant.slope, 0.5, epsilon = 1e-5);
        assert_relative_eq!(
            10f64.powf(normal.intercept) / f,
            2f64.sqrt(),
            max_relative = 1e-4
        );
        assert_relative_eq!(
            10f64.powf(superradiant.intercept) / f,
            2.0,
            max_relative = 1e-4
        );
    }
}

#[test]
fn width_amplitude_is_2_pow_minus_three_quarters_and_half_times_f() {
    for lambda in LAMBDAS {
        let f = amplitude_factors(lambda, 1.0).unwrap().length;
        let width = |p: &ModelParams| {
            let v = variances(p).unwrap();
            if lambda > 0.0 {
                v.dx
            } else {
                v.dp
            }
        };
        let normal = fit(lambda, 1e12, -1.0, width);
        let superradiant = fit(lambda, 1e12, 1.0, width);
        assert_relative_eq!(normal.slope, -0.25, epsilon = 1e-4);
        assert_relative_eq!(superradiant.slope, -0.25, epsilon = 1e-4);
        assert_relative_eq!(
            10f64.powf(normal.intercept) / f,
            2f64.powf(-0.75),
            max_relative = 1e-3
        );
        assert_relative_eq!(
            10f64.powf(superradiant.intercept) / f,
            0.5,
            max_relative = 1e-3
        );
    }
}
