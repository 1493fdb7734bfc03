use proptest::prelude::*;
use wavebreak::profile::*;

/// Independent root oracle: bisection on the monotone cubic.
fn bisect_root(y: f64) -> f64 {
    let (mut lo, mut hi) = (-(y.abs().cbrt()) - 1.0, y.abs().cbrt() + 1.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * mid + mid + y > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Derivative of order k of `f` by a fourth-order central difference of
/// the derivative of order k-1.
fn fd(f: impl Fn(f64) -> f64, y: f64, h: f64) -> f64 {
    (-f(y + 2.0 * h) + 8.0 * f(y + h) - 8.0 * f(y - h) + f(y - 2.0 * h)) / (12.0 * h)
}

#[test]
fn value_at_one_is_the_real_root_of_x3_plus_x_minus_1() {
    // x^3 + x - 1 = 0 has real root 0.6823278038280193...
    let w = profile(1.0).unwrap();
    assert!((w + 0.682_327_803_828_019_3).abs() < 1e-15);
}

#[test]
fn matches_bisection_over_many_decades() {
    for &y in &[1e-12, 1e-6, 0.1, 0.9, 1.0, 1.1, 7.0, 1e3, 1e6, 1e12] {
        for s in [1.0, -1.0] {
            let a = profile(s * y).unwrap();
            let b = bisect_root(s * y);
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1e-300), "y = {}", s * y);
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    for &y in &[-30.0, -2.5, -0.4, 0.0, 0.3, 1.7, 12.0] {
        let d = profile_derivatives(y).unwrap();
        let h = 1e-3 * (1.0 + y.abs());
        for k in 1..=MAX_DERIVATIVE {
            let approx = fd(|t| profile_derivatives(t).unwrap()[k - 1], y, h);
            let scale = d[k].abs().max(1e-3);
            assert!((approx - d[k]).abs() < 1e-6 * scale.max(1.0), "y = {y}, k = {k}: {approx} vs {}", d[k]);
        }
    }
}

#[test]
fn rescaled_family_has_prescribed_third_derivative() {
    for nu in [1.0, 6.0, 24.0, 100.0] {
        let d = rescaled_derivatives(0.0, nu).unwrap();
        assert_eq!(d[0], 0.0);
        assert!((d[1] + 1.0).abs() < 1e-15);
        assert!((d[3] - nu).abs() < 1e-12 * nu);
        assert!((rescaled_profile(0.7, nu).unwrap() - d_val(0.7, nu)).abs() < 1e-15);
    }
    assert!(rescaled_profile(1.0, 0.0).is_err());
    assert!(rescaled_profile(1.0, -3.0).is_err());
}

fn d_val(y: f64, nu: f64) -> f64 {
    rescaled_derivatives(y, nu).unwrap()[0]
}

#[test]
fn invalid_derivative_order_is_rejected() {
    assert!(profile_derivative(0.0, 6).is_err());
}

#[test]
fn bounds_hold_on_log_spaced_points() {
    let ys = symmetric_log_points(5000, 1e-6, 1e6);
    let report = check_profile_bounds(&ys).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    assert!(report.pass);
    for c in &report.checks {
        assert_eq!(c.violations, 0, "{}", c.name);
    }
}

proptest! {
    #[test]
    fn odd_and_decreasing(y in -1e6f64..1e6, dy in 1e-6f64..10.0) {
        let w = profile(y).unwrap();
        prop_assert_eq!(profile(-y).unwrap(), -w);
        prop_assert!(profile(y + dy).unwrap() < w);
    }

    #[test]
    fn residuals_are_small(y in -1e6f64..1e6) {
        let d = profile_derivatives(y).unwrap();
        prop_assert!(cubic_residual(y, d[0]) < 1e-12);
        prop_assert!(ode_residual(y, d[0], d[1]) < 1e-10);
        prop_assert!(d[1] <= 0.0 && d[1] >= -1.0);
    }

    #[test]
    fn rescaling_commutes_with_composition(y in -100f64..100.0, a in 0.5f64..20.0, b in 0.5f64..20.0) {
        // W_a applied with rescaled argument relates to W_{ab/6}-type family:
        // (a/6)^{-1/2} W((a/6)^{1/2} y) evaluated at nu = a equals direct formula.
        let direct = (a / 6.0).powf(-0.5) * profile((a / 6.0).sqrt() * y).unwrap();
        prop_assert!((rescaled_profile(y, a).unwrap() - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        let _ = b;
    }
}
