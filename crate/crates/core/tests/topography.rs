use std::f64::consts::PI;

use proptest::prelude::*;
use wavebreak::topography::Topography;

fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5;
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn unknown_family_is_rejected() {
    assert!(Topography::from_family("ramp", 1.0, 1.0, 0.0).is_err());
    assert!(Topography::from_family("gaussian", 1.0, 0.0, 0.0).is_err());
}

#[test]
fn flatness() {
    assert!(Topography::Flat.is_flat());
    assert!(Topography::from_family("sine", 0.0, 1.0, 0.0).unwrap().is_flat());
    assert!(!Topography::from_family("gaussian", 0.2, 1.0, 0.0).unwrap().is_flat());
}

#[test]
fn tabulated_reproduces_sampled_sine() {
    let n = 32;
    let samples: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).sin()).collect();
    let tab = Topography::Tabulated { x_min: 0.0, length: 2.0 * PI, samples };
    let sine = Topography::Sine { amplitude: 1.0, width: 2.0 * PI, center: 0.0 };
    for x in [0.1, 1.3, 4.0] {
        let (a, b) = (tab.derivatives(x), sine.derivatives(x));
        for k in 0..a.len() {
            assert!((a[k] - b[k]).abs() < 1e-8, "order {k}: {} vs {}", a[k], b[k]);
        }
    }
}

proptest! {
    #[test]
    fn derivatives_match_finite_differences(x in -3.0f64..3.0, family in 0usize..2) {
        let topo = if family == 0 {
            Topography::Gaussian { amplitude: 0.3, width: 0.7, center: 0.2 }
        } else {
            Topography::Sine { amplitude: 0.3, width: 2.5, center: 0.2 }
        };
        let d = topo.derivatives(x);
        prop_assert!((d[0] - topo.value(x)).abs() < 1e-15);
        prop_assert!((d[1] - topo.slope(x)).abs() < 1e-12);
        for k in 0..4 {
            let next = fd(|t| topo.derivatives(t)[k], x);
            prop_assert!((d[k + 1] - next).abs() < 1e-6 * d[k + 1].abs().max(1.0), "order {}", k + 1);
        }
    }
}
