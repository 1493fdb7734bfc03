use std::f64::consts::PI;

use proptest::prelude::*;
use wavebreak::error::Error;
use wavebreak::grid::Grid;
use wavebreak::topography::Topography;
use wavebreak::transforms::*;

fn grid(n: usize) -> Grid {
    Grid::periodic(n, -PI, 2.0 * PI).unwrap()
}

#[test]
fn fluid_at_rest_has_opposite_invariants() {
    let (w, z) = riemann_from_depth(1.0, 0.0);
    assert_eq!((w, z), (1.5, -1.5));
    let (a, b) = characteristic_speeds(w, z);
    assert_eq!((a, b), (1.0, -1.0));
}

#[test]
fn surface_roundtrip_with_topography() {
    let g = grid(128);
    let topo = Topography::Sine { amplitude: 1.0, width: 2.0 * PI, center: 0.0 };
    let params = ModelParams { eps: 0.2, beta_star: 0.1, ..ModelParams::default() };
    let xs = g.positions();
    let phys = PhysicalState {
        grid: g,
        t: 0.0,
        zeta: xs.iter().map(|x| x.sin()).collect(),
        vbar: xs.iter().map(|x| 0.5 * x.cos()).collect(),
    };
    let depth = to_depth(&phys, &topo, &params).unwrap();
    let back = from_depth(&from_riemann(&to_riemann(&depth, params.h_min).unwrap()).unwrap(), &topo, &params).unwrap();
    for i in 0..g.n {
        assert!((back.zeta[i] - phys.zeta[i]).abs() < 1e-12);
        assert!((back.vbar[i] - phys.vbar[i]).abs() < 1e-12);
    }
}

#[test]
fn shallow_depth_is_rejected() {
    let g = grid(16);
    let phys = PhysicalState { grid: g, t: 0.0, zeta: vec![-5.0; 16], vbar: vec![0.0; 16] };
    let params = ModelParams { eps: 0.5, ..ModelParams::default() };
    assert!(matches!(to_depth(&phys, &Topography::Flat, &params), Err(Error::Admissibility { .. })));
}

#[test]
fn vacuum_is_rejected() {
    let g = grid(16);
    let state = RiemannState { grid: g, t: 0.0, w: vec![1.0; 16], z: vec![1.0; 16] };
    assert!(matches!(from_riemann(&state), Err(Error::Vacuum { .. })));
}

#[test]
fn surface_variables_need_positive_eps() {
    let g = grid(16);
    let depth = DepthState { grid: g, t: 0.0, h: vec![1.0; 16], u: vec![0.0; 16] };
    let params = ModelParams { eps: 0.0, ..ModelParams::default() };
    assert!(from_depth(&depth, &Topography::Flat, &params).is_err());
}

#[test]
fn seminorm_needs_periodic_grid() {
    let g = Grid::stretched(64, 0.1, 10.0, 0.0).unwrap();
    assert!(sobolev_seminorm(&vec![0.0; 64], 5, &g).is_err());
}

#[test]
fn seminorm_of_higher_mode() {
    let g = grid(64);
    let f: Vec<f64> = g.positions().iter().map(|x| (3.0 * x).cos()).collect();
    let s = sobolev_seminorm(&f, 2, &g).unwrap();
    assert!((s - 9.0 * PI.sqrt()).abs() < 1e-10);
}

#[test]
fn moser_ratio_is_flat_for_small_amplitudes() {
    let g = grid(256);
    let xs = g.positions();
    let zeta: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
    let vbar: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
    let pairs: Vec<(f64, f64)> = [0.005, 0.05, 0.5].iter().map(|&e| (e, 0.0)).collect();
    let report = moser_scaling_check(&zeta, &vbar, &Topography::Flat, &g, &ModelParams::default(), &pairs).unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.decades >= 2.0 - 1e-9);
}

proptest! {
    #[test]
    fn riemann_roundtrip(h in 1e-3f64..10.0, u in -5.0f64..5.0) {
        let (w, z) = riemann_from_depth(h, u);
        prop_assert!(w > z);
        let (h2, u2) = depth_from_riemann(w, z);
        prop_assert!((h2 - h).abs() <= 1e-12 * h.max(1.0));
        prop_assert!((u2 - u).abs() <= 1e-12 * u.abs().max(1.0));
    }

    #[test]
    fn speeds_are_u_plus_minus_sqrt_h(h in 1e-3f64..10.0, u in -5.0f64..5.0) {
        let (w, z) = riemann_from_depth(h, u);
        let (a, b) = characteristic_speeds(w, z);
        prop_assert!((a - (u + h.sqrt())).abs() < 1e-12);
        prop_assert!((b - (u - h.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn seminorm_is_homogeneous(c in -10.0f64..10.0, k in 1u32..6) {
        let g = grid(64);
        let f: Vec<f64> = g.positions().iter().map(|x| x.sin() + 0.3 * (2.0 * x).cos()).collect();
        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        let a = sobolev_seminorm(&f, k, &g).unwrap();
        let b = sobolev_seminorm(&cf, k, &g).unwrap();
        prop_assert!((b - c.abs() * a).abs() <= 1e-10 * a.max(1.0));
    }
}

fn order5_seminorm(eps: f64, beta_star: f64) -> f64 {
    let g = grid(256);
    let xs = g.positions();
    let phys = PhysicalState { grid: g, t: 0.0, zeta: xs.iter().map(|x| x.sin()).collect(), vbar: vec![0.0; 256] };
    let topo = Topography::Sine { amplitude: 1.0, width: 2.0 * PI, center: 0.0 };
    let params = ModelParams { eps, beta_star, ..ModelParams::default() };
    let depth = to_depth(&phys, &topo, &params).unwrap();
    riemann_seminorm(&to_riemann(&depth, params.h_min).unwrap(), 5).unwrap()
}

#[test]
fn halving_eps_halves_the_seminorm() {
    let (a, b) = (order5_seminorm(0.01, 0.0), order5_seminorm(0.005, 0.0));
    assert!((a / b - 2.0).abs() < 0.1, "ratio {}", a / b);
}

#[test]
fn seminorm_is_proportional_to_beta_star() {
    let (a, b) = (order5_seminorm(0.0, 0.01), order5_seminorm(0.0, 0.005));
    assert!((a / b - 2.0).abs() < 0.1, "ratio {}", a / b);
}

#[test]
fn seminorm_order_is_limited() {
    let g = grid(16);
    assert!(matches!(sobolev_seminorm(&vec![0.0; 16], 7, &g), Err(Error::Argument(_))));
    assert_eq!(sobolev_seminorm(&vec![2.5; 16], 3, &g).unwrap(), 0.0);
}

#[test]
fn rest_state_has_zero_seminorm() {
    assert_eq!(order5_seminorm(0.0, 0.0), 0.0);
}

proptest! {
    #[test]
    fn raising_the_surface_widens_the_invariant_gap(bump in 0.0f64..0.5, x0 in -3.0f64..3.0) {
        let g = grid(32);
        let xs = g.positions();
        let base: Vec<f64> = xs.iter().map(|x| 0.3 * x.sin()).collect();
        let raised: Vec<f64> = xs.iter().zip(&base).map(|(x, b)| b + bump * (-(x - x0).powi(2)).exp()).collect();
        let params = ModelParams { eps: 0.5, ..ModelParams::default() };
        let gap = |zeta: Vec<f64>| {
            let phys = PhysicalState { grid: g, t: 0.0, zeta, vbar: vec![0.1; 32] };
            let r = to_riemann(&to_depth(&phys, &Topography::Flat, &params).unwrap(), params.h_min).unwrap();
            r.w.iter().zip(&r.z).map(|(w, z)| w - z).collect::<Vec<f64>>()
        };
        let (a, b) = (gap(base), gap(raised));
        for i in 0..32 {
            prop_assert!(b[i] >= a[i]);
        }
    }
}
