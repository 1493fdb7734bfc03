//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.
//! Heavy runs are shared between tests and written to a temporary root.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use wavebreak::diagnostics::*;
use wavebreak::grid::Grid;
use wavebreak::harness::checks::profile_check;
use wavebreak::harness::output::read_manifest;
use wavebreak::harness::{run_single, run_sweep, RunConfig, RunOutcome, SweepOutcome};
use wavebreak::profile::rescaled_derivatives;
use wavebreak::renormalization::*;
use wavebreak::solver::*;
use wavebreak::topography::Topography;
use wavebreak::transforms::{ModelParams, RiemannState};

fn root() -> &'static Path {
    static ROOT: OnceLock<tempfile::TempDir> = OnceLock::new();
    ROOT.get_or_init(|| tempfile::tempdir().unwrap()).path()
}

struct Timed<T> {
    value: T,
    elapsed: Duration,
}

fn timed<T>(f: impl FnOnce() -> T) -> Timed<T> {
    let start = Instant::now();
    let value = f();
    Timed { value, elapsed: start.elapsed() }
}

fn preset(name: &str) -> RunConfig {
    RunConfig::preset(name).unwrap()
}

fn oracle() -> &'static Timed<RunOutcome> {
    static RUN: OnceLock<Timed<RunOutcome>> = OnceLock::new();
    RUN.get_or_init(|| timed(|| run_single(&preset("burgers-oracle"), root()).unwrap()))
}

fn seed() -> &'static Timed<RunOutcome> {
    static RUN: OnceLock<Timed<RunOutcome>> = OnceLock::new();
    RUN.get_or_init(|| timed(|| run_single(&preset("paper-seed"), root()).unwrap()))
}

fn sweep() -> &'static Timed<SweepOutcome> {
    static RUN: OnceLock<Timed<SweepOutcome>> = OnceLock::new();
    RUN.get_or_init(|| timed(|| run_sweep(&preset("topo-sine"), root()).unwrap()))
}

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("{} criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn verdict_pass(outcome: &RunOutcome, id: &str) -> bool {
    outcome.verdict.item(id).is_some_and(|i| i.evaluated && i.pass)
}

#[test]
fn criterion_01_profile_identities() {
    let t = timed(|| profile_check(5000, 1e6).unwrap());
    let r = &t.value;
    let pass = r.pass && r.points >= 10_000 && t.elapsed < Duration::from_secs(1);
    report(
        1,
        "profile_identities",
        pass,
        format!(
            "{} points, cubic {:e}, ode {:e}, taylor ok {}, bound violations {}, {:.3} s",
            r.points,
            r.max_cubic_residual,
            r.max_ode_residual,
            r.taylor.iter().all(|c| c.pass),
            r.bounds.checks.iter().map(|c| c.violations).sum::<usize>(),
            t.elapsed.as_secs_f64()
        ),
    );
}

fn sine_error(n: usize) -> f64 {
    let data = OracleData::Sine { kappa: 3.0, amplitude: 0.1 };
    let grid = Grid::periodic(n, -PI, 2.0 * PI).unwrap();
    let w = grid.positions().iter().map(|x| data.value(*x)).collect();
    let init = RiemannState { grid, t: 0.0, w, z: vec![0.0; n] };
    let t = 0.5 * data.breaking_time();
    let out = advance_to(&init, &Topography::Flat, &ModelParams::default(), &SolverConfig::default(), t).unwrap();
    (0..n).map(|i| (out.w[i] - burgers_exact(&data, 0.0, out.grid.x(i), t).unwrap()).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_02_solver_against_characteristics() {
    let t = timed(|| [1024, 2048, 4096].map(sine_error));
    let errs = t.value;
    let xs = [1024f64.log2(), 2048f64.log2(), 4096f64.log2()];
    let ys = errs.map(f64::log2);
    let order = -fit_line(&xs, &ys).slope;
    let pass = errs[2] <= 1e-6 && order >= 4.0 && t.elapsed < Duration::from_secs(60);
    report(
        2,
        "solver_vs_characteristics",
        pass,
        format!("sup errors {:?}, fitted order {order:.3}, {:.1} s", errs.map(|e| format!("{e:.3e}")), t.elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_03_blowup_rate() {
    let (o, s) = (oracle(), seed());
    let (or, ot, sr) = (
        o.value.results.as_ref().unwrap().rate.as_ref().unwrap(),
        o.value.results.as_ref().unwrap().rate_tight.as_ref().unwrap(),
        s.value.results.as_ref().unwrap().rate.as_ref().unwrap(),
    );
    let pass = or.pass && ot.pass && sr.pass && s.elapsed < Duration::from_secs(600) && o.elapsed < Duration::from_secs(600);
    report(
        3,
        "blowup_rate",
        pass,
        format!(
            "oracle product in [{:.5}, {:.5}] ({} points), seed product in [{:.5}, {:.5}] ({} points), runs {:.1} s / {:.1} s",
            or.min,
            or.max,
            or.series.len(),
            sr.min,
            sr.max,
            sr.series.len(),
            o.elapsed.as_secs_f64(),
            s.elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_04_blowup_bounds() {
    let s = &seed().value;
    let b = s.results.as_ref().unwrap().blowup.as_ref().unwrap();
    let p = s.results.as_ref().unwrap().seed.as_ref().unwrap().params;
    let (tb, xb) = (2.0 * p.m * p.delta.powf(4.0 / 3.0), 2.0 * p.m * p.delta);
    let pass = verdict_pass(s, "I") && b.t_star.abs() <= 0.9 * tb && b.x_star.abs() <= 0.9 * xb;
    report(4, "blowup_bounds", pass, format!("T* = {:e} (bound {tb:.4}), x* = {:e} (bound {xb})", b.t_star, b.x_star));
}

fn power_state(alpha: f64) -> RiemannState {
    let n = 16384;
    let grid = Grid::periodic(n, -PI, 2.0 * PI).unwrap();
    let w = grid.positions().iter().map(|x| x.abs().powf(alpha)).collect();
    RiemannState { grid, t: 0.0, w, z: vec![0.0; n] }
}

#[test]
fn criterion_05_cusp_exponent() {
    let o = &oracle().value;
    let c = o.results.as_ref().unwrap().cusp.as_ref().unwrap();
    let synthetic: Vec<(f64, f64)> = [0.25, 1.0 / 3.0, 0.5].iter().map(|&a| (a, cusp_fit(&power_state(a), 0.0).unwrap().exponent)).collect();
    let pass = (c.fit.exponent - 1.0 / 3.0).abs() <= 0.05 && synthetic.iter().all(|(a, e)| (a - e).abs() <= 1e-3);
    report(
        5,
        "cusp_exponent",
        pass,
        format!(
            "oracle {:.4} (CI [{:.4}, {:.4}]), synthetic {:?}",
            c.fit.exponent,
            c.fit.interval.0,
            c.fit.interval.1,
            synthetic.iter().map(|(a, e)| format!("{a:.4} -> {e:.6}")).collect::<Vec<_>>()
        ),
    );
}

fn profile_frame(s: f64, nu: f64) -> SelfSimilarFrame {
    let record = ModulationRecord { t: -(-s).exp(), kappa: 0.0, tau: 0.0, xi: 0.0, s, slope: -(s.exp()), local_dx: 1e-9 };
    let w = |y: f64| {
        let d = rescaled_derivatives(y, nu).unwrap();
        [d[0], d[1], d[2], d[3], d[4]]
    };
    SelfSimilarFrame::synthetic(record, frame_points(1e4), 1e-3, w, |_| [0.0; 5])
}

#[test]
fn criterion_06_profile_convergence() {
    let s = &seed().value;
    let conv = s.results.as_ref().unwrap().convergence.as_ref().unwrap();
    let exact: Vec<SelfSimilarFrame> = (0..12).map(|k| profile_frame(5.0 + 0.1 * k as f64, 6.0)).collect();
    let synthetic = convergence_check(&exact, 6.0, 1e3, 0.1).unwrap().final_distance;
    let nus: Vec<f64> = [6.0, 24.0]
        .iter()
        .map(|&nu| estimate_nu(&(0..12).map(|k| profile_frame(5.0 + 0.1 * k as f64, nu)).collect::<Vec<_>>()).unwrap().nu)
        .collect();
    let pass = conv.pass
        && conv.decreasing
        && conv.final_distance < 0.1
        && synthetic == 0.0
        && (nus[0] - 6.0).abs() <= 0.06
        && (nus[1] - 24.0).abs() <= 0.24;
    report(
        6,
        "profile_convergence",
        pass,
        format!(
            "seed nu {:.5}, final distance {:.3e}, decreasing {}, synthetic distance {synthetic}, nu recovered {nus:?}",
            conv.nu, conv.final_distance, conv.decreasing
        ),
    );
}

#[test]
fn criterion_07_modulation_constraints() {
    let (o, s) = (&oracle().value, &seed().value);
    let rows: Vec<_> = o.results.as_ref().unwrap().constraints.iter().chain(&s.results.as_ref().unwrap().constraints).collect();
    let exact_zero = rows.iter().all(|c| c.w0 == 0.0);
    let slope = rows.iter().map(|c| c.slope_error.abs()).fold(0.0, f64::max);
    let curvature = rows.iter().map(|c| c.curvature.abs() / c.curvature_tol).fold(0.0, f64::max);
    let (lo, hi) = s.results.as_ref().unwrap().constraints.iter().fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(c.slope_sup), b.max(c.slope_sup)));
    let pass = !s.results.as_ref().unwrap().constraints.is_empty()
        && exact_zero
        && slope <= 1e-6
        && curvature <= 1.0
        && rows.iter().all(|c| c.pass)
        && lo >= 0.99
        && hi <= 1.01;
    report(
        7,
        "modulation_constraints",
        pass,
        format!(
            "{} frames, W(0) = 0 exactly {exact_zero}, max |dW(0) + 1| {slope:e}, max curvature / tolerance {curvature:.3}, seed sup|dW| in [{lo}, {hi}]",
            rows.len()
        ),
    );
}

#[test]
fn criterion_08_bootstrap_inequalities() {
    let s = &seed().value;
    let mut worst: BTreeMap<String, (f64, bool)> = BTreeMap::new();
    for r in &s.results.as_ref().unwrap().bootstrap {
        for e in &r.entries {
            let slot = worst.entry(e.name.clone()).or_insert((f64::INFINITY, true));
            if !e.skipped {
                slot.0 = slot.0.min(e.margin);
            }
            slot.1 &= e.pass;
        }
    }
    for (name, (margin, pass)) in &worst {
        println!("    {name:<22} worst margin {margin:.4} {}", if *pass { "ok" } else { "violated" });
    }
    let pass = !s.results.as_ref().unwrap().bootstrap.is_empty() && s.results.as_ref().unwrap().bootstrap.iter().all(|r| r.pass) && verdict_pass(s, "bootstrap");
    let overall = worst.values().map(|v| v.0).fold(f64::INFINITY, f64::min);
    report(
        8,
        "bootstrap_inequalities",
        pass,
        format!("{} frames, {} inequalities, worst margin {overall:.4}", s.results.as_ref().unwrap().bootstrap.len(), worst.len()),
    );
}

#[test]
fn criterion_09_lagrangian_bounds() {
    let s = &seed().value;
    let paths = &s.results.as_ref().unwrap().lagrangian;
    let starts: std::collections::BTreeSet<u64> = paths.iter().map(|p| p.y0.to_bits()).collect();
    let upper = paths.iter().all(|p| p.upper_pass);
    let lower = paths.iter().filter(|p| p.lower_applicable).all(|p| p.lower_pass);
    let integral = paths.iter().filter(|p| p.lower_applicable).all(|p| p.integral_pass);
    let worst_upper = paths.iter().map(|p| p.upper_ratio).fold(0.0, f64::max);
    let worst_integral = paths.iter().map(|p| p.integral / p.integral_bound).fold(0.0, f64::max);
    let pass = starts.len() >= 20 && upper && lower && integral && verdict_pass(s, "lagrangian");
    report(
        9,
        "lagrangian_bounds",
        pass,
        format!(
            "{} starting points, {} paths, upper ok {upper} (worst ratio {worst_upper:.3}), lower ok {lower}, integral ok {integral} (worst ratio {worst_integral:.3})",
            starts.len(),
            paths.len()
        ),
    );
}

#[test]
fn criterion_10_lifespan_scaling() {
    let t = sweep();
    let sw = &t.value;
    let slope = |axis: &str| sw.fits.iter().find(|f| f.axis == axis).and_then(|f| f.fit.as_ref()).map(|f| f.slope);
    let (e, b) = (slope("eps"), slope("beta_star"));
    let in_band = |v: Option<f64>| v.is_some_and(|v| (-1.1..=-0.9).contains(&v));
    let moser = sw.moser.as_ref().unwrap();
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let pass = in_band(e) && in_band(b) && moser.pass && moser.decades >= 2.0 - 1e-9 && t.elapsed < Duration::from_secs(1800);
    report(
        10,
        "lifespan_scaling",
        pass,
        format!(
            "eps slope {e:?}, beta* slope {b:?}, moser spread {:.3} over {:.2} decades, sweep {:.0} s on {cores} core(s)",
            moser.ratio_spread,
            moser.decades,
            t.elapsed.as_secs_f64()
        ),
    );
}

/// Every file listed in a manifest, with its digest.
fn digests(dir: &Path) -> BTreeMap<String, String> {
    read_manifest(dir).unwrap().files.into_iter().map(|f| (f.path, f.sha256)).collect()
}

fn differing(a: &Path, b: &Path) -> Vec<String> {
    let (da, db) = (digests(a), digests(b));
    let mut out: Vec<String> = da.iter().filter(|(k, v)| db.get(*k) != Some(*v)).map(|(k, _)| k.clone()).collect();
    out.extend(db.keys().filter(|k| !da.contains_key(*k)).cloned());
    out
}

#[test]
fn criterion_11_determinism() {
    let again = root().join("rerun");
    let mut diffs = Vec::new();
    for first in [&oracle().value, &seed().value] {
        let cfg = first.results.as_ref().unwrap().config.clone();
        let second = run_single(&cfg, &again).unwrap();
        diffs.extend(differing(&first.dir, &second.dir).into_iter().map(|f| format!("{}:{f}", cfg.output.name)));
    }
    // worker count: a reduced sweep on one and on eight workers
    let mut small = preset("topo-sine");
    small.sweep.eps = vec![0.16, 0.32];
    small.sweep.beta_star = vec![0.16, 0.32];
    let sweeps: Vec<PathBuf> = [1usize, 8]
        .iter()
        .map(|&w| {
            let mut c = small.clone();
            c.sweep.workers = w;
            run_sweep(&c, &root().join(format!("workers{w}"))).unwrap().dir
        })
        .collect();
    let sweep_diff = differing(&sweeps[0], &sweeps[1]);
    let csv_equal = std::fs::read(sweeps[0].join("sweep.csv")).unwrap() == std::fs::read(sweeps[1].join("sweep.csv")).unwrap();
    let pass = diffs.is_empty() && sweep_diff.is_empty() && csv_equal;
    report(
        11,
        "determinism",
        pass,
        format!("rerun differences {diffs:?}, sweep 1 vs 8 workers differences {sweep_diff:?}"),
    );
}
