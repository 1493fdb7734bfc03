//! Method-of-lines solver for the diagonal Riemann-invariant system
//!
//! `w_t + (w + z/3) w_x = -3/4 beta* b'(x)`,
//! `z_t + (w/3 + z) z_x = -3/4 beta* b'(x)`,
//!
//! with fifth-order upwind-biased differences and classical RK4. The grid
//! may translate at a constant velocity, in which case transport speeds are
//! taken relative to the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{derivative_with_metrics, Grid};
use crate::profile::profile_derivatives;
use crate::topography::Topography;
use crate::transforms::{characteristic_speeds, ModelParams, RiemannState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cfl: f64,
    /// The run stops once `min w_x <= -stop_slope_factor / dx`.
    pub stop_slope_factor: f64,
    /// Scales the stop threshold by the initial oscillation of each
    /// invariant, for data whose jump is much smaller than one.
    pub relative_stop: bool,
    /// Spacing of snapshots in self-similar time `-log(T - t)`.
    pub snapshot_ds: f64,
    pub t_max: f64,
    pub max_steps: usize,
    /// Constant translation velocity of the grid.
    pub grid_velocity: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl: 0.4,
            stop_slope_factor: 0.05,
            relative_stop: false,
            snapshot_ds: 0.1,
            t_max: 1e3,
            max_steps: 5_000_000,
            grid_velocity: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.stop_slope_factor > 0.0 && self.snapshot_ds > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config("stop factor and snapshot spacing must be positive, t_max finite".into()));
        }
        if !self.grid_velocity.is_finite() {
            return Err(Error::Config("grid velocity must be finite".into()));
        }
        Ok(())
    }
}

const GHOST: usize = 3;

fn pad(grid: &Grid, f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    if grid.is_periodic() {
        out.extend_from_slice(&f[n - GHOST..]);
        out.extend_from_slice(f);
        out.extend_from_slice(&f[..GHOST]);
    } else {
        out.extend(std::iter::repeat(f[0]).take(GHOST));
        out.extend_from_slice(f);
        out.extend(std::iter::repeat(f[n - 1]).take(GHOST));
    }
}

/// Fifth-order upwind-biased derivative in node coordinate at padded index
/// `j` (node `j - GHOST`), biased against the transport direction.
#[inline]
fn upwind(p: &[f64], j: usize, positive: bool) -> f64 {
    if positive {
        (-2.0 * p[j - 3] + 15.0 * p[j - 2] - 60.0 * p[j - 1] + 20.0 * p[j] + 30.0 * p[j + 1] - 3.0 * p[j + 2]) / 60.0
    } else {
        (3.0 * p[j - 2] - 30.0 * p[j - 1] - 20.0 * p[j] + 60.0 * p[j + 1] - 15.0 * p[j + 2] + 2.0 * p[j + 3]) / 60.0
    }
}

/// Right-hand side evaluator with reusable buffers.
struct Rhs<'a> {
    topo: &'a Topography,
    forcing: f64,
    velocity: f64,
    metrics: Vec<f64>,
    /// Bottom slope at the nodes for a fixed grid.
    fixed_slope: Option<Vec<f64>>,
    pw: Vec<f64>,
    pz: Vec<f64>,
}

impl<'a> Rhs<'a> {
    fn new(grid: &Grid, topo: &'a Topography, params: &ModelParams, velocity: f64) -> Self {
        let forcing = -0.75 * params.beta_star;
        let flat = topo.is_flat() || params.beta_star == 0.0;
        let fixed_slope = if flat {
            Some(vec![0.0; grid.n])
        } else if velocity == 0.0 {
            Some(grid.positions().iter().map(|x| topo.slope(*x)).collect())
        } else {
            None
        };
        Rhs { topo, forcing, velocity, metrics: grid.metrics(), fixed_slope, pw: Vec::new(), pz: Vec::new() }
    }

    fn eval(&mut self, grid: &Grid, w: &[f64], z: &[f64], dw: &mut [f64], dz: &mut [f64]) {
        pad(grid, w, &mut self.pw);
        pad(grid, z, &mut self.pz);
        let c = self.velocity;
        for i in 0..grid.n {
            let (lw, lz) = characteristic_speeds(w[i], z[i]);
            let (lw, lz) = (lw - c, lz - c);
            let j = i + GHOST;
            let inv = 1.0 / self.metrics[i];
            dw[i] = -lw * upwind(&self.pw, j, lw > 0.0) * inv;
            dz[i] = -lz * upwind(&self.pz, j, lz > 0.0) * inv;
        }
        if self.forcing != 0.0 {
            for i in 0..grid.n {
                let slope = match &self.fixed_slope {
                    Some(s) => s[i],
                    None => self.topo.slope(grid.x(i)),
                };
                dw[i] += self.forcing * slope;
                dz[i] += self.forcing * slope;
            }
        }
    }
}

/// Largest stable step for the given state.
pub fn stable_dt(state: &RiemannState, cfl: f64, grid_velocity: f64) -> f64 {
    stable_dt_with_metrics(state, cfl, grid_velocity, &state.grid.metrics())
}

fn stable_dt_with_metrics(state: &RiemannState, cfl: f64, grid_velocity: f64, metrics: &[f64]) -> f64 {
    let mut dt = f64::INFINITY;
    for i in 0..state.grid.n {
        let (lw, lz) = state.speeds(i);
        let speed = (lw - grid_velocity).abs().max((lz - grid_velocity).abs());
        if speed > 0.0 {
            dt = dt.min(metrics[i] / speed);
        }
    }
    cfl * dt
}

fn check_finite(state: &RiemannState) -> Result<()> {
    for i in 0..state.grid.n {
        if !(state.w[i].is_finite() && state.z[i].is_finite()) {
            return Err(Error::Instability {
                t: state.t,
                detail: format!("non-finite value at node {i} (x = {})", state.grid.x(i)),
            });
        }
        if state.w[i] <= state.z[i] {
            return Err(Error::Vacuum { node: i, x: state.grid.x(i), gap: state.w[i] - state.z[i] });
        }
    }
    Ok(())
}

fn rk4(rhs: &mut Rhs, state: &RiemannState, dt: f64) -> RiemannState {
    let n = state.grid.n;
    let c = rhs.velocity;
    let g0 = state.grid;
    let gh = g0.shifted(0.5 * c * dt);
    let g1 = g0.shifted(c * dt);
    let (mut k1w, mut k1z) = (vec![0.0; n], vec![0.0; n]);
    let (mut k2w, mut k2z) = (vec![0.0; n], vec![0.0; n]);
    let (mut k3w, mut k3z) = (vec![0.0; n], vec![0.0; n]);
    let (mut k4w, mut k4z) = (vec![0.0; n], vec![0.0; n]);
    let (mut tw, mut tz) = (vec![0.0; n], vec![0.0; n]);

    rhs.eval(&g0, &state.w, &state.z, &mut k1w, &mut k1z);
    for i in 0..n {
        tw[i] = state.w[i] + 0.5 * dt * k1w[i];
        tz[i] = state.z[i] + 0.5 * dt * k1z[i];
    }
    rhs.eval(&gh, &tw, &tz, &mut k2w, &mut k2z);
    for i in 0..n {
        tw[i] = state.w[i] + 0.5 * dt * k2w[i];
        tz[i] = state.z[i] + 0.5 * dt * k2z[i];
    }
    rhs.eval(&gh, &tw, &tz, &mut k3w, &mut k3z);
    for i in 0..n {
        tw[i] = state.w[i] + dt * k3w[i];
        tz[i] = state.z[i] + dt * k3z[i];
    }
    rhs.eval(&g1, &tw, &tz, &mut k4w, &mut k4z);
    let s = dt / 6.0;
    let w = (0..n).map(|i| state.w[i] + s * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i])).collect();
    let z = (0..n).map(|i| state.z[i] + s * (k1z[i] + 2.0 * k2z[i] + 2.0 * k3z[i] + k4z[i])).collect();
    RiemannState { grid: g1, t: state.t + dt, w, z }
}

/// One RK4 step. With `dt = None` the step is the CFL-limited maximum.
pub fn step(
    state: &RiemannState,
    topo: &Topography,
    params: &ModelParams,
    cfg: &SolverConfig,
    dt: Option<f64>,
) -> Result<RiemannState> {
    let dt = dt.unwrap_or_else(|| stable_dt(state, cfg.cfl, cfg.grid_velocity));
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Instability { t: state.t, detail: format!("invalid time step {dt}") });
    }
    let mut rhs = Rhs::new(&state.grid, topo, params, cfg.grid_velocity);
    let next = rk4(&mut rhs, state, dt);
    check_finite(&next)?;
    Ok(next)
}

/// Integrates to exactly `t_end` with CFL-limited steps.
pub fn advance_to(
    state: &RiemannState,
    topo: &Topography,
    params: &ModelParams,
    cfg: &SolverConfig,
    t_end: f64,
) -> Result<RiemannState> {
    cfg.validate()?;
    let mut rhs = Rhs::new(&state.grid, topo, params, cfg.grid_velocity);
    let metrics = state.grid.metrics();
    let mut cur = state.clone();
    let mut steps = 0usize;
    while cur.t < t_end {
        let dt = stable_dt_with_metrics(&cur, cfg.cfl, cfg.grid_velocity, &metrics).min(t_end - cur.t);
        cur = rk4(&mut rhs, &cur, dt);
        if t_end - cur.t < 1e-14 * t_end.abs().max(1.0) {
            cur.t = t_end;
        }
        check_finite(&cur)?;
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::Instability { t: cur.t, detail: "step limit reached".into() });
        }
    }
    Ok(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `w_x` reached the resolution threshold.
    SlopeThreshold,
    /// `z_x` reached the resolution threshold before `w_x`.
    OpposingSlopeThreshold,
    TimeLimit,
    StepLimit,
}

/// Per-state scalar diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub t: f64,
    pub min_slope: f64,
    pub argmin_x: f64,
    /// Grid spacing at the steepest node.
    pub local_dx: f64,
    pub min_opposing_slope: f64,
    pub mass: f64,
    pub w_sup: f64,
}

pub fn summarize(state: &RiemannState) -> StateSummary {
    summarize_with_metrics(state, &state.grid.metrics())
}

fn summarize_with_metrics(state: &RiemannState, metrics: &[f64]) -> StateSummary {
    let dw = derivative_with_metrics(&state.grid, &state.w, metrics);
    let dz = derivative_with_metrics(&state.grid, &state.z, metrics);
    let (mut imin, mut vmin) = (0, f64::INFINITY);
    for (i, v) in dw.iter().enumerate() {
        if *v < vmin {
            vmin = *v;
            imin = i;
        }
    }
    let zmin = dz.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let h: Vec<f64> = state.w.iter().zip(&state.z).map(|(w, z)| (w - z) * (w - z) / 9.0).collect();
    StateSummary {
        t: state.t,
        min_slope: vmin,
        argmin_x: state.grid.x(imin),
        local_dx: metrics[imin],
        min_opposing_slope: zmin,
        mass: state.grid.integrate_with_metrics(&h, metrics),
        w_sup: state.w_sup(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub state: RiemannState,
    pub summary: StateSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// Summary after every step, starting with the initial state.
    pub history: Vec<StateSummary>,
    pub stop: StopReason,
    pub steps: usize,
}

/// Integrates until the slope threshold, the time limit or the step limit.
/// Snapshots are taken at spacing `snapshot_ds` in `-log(T_hat - t)`, where
/// `T_hat = t - 1 / min w_x` is the instantaneous breaking-time estimate,
/// and at the final state.
pub fn run(initial: &RiemannState, topo: &Topography, params: &ModelParams, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    params.validate()?;
    check_finite(initial)?;
    let mut rhs = Rhs::new(&initial.grid, topo, params, cfg.grid_velocity);
    let metrics = initial.grid.metrics();
    let min_dx = initial.grid.min_spacing();
    let mut cur = initial.clone();
    let mut history = Vec::new();
    let mut snapshots = Vec::new();
    let mut last_gap = f64::INFINITY;
    let ratio = (-cfg.snapshot_ds).exp();
    let oscillation = |f: &[f64]| f.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - f.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let (w_scale, z_scale) = if cfg.relative_stop {
        (oscillation(&initial.w), oscillation(&initial.z))
    } else {
        (1.0, 1.0)
    };
    let mut steps = 0usize;
    let stop = loop {
        let summary = summarize_with_metrics(&cur, &metrics);
        history.push(summary);
        let threshold = -cfg.stop_slope_factor * w_scale / summary.local_dx;
        let reason = if summary.min_slope <= threshold {
            Some(StopReason::SlopeThreshold)
        } else if summary.min_opposing_slope <= -cfg.stop_slope_factor * z_scale / min_dx {
            Some(StopReason::OpposingSlopeThreshold)
        } else if cur.t >= cfg.t_max {
            Some(StopReason::TimeLimit)
        } else if steps >= cfg.max_steps {
            Some(StopReason::StepLimit)
        } else {
            None
        };
        if let Some(reason) = reason {
            snapshots.push(Snapshot { state: cur, summary });
            break reason;
        }
        if summary.min_slope < 0.0 {
            let gap = -1.0 / summary.min_slope;
            if snapshots.is_empty() || gap <= last_gap * ratio {
                snapshots.push(Snapshot { state: cur.clone(), summary });
                last_gap = gap;
            }
        } else if snapshots.is_empty() {
            snapshots.push(Snapshot { state: cur.clone(), summary });
        }
        let dt = stable_dt_with_metrics(&cur, cfg.cfl, cfg.grid_velocity, &metrics).min(cfg.t_max - cur.t);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Instability { t: cur.t, detail: format!("invalid time step {dt}") });
        }
        let mut next = rk4(&mut rhs, &cur, dt);
        if cfg.t_max - next.t < 1e-14 * cfg.t_max.abs().max(1.0) {
            next.t = cfg.t_max;
        }
        check_finite(&next)?;
        cur = next;
        steps += 1;
    };
    Ok(Trajectory { snapshots, history, stop, steps })
}

/// Smooth initial data for the pure transport equation `w_t + (w + zbar/3) w_x = 0`
/// with constant `z = zbar`.
pub trait TransportData {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
    /// Global minimum of the slope.
    fn min_slope(&self) -> f64;

    /// Breaking time `-1 / min slope`, infinite when the data never steepens.
    fn breaking_time(&self) -> f64 {
        let m = self.min_slope();
        if m < 0.0 {
            -1.0 / m
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum OracleData {
    /// `kappa - amplitude * sin(x)`
    Sine { kappa: f64, amplitude: f64 },
    /// `kappa + amplitude * Wbar(sin x)`, which matches the stable profile
    /// to third order at the steepest point.
    ProfileSine { kappa: f64, amplitude: f64 },
    Constant { kappa: f64 },
}

impl TransportData for OracleData {
    fn value(&self, x: f64) -> f64 {
        match *self {
            OracleData::Sine { kappa, amplitude } => kappa - amplitude * x.sin(),
            OracleData::ProfileSine { kappa, amplitude } => {
                kappa + amplitude * profile_derivatives(x.sin()).expect("finite")[0]
            }
            OracleData::Constant { kappa } => kappa,
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match *self {
            OracleData::Sine { amplitude, .. } => -amplitude * x.cos(),
            OracleData::ProfileSine { amplitude, .. } => {
                amplitude * profile_derivatives(x.sin()).expect("finite")[1] * x.cos()
            }
            OracleData::Constant { .. } => 0.0,
        }
    }

    fn min_slope(&self) -> f64 {
        match *self {
            OracleData::Sine { amplitude, .. } | OracleData::ProfileSine { amplitude, .. } => -amplitude.abs(),
            OracleData::Constant { .. } => 0.0,
        }
    }
}

impl OracleData {
    pub fn kappa(&self) -> f64 {
        match *self {
            OracleData::Sine { kappa, .. } | OracleData::ProfileSine { kappa, .. } | OracleData::Constant { kappa } => kappa,
        }
    }

    /// Position of the steepest point at `t = 0`.
    pub fn steepest_point(&self) -> f64 {
        match *self {
            OracleData::Sine { amplitude, .. } | OracleData::ProfileSine { amplitude, .. } => {
                if amplitude >= 0.0 {
                    0.0
                } else {
                    std::f64::consts::PI
                }
            }
            OracleData::Constant { .. } => 0.0,
        }
    }
}

/// Exact solution of the transport equation by characteristics:
/// `w(x, t) = w0(x0)` with `x = x0 + t (w0(x0) + zbar/3)`.
pub fn burgers_exact(data: &dyn TransportData, zbar: f64, x: f64, t: f64) -> Result<f64> {
    if !(x.is_finite() && t.is_finite()) || t < 0.0 {
        return Err(Error::Argument(format!("invalid evaluation point x = {x}, t = {t}")));
    }
    let t_star = data.breaking_time();
    if t >= t_star {
        return Err(Error::Validity { t, t_star });
    }
    let shift = zbar / 3.0;
    let f = |x0: f64| x0 + t * (data.value(x0) + shift) - x;
    let df = |x0: f64| 1.0 + t * data.slope(x0);
    let guess = x - t * (data.value(x) + shift);
    // bracket the monotone root
    let mut width = 1.0 + t * (data.value(x).abs() + shift.abs());
    let (mut lo, mut hi) = (guess - width, guess + width);
    let mut tries = 0;
    while f(lo) > 0.0 || f(hi) < 0.0 {
        width *= 2.0;
        lo = guess - width;
        hi = guess + width;
        tries += 1;
        if tries > 60 {
            return Err(Error::Root(format!("could not bracket the characteristic foot for x = {x}")));
        }
    }
    let mut x0 = guess.clamp(lo, hi);
    for _ in 0..200 {
        let v = f(x0);
        if v == 0.0 {
            break;
        }
        if v > 0.0 {
            hi = x0;
        } else {
            lo = x0;
        }
        let d = df(x0);
        let mut next = x0 - v / d;
        if !(next > lo && next < hi) || d <= 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - x0).abs() <= 1e-15 * (1.0 + x0.abs()) {
            x0 = next;
            break;
        }
        x0 = next;
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + x0.abs()) {
            break;
        }
    }
    Ok(data.value(x0))
}

/// Exact slope `w_x = w0'(x0) / (1 + t w0'(x0))` along the characteristic.
pub fn burgers_exact_slope(data: &dyn TransportData, zbar: f64, x: f64, t: f64) -> Result<f64> {
    let w = burgers_exact(data, zbar, x, t)?;
    let x0 = x - t * (w + zbar / 3.0);
    let s = data.slope(x0);
    Ok(s / (1.0 + t * s))
}
