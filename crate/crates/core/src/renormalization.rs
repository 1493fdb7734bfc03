//! Modulation variables `(kappa, tau, xi)` and the self-similar frame
//! `y = (x - xi) e^{3s/2}`, `W = e^{s/2} (w - kappa)`, `Z = z`,
//! `s = -log(tau - t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{derivatives, interpolate_q, interpolate_sorted, Grid};
use crate::profile::symmetric_log_points;
use crate::topography::Topography;
use crate::transforms::RiemannState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationRecord {
    pub t: f64,
    pub kappa: f64,
    pub tau: f64,
    pub xi: f64,
    pub s: f64,
    /// `w_x` at `xi`, equal to `-1 / (tau - t)`.
    pub slope: f64,
    /// Grid spacing at `xi`.
    pub local_dx: f64,
}

/// Locates the steepest point of `w` and the modulation variables there.
/// Root of the interpolated `w_xx` next to `guess`, so that the frame
/// curvature at the origin vanishes to interpolation accuracy. Falls back
/// to `guess` when no sign change brackets it.
fn refine_inflection(grid: &Grid, d2w: &[f64], guess: f64) -> f64 {
    let f = |q: f64| interpolate_q(grid, d2w, q);
    let (mut a, mut b) = (guess - 1.0, guess + 1.0);
    if !grid.is_periodic() && (a < 0.0 || b > (grid.n - 1) as f64) {
        return guess;
    }
    let (mut fa, fb) = (f(a), f(b));
    if !(fa * fb < 0.0) {
        return guess;
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn extract_modulation(state: &RiemannState) -> Result<ModulationRecord> {
    let grid = &state.grid;
    let d = derivatives(grid, &state.w, 2);
    let (dw, d2w) = (&d[0], &d[1]);
    let (mut imin, mut vmin) = (0usize, f64::INFINITY);
    for (i, v) in dw.iter().enumerate() {
        if *v < vmin {
            vmin = *v;
            imin = i;
        }
    }
    if !(vmin < 0.0) {
        return Err(Error::NotSteepening { min_slope: vmin });
    }
    if !grid.is_periodic() && (imin < 3 || imin + 3 >= grid.n) {
        return Err(Error::EdgeProximity { node: imin, cells: 3 });
    }
    // parabolic fit in node coordinate on dw/dq
    let g = |k: isize| {
        let j = grid.offset_clamped(imin, k);
        dw[j] * grid.spacing(j)
    };
    let (gm, g0, gp) = (g(-1), g(0), g(1));
    let curv = gm - 2.0 * g0 + gp;
    let dq = if curv > 0.0 { (0.5 * (gm - gp) / curv).clamp(-0.5, 0.5) } else { 0.0 };
    let q = refine_inflection(grid, d2w, imin as f64 + dq);
    let slope = interpolate_q(grid, dw, q);
    if !(slope < 0.0) {
        return Err(Error::NotSteepening { min_slope: slope });
    }
    let kappa = interpolate_q(grid, &state.w, q);
    let gap = -1.0 / slope;
    Ok(ModulationRecord {
        t: state.t,
        kappa,
        tau: state.t + gap,
        xi: grid.x_at(q),
        s: -gap.ln(),
        slope,
        local_dx: grid.metric_at(q),
    })
}

/// Time derivatives of the modulation variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationRates {
    pub kappa_dot: f64,
    pub tau_dot: f64,
    pub xi_dot: f64,
}

impl ModulationRates {
    /// `beta_tau = 1 / (1 - tau_dot)`.
    pub fn beta_tau(&self) -> f64 {
        1.0 / (1.0 - self.tau_dot)
    }
}

/// Differentiates the records at `idx` in time: three-point Lagrange
/// differences in the interior, two-point at the ends.
pub fn modulation_rates(records: &[ModulationRecord], idx: usize) -> Result<ModulationRates> {
    let n = records.len();
    if n < 2 || idx >= n {
        return Err(Error::InsufficientHistory(format!(
            "need at least two modulation records around index {idx}, have {n}"
        )));
    }
    let diff = |f: &dyn Fn(&ModulationRecord) -> f64| -> f64 {
        if idx == 0 || idx == n - 1 {
            let (a, b) = if idx == 0 { (0, 1) } else { (n - 2, n - 1) };
            (f(&records[b]) - f(&records[a])) / (records[b].t - records[a].t)
        } else {
            let (r0, r1, r2) = (&records[idx - 1], &records[idx], &records[idx + 1]);
            let (h0, h1) = (r1.t - r0.t, r2.t - r1.t);
            let c0 = -h1 / (h0 * (h0 + h1));
            let c1 = (h1 - h0) / (h0 * h1);
            let c2 = h0 / (h1 * (h0 + h1));
            c0 * f(r0) + c1 * f(r1) + c2 * f(r2)
        }
    };
    Ok(ModulationRates { kappa_dot: diff(&|r| r.kappa), tau_dot: diff(&|r| r.tau), xi_dot: diff(&|r| r.xi) })
}

/// Orders of `y`-derivatives stored on a frame (0..=4).
pub const FRAME_ORDERS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarFrame {
    pub modulation: ModulationRecord,
    /// Symmetric, log-uniform in `|y|`, including `y = 0`.
    pub y: Vec<f64>,
    /// `d^k W / dy^k` on `y`, for `k = 0..=4`.
    pub w: Vec<Vec<f64>>,
    /// `d^k Z / dy^k` on `y`, for `k = 0..=4`.
    pub z: Vec<Vec<f64>>,
    /// Bottom slope `B = b'(x(y))`.
    pub b: Vec<f64>,
    /// Physical grid spacing at `xi` in units of `y`.
    pub core_h: f64,
    /// Largest `|y|` inside the computational box.
    pub y_limit: f64,
}

impl SelfSimilarFrame {
    pub fn s(&self) -> f64 {
        self.modulation.s
    }

    /// Index of `y = 0`.
    pub fn origin(&self) -> usize {
        self.y.len() / 2
    }

    /// `sup |dW/dy|` over the frame.
    pub fn slope_sup(&self) -> f64 {
        self.w[1].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Interpolates derivative `k` of `W` at `y` (quintic, nonuniform).
    pub fn w_at(&self, k: usize, y: f64) -> f64 {
        interpolate_sorted(&self.y, &self.w[k], y, 5)
    }

    pub fn z_at(&self, k: usize, y: f64) -> f64 {
        interpolate_sorted(&self.y, &self.z[k], y, 5)
    }

    /// Resamples every field onto new abscissae (within `y_limit`).
    pub fn resample(&self, y: &[f64]) -> SelfSimilarFrame {
        let map = |f: &Vec<f64>| y.iter().map(|v| interpolate_sorted(&self.y, f, *v, 5)).collect::<Vec<f64>>();
        SelfSimilarFrame {
            modulation: self.modulation,
            y: y.to_vec(),
            w: self.w.iter().map(map).collect(),
            z: self.z.iter().map(map).collect(),
            b: map(&self.b),
            core_h: self.core_h,
            y_limit: self.y_limit,
        }
    }

    /// Frame built from analytic fields, used by synthetic checks.
    pub fn synthetic(
        modulation: ModulationRecord,
        y: Vec<f64>,
        core_h: f64,
        w: impl Fn(f64) -> [f64; FRAME_ORDERS],
        z: impl Fn(f64) -> [f64; FRAME_ORDERS],
    ) -> Self {
        let mut wf = vec![Vec::with_capacity(y.len()); FRAME_ORDERS];
        let mut zf = vec![Vec::with_capacity(y.len()); FRAME_ORDERS];
        for v in &y {
            let a = w(*v);
            let b = z(*v);
            for k in 0..FRAME_ORDERS {
                wf[k].push(a[k]);
                zf[k].push(b[k]);
            }
        }
        let y_limit = y.last().copied().unwrap_or(0.0);
        let b = vec![0.0; y.len()];
        SelfSimilarFrame { modulation, y, w: wf, z: zf, b, core_h, y_limit }
    }
}

/// Points per decade of the frame's log-uniform `|y|` grid.
pub const FRAME_POINTS_PER_DECADE: f64 = 64.0;

/// Smallest positive `|y|` on a frame grid.
pub const FRAME_Y_MIN: f64 = 1e-3;

/// Frame abscissae up to `y_limit`.
pub fn frame_points(y_limit: f64) -> Vec<f64> {
    let decades = (y_limit / FRAME_Y_MIN).log10().max(0.1);
    let n = (decades * FRAME_POINTS_PER_DECADE).ceil() as usize + 1;
    symmetric_log_points(n, FRAME_Y_MIN, y_limit)
}

fn box_limit(grid: &Grid, xi: f64) -> f64 {
    match grid.period() {
        Some(l) => 0.5 * l * (1.0 - 1e-9),
        None => {
            // keep clear of the edge cells where differences degrade
            let lo = grid.x(8);
            let hi = grid.x(grid.n - 9);
            (hi - xi).min(xi - lo).max(0.0)
        }
    }
}

/// Transforms a state to self-similar variables around its modulation.
pub fn to_frame(state: &RiemannState, record: &ModulationRecord, topo: &Topography) -> Result<SelfSimilarFrame> {
    if (state.t - record.t).abs() > 1e-12 * state.t.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "modulation record at t = {} does not belong to the state at t = {}",
            record.t, state.t
        )));
    }
    let grid = &state.grid;
    let s = record.s;
    let len = (-1.5 * s).exp();
    let y_limit = box_limit(grid, record.xi) / len;
    let y = frame_points(y_limit);
    let dw = derivatives(grid, &state.w, FRAME_ORDERS - 1);
    let dz = derivatives(grid, &state.z, FRAME_ORDERS - 1);
    let amp = (0.5 * s).exp();
    let mut w = vec![Vec::with_capacity(y.len()); FRAME_ORDERS];
    let mut z = vec![Vec::with_capacity(y.len()); FRAME_ORDERS];
    let mut b = Vec::with_capacity(y.len());
    for &v in &y {
        let x = record.xi + v * len;
        let q = grid.q_of(x);
        w[0].push(amp * (interpolate_q(grid, &state.w, q) - record.kappa));
        z[0].push(interpolate_q(grid, &state.z, q));
        let mut scale = 1.0;
        for k in 1..FRAME_ORDERS {
            scale *= len;
            w[k].push(amp * scale * interpolate_q(grid, &dw[k - 1], q));
            z[k].push(scale * interpolate_q(grid, &dz[k - 1], q));
        }
        b.push(topo.slope(x));
    }
    let o = y.len() / 2;
    // W(0) = 0 holds by construction of kappa; make it exact.
    w[0][o] = 0.0;
    let core_h = record.local_dx / len;
    Ok(SelfSimilarFrame { modulation: *record, y, w, z, b, core_h, y_limit })
}

/// `d^3 W / dy^3 (0)`, taken from the frame's eighth-order derivative.
pub fn third_derivative_at_origin(frame: &SelfSimilarFrame) -> f64 {
    frame.w[3][frame.origin()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NuEstimate {
    pub nu: f64,
    /// `|nu(s_last) - nu(s_last - 1)|`.
    pub drift: f64,
    /// Largest reversal among successive differences over the final unit.
    pub noise: f64,
    pub reliable: bool,
    pub series: Vec<(f64, f64)>,
}

/// Estimates `nu = lim d^3 W/dy^3 (0, s)` from ordered frames.
pub fn estimate_nu(frames: &[SelfSimilarFrame]) -> Result<NuEstimate> {
    if frames.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 frames, got {}", frames.len())));
    }
    let s_last = frames[frames.len() - 1].s();
    let s_first = frames[0].s();
    if s_last - s_first < 1.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "frames span {} units of s, need at least 1",
            s_last - s_first
        )));
    }
    let series: Vec<(f64, f64)> = frames.iter().map(|f| (f.s(), third_derivative_at_origin(f))).collect();
    let nu = series[series.len() - 1].1;
    let ss: Vec<f64> = series.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = series.iter().map(|p| p.1).collect();
    let earlier = interpolate_sorted(&ss, &vs, s_last - 1.0, 1);
    let drift = (nu - earlier).abs();
    let tail: Vec<f64> = series.iter().filter(|p| p.0 >= s_last - 1.0).map(|p| p.1).collect();
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let mut noise = 0.0f64;
    for w in diffs.windows(2) {
        if w[0] * w[1] < 0.0 {
            noise = noise.max(w[0].abs().min(w[1].abs()));
        }
    }
    let reliable = nu.is_finite() && noise <= drift.max(1e-9 * nu.abs());
    Ok(NuEstimate { nu, drift, noise, reliable, series })
}

/// Transport velocities `(V_W, V_Z)` on the frame grid.
pub fn transport_velocities(frame: &SelfSimilarFrame, rates: &ModulationRates) -> (Vec<f64>, Vec<f64>) {
    let r = &frame.modulation;
    let bt = rates.beta_tau();
    let e = (0.5 * r.s).exp();
    let mut vw = Vec::with_capacity(frame.y.len());
    let mut vz = Vec::with_capacity(frame.y.len());
    for i in 0..frame.y.len() {
        let y = frame.y[i];
        let wv = frame.w[0][i];
        let zv = frame.z[0][i];
        let gw = e * bt * (r.kappa + zv / 3.0 - rates.xi_dot);
        let gz = e * bt * (r.kappa / 3.0 + zv - rates.xi_dot);
        vw.push(1.5 * y + bt * wv + gw);
        vz.push(1.5 * y + bt * wv / 3.0 + gz);
    }
    (vw, vz)
}
