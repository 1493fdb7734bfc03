//! Changes of variables between surface/velocity, depth/velocity and
//! Riemann invariants, plus Sobolev seminorms on periodic grids.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::topography::Topography;

/// Physical parameters of the shallow water model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Rest depth `H`.
    pub h_rest: f64,
    /// Nonlinearity `eps`.
    pub eps: f64,
    /// Topography parameter `beta*`.
    pub beta_star: f64,
    /// Smallest admissible depth.
    pub h_min: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { h_rest: 1.0, eps: 1.0, beta_star: 0.0, h_min: 0.01 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h_rest > 0.0
            && self.h_rest.is_finite()
            && self.eps >= 0.0
            && self.eps <= 1.0
            && self.beta_star >= 0.0
            && self.beta_star <= 1.0
            && self.h_min > 0.0
            && self.h_min < self.h_rest;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "model parameters out of range: H = {}, eps = {}, beta* = {}, h_min = {}",
                self.h_rest, self.eps, self.beta_star, self.h_min
            )))
        }
    }

    /// Riemann invariant `w` of the fluid at rest: `3 sqrt(H) / 2`.
    pub fn rest_w(&self) -> f64 {
        1.5 * self.h_rest.sqrt()
    }
}

/// Surface elevation `zeta` and depth-averaged velocity `vbar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalState {
    pub grid: Grid,
    pub t: f64,
    pub zeta: Vec<f64>,
    pub vbar: Vec<f64>,
}

/// Total depth `h` and velocity `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthState {
    pub grid: Grid,
    pub t: f64,
    pub h: Vec<f64>,
    pub u: Vec<f64>,
}

/// Riemann invariants `w = 3(u + 2 sqrt h)/4`, `z = 3(u - 2 sqrt h)/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannState {
    pub grid: Grid,
    pub t: f64,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
}

impl RiemannState {
    /// Characteristic speeds `(w + z/3, w/3 + z)` at node `i`.
    pub fn speeds(&self, i: usize) -> (f64, f64) {
        characteristic_speeds(self.w[i], self.z[i])
    }

    /// `sup |w|`.
    pub fn w_sup(&self) -> f64 {
        self.w.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
pub fn characteristic_speeds(w: f64, z: f64) -> (f64, f64) {
    (w + z / 3.0, w / 3.0 + z)
}

#[inline]
pub fn riemann_from_depth(h: f64, u: f64) -> (f64, f64) {
    let sigma = 2.0 * h.sqrt();
    (0.75 * (u + sigma), 0.75 * (u - sigma))
}

#[inline]
pub fn depth_from_riemann(w: f64, z: f64) -> (f64, f64) {
    let u = (w + z) * (2.0 / 3.0);
    let sigma = (w - z) * (2.0 / 3.0);
    (0.25 * sigma * sigma, u)
}

fn same_len(a: usize, b: usize, grid: &Grid) -> Result<()> {
    if a != grid.n || b != grid.n {
        return Err(Error::Argument(format!(
            "field lengths {a}, {b} do not match grid size {}",
            grid.n
        )));
    }
    Ok(())
}

/// `h = H + eps zeta - beta* b`, `u = eps vbar`.
pub fn to_depth(state: &PhysicalState, topo: &Topography, params: &ModelParams) -> Result<DepthState> {
    same_len(state.zeta.len(), state.vbar.len(), &state.grid)?;
    let mut h = Vec::with_capacity(state.grid.n);
    let mut u = Vec::with_capacity(state.grid.n);
    for i in 0..state.grid.n {
        let x = state.grid.x(i);
        let depth = params.h_rest + params.eps * state.zeta[i] - params.beta_star * topo.value(x);
        if !(depth >= params.h_min) {
            return Err(Error::Admissibility { node: i, x, h: depth, h_min: params.h_min });
        }
        h.push(depth);
        u.push(params.eps * state.vbar[i]);
    }
    Ok(DepthState { grid: state.grid, t: state.t, h, u })
}

/// Inverse of [`to_depth`]; requires `eps > 0`.
pub fn from_depth(state: &DepthState, topo: &Topography, params: &ModelParams) -> Result<PhysicalState> {
    same_len(state.h.len(), state.u.len(), &state.grid)?;
    if params.eps <= 0.0 {
        return Err(Error::Argument("surface variables are undefined for eps = 0".into()));
    }
    let mut zeta = Vec::with_capacity(state.grid.n);
    let mut vbar = Vec::with_capacity(state.grid.n);
    for i in 0..state.grid.n {
        let x = state.grid.x(i);
        zeta.push((state.h[i] - params.h_rest + params.beta_star * topo.value(x)) / params.eps);
        vbar.push(state.u[i] / params.eps);
    }
    Ok(PhysicalState { grid: state.grid, t: state.t, zeta, vbar })
}

/// Riemann invariants of a depth state; rejects depths below `h_min`.
pub fn to_riemann(state: &DepthState, h_min: f64) -> Result<RiemannState> {
    same_len(state.h.len(), state.u.len(), &state.grid)?;
    let mut w = Vec::with_capacity(state.grid.n);
    let mut z = Vec::with_capacity(state.grid.n);
    for i in 0..state.grid.n {
        if !(state.h[i] >= h_min) {
            return Err(Error::Admissibility { node: i, x: state.grid.x(i), h: state.h[i], h_min });
        }
        let (a, b) = riemann_from_depth(state.h[i], state.u[i]);
        w.push(a);
        z.push(b);
    }
    Ok(RiemannState { grid: state.grid, t: state.t, w, z })
}

/// Depth and velocity from Riemann invariants; rejects `w <= z`.
pub fn from_riemann(state: &RiemannState) -> Result<DepthState> {
    same_len(state.w.len(), state.z.len(), &state.grid)?;
    let mut h = Vec::with_capacity(state.grid.n);
    let mut u = Vec::with_capacity(state.grid.n);
    for i in 0..state.grid.n {
        let gap = state.w[i] - state.z[i];
        if !(gap > 0.0) {
            return Err(Error::Vacuum { node: i, x: state.grid.x(i), gap });
        }
        let (a, b) = depth_from_riemann(state.w[i], state.z[i]);
        h.push(a);
        u.push(b);
    }
    Ok(DepthState { grid: state.grid, t: state.t, h, u })
}

/// Homogeneous Sobolev seminorm `||d^k f||_{L^2}` of a periodic field,
/// computed spectrally.
pub fn sobolev_seminorm(field: &[f64], order: u32, grid: &Grid) -> Result<f64> {
    if order > 6 {
        return Err(Error::Argument(format!("seminorm order {order} exceeds 6")));
    }
    let length = grid
        .period()
        .ok_or_else(|| Error::Argument("sobolev seminorm requires a periodic grid".into()))?;
    if field.len() != grid.n {
        return Err(Error::Argument(format!(
            "field length {} does not match grid size {}",
            field.len(),
            grid.n
        )));
    }
    let n = grid.n;
    let mut buf: Vec<Complex<f64>> = field.iter().map(|v| Complex::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut sum = 0.0;
    for (m, c) in buf.iter().enumerate() {
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let k = 2.0 * std::f64::consts::PI * signed / length;
        let amp = c.norm() / n as f64;
        sum += k.abs().powi(2 * order as i32) * amp * amp;
    }
    Ok((length * sum).sqrt())
}

/// Combined seminorm `(|w|^2 + |z|^2)^{1/2}` of a Riemann state.
pub fn riemann_seminorm(state: &RiemannState, order: u32) -> Result<f64> {
    let a = sobolev_seminorm(&state.w, order, &state.grid)?;
    let b = sobolev_seminorm(&state.z, order, &state.grid)?;
    Ok(a.hypot(b))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingEntry {
    pub eps: f64,
    pub beta_star: f64,
    pub amplitude: f64,
    pub seminorm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub order: u32,
    pub entries: Vec<ScalingEntry>,
    /// `max ratio / min ratio` over entries with positive amplitude.
    pub ratio_spread: f64,
    /// `log10(max amplitude / min amplitude)`.
    pub decades: f64,
    pub pass: bool,
}

/// Checks that `||d^5 (w0, z0)||` scales like `max(eps, beta*)` for fixed
/// surface data, velocity data and bottom shape.
pub fn moser_scaling_check(
    zeta0: &[f64],
    vbar0: &[f64],
    topo: &Topography,
    grid: &Grid,
    base: &ModelParams,
    pairs: &[(f64, f64)],
) -> Result<ScalingReport> {
    let order = 5;
    let mut entries = Vec::with_capacity(pairs.len());
    for &(eps, beta_star) in pairs {
        let params = ModelParams { eps, beta_star, ..*base };
        let phys = PhysicalState { grid: *grid, t: 0.0, zeta: zeta0.to_vec(), vbar: vbar0.to_vec() };
        let depth = to_depth(&phys, topo, &params)?;
        let riemann = to_riemann(&depth, params.h_min)?;
        let seminorm = riemann_seminorm(&riemann, order)?;
        let amplitude = eps.max(beta_star);
        let ratio = if amplitude > 0.0 { seminorm / amplitude } else { f64::NAN };
        entries.push(ScalingEntry { eps, beta_star, amplitude, seminorm, ratio });
    }
    let active: Vec<&ScalingEntry> = entries.iter().filter(|e| e.amplitude > 0.0).collect();
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    let (mut amin, mut amax) = (f64::INFINITY, 0.0f64);
    for e in &active {
        rmin = rmin.min(e.ratio);
        rmax = rmax.max(e.ratio);
        amin = amin.min(e.amplitude);
        amax = amax.max(e.amplitude);
    }
    let ratio_spread = if active.is_empty() { f64::NAN } else { rmax / rmin };
    let decades = if active.is_empty() { 0.0 } else { (amax / amin).log10() };
    let pass = !active.is_empty() && ratio_spread < 3.0 && decades >= 2.0 - 1e-9;
    Ok(ScalingReport { order, entries, ratio_spread, decades, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_state_invariants() {
        let (w, z) = riemann_from_depth(1.0, 0.0);
        assert_eq!((w, z), (1.5, -1.5));
        let (h, u) = depth_from_riemann(w, z);
        assert_eq!((h, u), (1.0, 0.0));
    }

    #[test]
    fn seminorm_of_sine() {
        let g = Grid::periodic(64, 0.0, 2.0 * std::f64::consts::PI).unwrap();
        let f: Vec<f64> = g.positions().iter().map(|x| x.sin()).collect();
        for k in [1, 3, 5] {
            let s = sobolev_seminorm(&f, k, &g).unwrap();
            assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        }
    }
}
