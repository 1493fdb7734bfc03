use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::interpolate_sorted;
use crate::initial_data::SeedParams;
use crate::renormalization::{transport_velocities, ModulationRates, SelfSimilarFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    W,
    Z,
}

/// Transport velocity sampled on each frame, interpolated in `y` and
/// linearly in `s`.
pub struct VelocityField {
    s: Vec<f64>,
    y: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    limit: Vec<f64>,
}

impl VelocityField {
    pub fn new(frames: &[SelfSimilarFrame], rates: &[ModulationRates], family: Family) -> Result<Self> {
        if frames.len() < 2 || frames.len() != rates.len() {
            return Err(Error::Precondition(format!(
                "need at least 2 frames with matching rates, got {} frames and {} rates",
                frames.len(),
                rates.len()
            )));
        }
        let mut out = VelocityField { s: Vec::new(), y: Vec::new(), v: Vec::new(), limit: Vec::new() };
        for (f, r) in frames.iter().zip(rates) {
            let (vw, vz) = transport_velocities(f, r);
            out.s.push(f.s());
            out.y.push(f.y.clone());
            out.v.push(match family {
                Family::W => vw,
                Family::Z => vz,
            });
            out.limit.push(f.y_limit);
        }
        Ok(out)
    }

    /// Field `V(y, s) = 3y/2` on `[s0, s1]`, used to validate the integrator.
    pub fn linear(s0: f64, s1: f64, y_limit: f64) -> Self {
        let y = crate::renormalization::frame_points(y_limit);
        let v: Vec<f64> = y.iter().map(|y| 1.5 * y).collect();
        VelocityField { s: vec![s0, s1], y: vec![y.clone(), y], v: vec![v.clone(), v], limit: vec![y_limit; 2] }
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.s[0], self.s[self.s.len() - 1])
    }

    fn bracket(&self, s: f64) -> (usize, f64) {
        let n = self.s.len();
        let mut k = match self.s.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        k = k.min(n - 2);
        let theta = ((s - self.s[k]) / (self.s[k + 1] - self.s[k])).clamp(0.0, 1.0);
        (k, theta)
    }

    /// Largest `|y|` covered at time `s`.
    pub fn limit_at(&self, s: f64) -> f64 {
        let (k, _) = self.bracket(s);
        self.limit[k].min(self.limit[k + 1])
    }

    pub fn at(&self, y: f64, s: f64) -> f64 {
        let (k, theta) = self.bracket(s);
        let a = interpolate_sorted(&self.y[k], &self.v[k], y, 5);
        let b = interpolate_sorted(&self.y[k + 1], &self.v[k + 1], y, 5);
        (1.0 - theta) * a + theta * b
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagrangianPath {
    pub y0: f64,
    pub family: Family,
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    /// Largest `|phi| / ((|y0| + 8 M delta^{-1/2}) e^{3(s - s0)/2})`.
    pub upper_ratio: f64,
    pub upper_pass: bool,
    /// The escape bounds apply (family `W` and `|y0| >= ell`).
    pub lower_applicable: bool,
    /// Smallest `|phi| / (|y0| e^{(s - s0)/5})`.
    pub lower_ratio: f64,
    pub lower_pass: bool,
    /// `int <phi>^{-2/3} ds` along the path.
    pub integral: f64,
    /// `10 log(1/ell)`.
    pub integral_bound: f64,
    pub integral_pass: bool,
    /// The path left the frame range before the last frame.
    pub truncated: bool,
}

/// Integrates `d phi/ds = V(phi, s)` from the first frame by RK4 with
/// `substeps` steps per frame interval and evaluates the trajectory
/// bounds.
pub fn trace_trajectory(
    field: &VelocityField,
    params: &SeedParams,
    y0: f64,
    family: Family,
    substeps: usize,
) -> Result<LagrangianPath> {
    let (s_start, s_end) = field.s_range();
    if y0.abs() > field.limit_at(s_start) {
        return Err(Error::Precondition(format!("y0 = {y0} lies outside the frame at s = {s_start}")));
    }
    let ell = params.ell();
    let offset = 8.0 * params.m / params.delta.sqrt();
    let mut s = vec![s_start];
    let mut phi = vec![y0];
    let mut truncated = false;
    for k in 0..field.s.len() - 1 {
        let ds = (field.s[k + 1] - field.s[k]) / substeps as f64;
        for j in 0..substeps {
            let t = field.s[k] + j as f64 * ds;
            let p = *phi.last().unwrap();
            let k1 = field.at(p, t);
            let k2 = field.at(p + 0.5 * ds * k1, t + 0.5 * ds);
            let k3 = field.at(p + 0.5 * ds * k2, t + 0.5 * ds);
            let k4 = field.at(p + ds * k3, t + ds);
            let next = p + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let t_next = if j + 1 == substeps { field.s[k + 1] } else { t + ds };
            if !(next.abs() <= field.limit_at(t_next.min(s_end))) {
                truncated = true;
                break;
            }
            s.push(t_next);
            phi.push(next);
        }
        if truncated {
            break;
        }
    }
    let lower_applicable = family == Family::W && y0.abs() >= ell;
    let mut upper_ratio = 0.0f64;
    let mut lower_ratio = f64::INFINITY;
    let mut integral = 0.0;
    for i in 0..s.len() {
        let grow = s[i] - s_start;
        upper_ratio = upper_ratio.max(phi[i].abs() / ((y0.abs() + offset) * (1.5 * grow).exp()));
        if lower_applicable {
            lower_ratio = lower_ratio.min(phi[i].abs() / (y0.abs() * (grow / 5.0).exp()));
        }
        if i > 0 {
            let f = |p: f64| (1.0 + p * p).powf(-1.0 / 3.0);
            integral += 0.5 * (s[i] - s[i - 1]) * (f(phi[i]) + f(phi[i - 1]));
        }
    }
    let integral_bound = 10.0 * (1.0 / ell).ln();
    Ok(LagrangianPath {
        y0,
        family,
        s,
        phi,
        upper_ratio,
        upper_pass: upper_ratio <= 1.0,
        lower_applicable,
        lower_ratio,
        lower_pass: !lower_applicable || lower_ratio >= 1.0 - 1e-12,
        integral,
        integral_bound,
        integral_pass: !lower_applicable || integral <= integral_bound,
        truncated,
    })
}
