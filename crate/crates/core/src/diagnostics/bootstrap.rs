use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::initial_data::SeedParams;
use crate::profile::{bracket, profile_derivatives};
use crate::renormalization::{third_derivative_at_origin, ModulationRates, SelfSimilarFrame};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapEntry {
    pub name: String,
    pub evaluated: usize,
    /// Largest `|quantity| / threshold` over the region.
    pub worst_ratio: f64,
    pub worst_y: f64,
    /// `1 - worst_ratio`; negative when violated.
    pub margin: f64,
    /// The region has no points inside the frame.
    pub skipped: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub s: f64,
    pub entries: Vec<BootstrapEntry>,
    /// Smallest margin among evaluated entries.
    pub worst_margin: f64,
    pub worst_entry: String,
    pub pass: bool,
}

struct Entry(BootstrapEntry);

impl Entry {
    fn new(name: &str) -> Self {
        Entry(BootstrapEntry {
            name: name.to_string(),
            evaluated: 0,
            worst_ratio: 0.0,
            worst_y: 0.0,
            margin: 1.0,
            skipped: true,
            pass: true,
        })
    }

    fn add(&mut self, y: f64, value: f64, bound: f64) {
        let e = &mut self.0;
        let ratio = value.abs() / bound;
        e.evaluated += 1;
        e.skipped = false;
        if e.evaluated == 1 || ratio > e.worst_ratio || ratio.is_nan() {
            e.worst_ratio = ratio;
            e.worst_y = y;
        }
        if !(ratio <= 1.0) {
            e.pass = false;
        }
        e.margin = 1.0 - e.worst_ratio;
    }
}

/// Evaluates the bootstrap inequalities of the self-similar variables and
/// the modulation on one frame. Every threshold is multiplied by
/// `threshold_scale` (1 for the nominal check).
pub fn bootstrap_check(
    frame: &SelfSimilarFrame,
    rates: &ModulationRates,
    params: &SeedParams,
    threshold_scale: f64,
) -> Result<BootstrapReport> {
    let k = threshold_scale;
    let s = frame.s();
    let m = params.m;
    let delta = params.delta;
    let ell = params.ell();
    let small = delta.powf(1.0 / 12.0);
    let far = 0.5 * (1.5 * s).exp();
    let es = (0.5 * s).exp();
    let rec = &frame.modulation;

    let mut tilde_near = Entry::new("w_tilde_near");
    let mut tilde_mid = Entry::new("w_tilde_middle");
    let mut d1_near = Entry::new("dw_tilde_near");
    let mut d1_mid = Entry::new("dw_tilde_middle");
    let mut d1_far = Entry::new("dw_far");
    let mut d2_near = Entry::new("d2w_tilde_near");
    let mut d2_out = Entry::new("d2w_outside_near");
    let mut d3_near = Entry::new("d3w_tilde_near");
    let mut d4_near = Entry::new("d4w_tilde_near");
    let mut shifted_sup = Entry::new("w_plus_kappa_sup");
    let mut d4_sup = Entry::new("d4w_sup");
    let mut d3_origin = Entry::new("d3w_tilde_origin");
    let mut z_sup = Entry::new("z_sup");
    let mut dz_sup = Entry::new("dz_sup");
    let mut d4z_sup = Entry::new("d4z_sup");
    let mut tau = Entry::new("tau_bound");
    let mut tau_dot = Entry::new("tau_dot_bound");
    let mut xi = Entry::new("xi_bound");
    let mut xi_dot = Entry::new("xi_dot_bound");
    let mut slope_sup = Entry::new("slope_sup_window");
    let mut slope_origin = Entry::new("slope_max_at_origin");

    for (i, &y) in frame.y.iter().enumerate() {
        let ay = y.abs();
        let d: Vec<f64> = (0..5).map(|j| frame.w[j][i]).collect();
        if ay <= ell {
            let bar = profile_derivatives(y)?;
            tilde_near.add(y, d[0] - bar[0], k * small * ell.powi(4));
            d1_near.add(y, d[1] - bar[1], k * small * ell.powi(3));
            d2_near.add(y, d[2] - bar[2], k * small * ell * ell);
            d3_near.add(y, d[3] - bar[3], k * small * ell);
            d4_near.add(y, d[4] - bar[4], k * small);
        } else {
            d2_out.add(y, d[2], k * m.powf(0.2));
            if ay <= far {
                let bar = profile_derivatives(y)?;
                tilde_mid.add(y, d[0] - bar[0], k * delta.powf(1.0 / 15.0) * bracket(y).powf(1.0 / 3.0));
                d1_mid.add(y, d[1] - bar[1], k * delta.powf(1.0 / 18.0) * bracket(y).powf(-2.0 / 3.0));
            }
        }
        if ay >= far {
            d1_far.add(y, d[1], k * 2.0 * (-s).exp());
        }
        shifted_sup.add(y, d[0] + es * rec.kappa, k * m * es);
        d4_sup.add(y, d[4], k * m);
        z_sup.add(y, frame.z[0][i], k * m * delta);
        dz_sup.add(y, frame.z[1][i], k * m * (-5.0 * s / 6.0).exp());
        d4z_sup.add(y, frame.z[4][i], k * m * (-2.0 * s / 3.0).exp());
    }
    let bar3 = profile_derivatives(0.0)?[3];
    d3_origin.add(0.0, third_derivative_at_origin(frame) - bar3, k * delta.powf(1.0 / 9.0));
    tau.add(0.0, rec.tau, k * 2.0 * m * delta.powf(4.0 / 3.0));
    tau_dot.add(0.0, rates.tau_dot, k * 2.0 * m * (-s / 3.0).exp());
    xi.add(0.0, rec.xi, k * 2.0 * m * delta);
    xi_dot.add(0.0, rates.xi_dot, k * 2.0 * m);

    // 99/100 <= sup |dW| <= 101/100, written as a deviation from 1
    let sup = frame.slope_sup();
    slope_sup.add(0.0, sup - 1.0, k * 0.01);
    // the extremum of |dW| sits at the origin
    let o = frame.origin();
    let at_origin = frame.w[1][o].abs();
    let (mut off, mut off_y) = (0.0f64, 0.0);
    for (i, &y) in frame.y.iter().enumerate() {
        if i != o && frame.w[1][i].abs() > off {
            off = frame.w[1][i].abs();
            off_y = y;
        }
    }
    slope_origin.add(off_y, (off - at_origin).max(0.0), k * 1e-6);

    let entries: Vec<BootstrapEntry> = [
        tilde_near, tilde_mid, d1_near, d1_mid, d1_far, d2_near, d2_out, d3_near, d4_near, shifted_sup, d4_sup,
        d3_origin, z_sup, dz_sup, d4z_sup, tau, tau_dot, xi, xi_dot, slope_sup, slope_origin,
    ]
    .into_iter()
    .map(|e| e.0)
    .collect();
    let mut worst_margin = f64::INFINITY;
    let mut worst_entry = String::new();
    for e in entries.iter().filter(|e| !e.skipped) {
        if e.margin < worst_margin || e.margin.is_nan() {
            worst_margin = e.margin;
            worst_entry = e.name.clone();
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(BootstrapReport { s, entries, worst_margin, worst_entry, pass })
}
