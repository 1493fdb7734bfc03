//! Checks of the blowup description against simulated trajectories:
//! breaking time and location, rate, cusp regularity, convergence to the
//! profile, bootstrap inequalities, Lagrangian trajectory bounds and
//! lifespan scaling.

mod blowup;
mod bootstrap;
mod lagrangian;
mod profile_fit;

pub use blowup::*;
pub use bootstrap::*;
pub use lagrangian::*;
pub use profile_fit::*;

use serde::{Deserialize, Serialize};

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for fewer than three points).
    pub slope_stderr: f64,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len().min(ys.len());
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = (0..n).map(|i| (ys[i] - intercept - slope * xs[i]).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit { slope, intercept, slope_stderr, points: n }
}

/// Time to breaking must be at least `(20 dx)^{2/3}` for the self-similar
/// core `(tau - t)^{3/2}` to span twenty grid cells.
pub fn resolvable_gap(local_dx: f64) -> f64 {
    (20.0 * local_dx).powf(2.0 / 3.0)
}
