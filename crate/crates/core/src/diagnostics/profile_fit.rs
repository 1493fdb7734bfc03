use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::profile::rescaled_profile;
use crate::renormalization::SelfSimilarFrame;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub s: f64,
    /// `sup |W - W_nu|` over the measured range.
    pub distance: f64,
    /// Measured range `|y| <= y_max`.
    pub y_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub nu: f64,
    pub series: Vec<ConvergencePoint>,
    pub final_distance: f64,
    pub threshold: f64,
    /// Non-increasing over the final unit of `s`.
    pub decreasing: bool,
    pub pass: bool,
}

/// Sup distance between each frame and the rescaled profile `W_nu` over
/// `|y| <= min(y_max, frame range)`.
pub fn convergence_check(frames: &[SelfSimilarFrame], nu: f64, y_max: f64, threshold: f64) -> Result<ConvergenceReport> {
    let mut series = Vec::with_capacity(frames.len());
    for f in frames {
        let lim = y_max.min(f.y_limit);
        let mut d = 0.0f64;
        for (y, w) in f.y.iter().zip(&f.w[0]) {
            if y.abs() <= lim {
                d = d.max((w - rescaled_profile(*y, nu)?).abs());
            }
        }
        series.push(ConvergencePoint { s: f.s(), distance: d, y_max: lim });
    }
    let final_distance = series.last().map_or(f64::NAN, |p| p.distance);
    let decreasing = match series.last() {
        Some(last) => {
            let tail: Vec<f64> = series.iter().filter(|p| p.s >= last.s - 1.0).map(|p| p.distance).collect();
            tail.windows(2).all(|w| w[1] <= w[0])
        }
        None => false,
    };
    let pass = decreasing && final_distance < threshold;
    Ok(ConvergenceReport { nu, series, final_distance, threshold, decreasing, pass })
}
