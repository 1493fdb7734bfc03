use serde::{Deserialize, Serialize};

use super::{fit_line, resolvable_gap};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::renormalization::ModulationRecord;
use crate::solver::StateSummary;
use crate::transforms::RiemannState;

/// Records whose core is resolved by the grid.
pub fn resolvable_records(records: &[ModulationRecord]) -> Vec<ModulationRecord> {
    records.iter().copied().filter(|r| r.tau - r.t >= resolvable_gap(r.local_dx)).collect()
}

/// Removes jumps of a periodic coordinate so the sequence is continuous.
pub fn unwrap_positions(values: &[f64], period: Option<f64>) -> Vec<f64> {
    let Some(l) = period else { return values.to_vec() };
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            let prev = values[i - 1];
            let jump = v - prev;
            offset -= l * (jump / l).round();
        }
        out.push(v + offset);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupEstimate {
    pub t_star: f64,
    pub t_star_uncertainty: f64,
    pub x_star: f64,
    pub x_star_uncertainty: f64,
    pub records_used: usize,
    /// Times spanned by the fitted records.
    pub fit_window: (f64, f64),
}

fn extrapolate(records: &[ModulationRecord], xi: &[f64]) -> Result<(f64, f64)> {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let gap: Vec<f64> = records.iter().map(|r| r.tau - r.t).collect();
    let fit = fit_line(&t, &gap);
    if !(fit.slope < 0.0) {
        return Err(Error::NoBreaking(format!("tau - t is not decreasing (slope {})", fit.slope)));
    }
    let t_star = -fit.intercept / fit.slope;
    let xfit = fit_line(&t, xi);
    Ok((t_star, xfit.intercept + xfit.slope * t_star))
}

/// Breaking time and position by linear extrapolation of `tau - t` and
/// `xi` to the time where `tau - t` vanishes, over the last resolved decade
/// of `tau - t`. `period` unwraps `xi` on periodic grids.
pub fn estimate_blowup(records: &[ModulationRecord], period: Option<f64>) -> Result<BlowupEstimate> {
    let resolved = resolvable_records(records);
    if resolved.len() < 5 {
        return Err(Error::InsufficientHistory(format!(
            "need at least 5 records in the resolvable window, have {}",
            resolved.len()
        )));
    }
    let xi_all = unwrap_positions(&resolved.iter().map(|r| r.xi).collect::<Vec<_>>(), period);
    let min_gap = resolved.iter().map(|r| r.tau - r.t).fold(f64::INFINITY, f64::min);
    let mut idx: Vec<usize> = (0..resolved.len()).filter(|&i| resolved[i].tau - resolved[i].t <= 10.0 * min_gap).collect();
    if idx.len() < 5 {
        // fall back to the last five resolved records
        idx = (resolved.len() - 5..resolved.len()).collect();
    }
    let sel: Vec<ModulationRecord> = idx.iter().map(|&i| resolved[i]).collect();
    let xi: Vec<f64> = idx.iter().map(|&i| xi_all[i]).collect();
    let (t_star, x_star) = extrapolate(&sel, &xi)?;
    // spread over the two halves of the window
    let half = sel.len() / 2;
    let mut spread_t = 0.0f64;
    let mut spread_x = 0.0f64;
    for (a, b) in [(0, half + 1), (half, sel.len())] {
        if b - a >= 3 {
            let (ts, xs) = extrapolate(&sel[a..b], &xi[a..b])?;
            spread_t = spread_t.max((ts - t_star).abs());
            spread_x = spread_x.max((xs - x_star).abs());
        }
    }
    Ok(BlowupEstimate {
        t_star,
        t_star_uncertainty: spread_t,
        x_star,
        x_star_uncertainty: spread_x,
        records_used: sel.len(),
        fit_window: (sel[0].t, sel[sel.len() - 1].t),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatePoint {
    pub t: f64,
    pub product: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub t_star: f64,
    pub series: Vec<RatePoint>,
    pub min: f64,
    pub max: f64,
    /// Largest change of the product between consecutive points.
    pub max_jump: f64,
    pub bounds: (f64, f64),
    pub pass: bool,
}

/// `(T* - t) max |w_x|` on every resolvable summary, checked against
/// `bounds`.
pub fn rate_check(summaries: &[StateSummary], t_star: f64, bounds: (f64, f64)) -> RateReport {
    let series: Vec<RatePoint> = summaries
        .iter()
        .filter(|s| s.min_slope < 0.0 && -1.0 / s.min_slope >= resolvable_gap(s.local_dx) && s.t < t_star)
        .map(|s| RatePoint { t: s.t, product: (t_star - s.t) * s.min_slope.abs() })
        .collect();
    let min = series.iter().map(|p| p.product).fold(f64::INFINITY, f64::min);
    let max = series.iter().map(|p| p.product).fold(f64::NEG_INFINITY, f64::max);
    let max_jump = series.windows(2).map(|w| (w[1].product - w[0].product).abs()).fold(0.0, f64::max);
    let pass = !series.is_empty() && min >= bounds.0 && max <= bounds.1;
    RateReport { t_star, series, min, max, max_jump, bounds, pass }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspFit {
    pub exponent: f64,
    /// 95% confidence interval from the slope standard error.
    pub interval: (f64, f64),
    pub points: usize,
    /// Fitted range of `|x - x_c|`.
    pub window: (f64, f64),
    pub t: f64,
}

/// Samples per decade used by [`cusp_fit`].
const CUSP_SAMPLES_PER_DECADE: f64 = 32.0;

/// Increments `|w(center + side r) - w(center)|` sampled log-uniformly over
/// the cusp window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspSamples {
    pub window: (f64, f64),
    /// `(side, r, |increment|)` with side `-1` or `1`.
    pub pairs: Vec<(f64, f64, f64)>,
}

/// Samples of the cusp window `20 dx <= |x - center| <= min(1/2, L/8)`
/// (kept inside the box on non-periodic grids), on both sides.
pub fn cusp_samples(state: &RiemannState, center: f64) -> Result<CuspSamples> {
    let grid: &Grid = &state.grid;
    let dx = grid.metric_at(grid.q_of(center));
    let inner = 20.0 * dx;
    let box_len = match grid.period() {
        Some(l) => l,
        None => grid.x_max() - grid.x_min(),
    };
    let mut outer = 0.5f64.min(box_len / 8.0);
    if grid.period().is_none() {
        outer = outer.min((grid.x_max() - center).min(center - grid.x_min()) * 0.9);
    }
    let decades = (outer / inner).log10();
    if !(decades >= 1.5) {
        return Err(Error::InsufficientRange(format!(
            "cusp window [{inner:.3e}, {outer:.3e}] spans {decades:.2} decades, need 1.5"
        )));
    }
    let w_c = crate::grid::interpolate(grid, &state.w, center);
    let count = (decades * CUSP_SAMPLES_PER_DECADE).ceil() as usize + 1;
    let mut pairs = Vec::with_capacity(2 * count);
    for i in 0..count {
        let r = inner * (outer / inner).powf(i as f64 / (count - 1) as f64);
        for side in [-1.0, 1.0] {
            let v = crate::grid::interpolate(grid, &state.w, center + side * r);
            pairs.push((side, r, (v - w_c).abs()));
        }
    }
    Ok(CuspSamples { window: (inner, outer), pairs })
}

/// Hoelder exponent of `w` at `center`: least-squares slope of
/// `log |w(x) - w(center)|` against `log |x - center|` over the samples of
/// [`cusp_samples`].
pub fn cusp_fit(state: &RiemannState, center: f64) -> Result<CuspFit> {
    let samples = cusp_samples(state, center)?;
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for &(_, r, d) in &samples.pairs {
        if d > 0.0 {
            lx.push(r.ln());
            ly.push(d.ln());
        }
    }
    if lx.len() < 4 {
        return Err(Error::InsufficientRange("too few nonzero increments in the cusp window".into()));
    }
    let fit = fit_line(&lx, &ly);
    let half = 1.96 * fit.slope_stderr;
    Ok(CuspFit {
        exponent: fit.slope,
        interval: (fit.slope - half, fit.slope + half),
        points: lx.len(),
        window: samples.window,
        t: state.t,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanPoint {
    pub eps: f64,
    pub beta_star: f64,
    pub t_star: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    pub decades: f64,
    pub bounds: (f64, f64),
    pub pass: bool,
}

/// Least-squares slope of `log T*` against `log max(eps, beta*)`.
pub fn lifespan_regression(points: &[LifespanPoint]) -> Result<LifespanFit> {
    let usable: Vec<&LifespanPoint> = points
        .iter()
        .filter(|p| p.eps.max(p.beta_star) > 0.0 && p.t_star.is_finite() && p.t_star > 0.0)
        .collect();
    let amps: Vec<f64> = usable.iter().map(|p| p.eps.max(p.beta_star)).collect();
    let lo = amps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = amps.iter().copied().fold(0.0, f64::max);
    let decades = if usable.is_empty() { 0.0 } else { (hi / lo).log10() };
    if usable.len() < 5 || decades < 1.5 - 1e-9 {
        return Err(Error::InsufficientRange(format!(
            "lifespan regression needs >= 5 points over >= 1.5 decades, have {} over {:.2}",
            usable.len(),
            decades
        )));
    }
    let xs: Vec<f64> = amps.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.t_star.ln()).collect();
    let fit = fit_line(&xs, &ys);
    let bounds = (-1.1, -0.9);
    Ok(LifespanFit {
        slope: fit.slope,
        intercept: fit.intercept,
        points: usable.len(),
        decades,
        bounds,
        pass: fit.slope >= bounds.0 && fit.slope <= bounds.1,
    })
}
