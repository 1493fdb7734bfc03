//! The stable self-similar shock profile: the odd real root of
//! `W^3 + W + y = 0`, its derivatives, rescalings and pointwise bounds.

use serde::Serialize;

use crate::error::{Error, Result};

/// Highest derivative order returned by [`profile_derivatives`].
pub const MAX_DERIVATIVE: usize = 5;

/// Japanese bracket `(1 + y^2)^{1/2}`.
pub fn bracket(y: f64) -> f64 {
    y.hypot(1.0)
}

fn check_finite(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("profile argument is not finite: {y}")))
    }
}

/// Real root of the cubic, evaluated without cancellation.
///
/// With `A = cbrt(r + |y|/2)` and `B = 1/(3A)` the Cardano root is
/// `B - A = -|y| / (A^2 + B^2 + 1/3)`, which is well conditioned for all y.
fn cubic_root(y: f64) -> f64 {
    let a = y.abs();
    if a == 0.0 {
        return 0.0;
    }
    let half = 0.5 * a;
    let r = if a < 1e100 {
        (half * half + 1.0 / 27.0).sqrt()
    } else {
        half
    };
    let big = (r + half).cbrt();
    let small = 1.0 / (3.0 * big);
    let mut w = -a / (big * big + small * small + 1.0 / 3.0);
    // One Newton step removes the last couple of ulps.
    let f = w * w * w + w + a;
    w -= f / (3.0 * w * w + 1.0);
    if y < 0.0 {
        -w
    } else {
        w
    }
}

/// Profile value at `y`.
pub fn profile(y: f64) -> Result<f64> {
    check_finite(y)?;
    Ok(cubic_root(y))
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Profile value and derivatives of orders `0..=5` at `y`, from implicit
/// differentiation of `(1 + 3 W^2) W' = -1`.
pub fn profile_derivatives(y: f64) -> Result<[f64; MAX_DERIVATIVE + 1]> {
    check_finite(y)?;
    let mut d = [0.0; MAX_DERIVATIVE + 1];
    d[0] = cubic_root(y);
    // g = 1 + 3 W^2 and its derivatives
    let mut g = [0.0; MAX_DERIVATIVE + 1];
    g[0] = 1.0 + 3.0 * d[0] * d[0];
    d[1] = -1.0 / g[0];
    for n in 1..MAX_DERIVATIVE {
        let mut sq = 0.0;
        for j in 0..=n {
            sq += binomial(n, j) * d[j] * d[n - j];
        }
        g[n] = 3.0 * sq;
        let mut acc = 0.0;
        for k in 1..=n {
            acc += binomial(n, k) * g[k] * d[n + 1 - k];
        }
        d[n + 1] = -acc / g[0];
    }
    Ok(d)
}

/// Single derivative of order `k <= 5`.
pub fn profile_derivative(y: f64, k: usize) -> Result<f64> {
    if k > MAX_DERIVATIVE {
        return Err(Error::Argument(format!(
            "derivative order {k} exceeds {MAX_DERIVATIVE}"
        )));
    }
    Ok(profile_derivatives(y)?[k])
}

fn check_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("rescaling parameter must be positive, got {nu}")))
    }
}

/// Member of the profile family with third derivative `nu` at the origin:
/// `(nu/6)^{-1/2} W((nu/6)^{1/2} y)`.
pub fn rescaled_profile(y: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    let a = (nu / 6.0).sqrt();
    Ok(profile(a * y)? / a)
}

/// Derivatives `0..=5` of the rescaled profile.
pub fn rescaled_derivatives(y: f64, nu: f64) -> Result<[f64; MAX_DERIVATIVE + 1]> {
    check_nu(nu)?;
    let a = (nu / 6.0).sqrt();
    let mut d = profile_derivatives(a * y)?;
    let mut factor = 1.0 / a;
    for v in d.iter_mut() {
        *v *= factor;
        factor *= a;
    }
    Ok(d)
}

/// Residual of the cubic, scaled by `max(1, |y|)` so that it measures
/// relative accuracy at large arguments.
pub fn cubic_residual(y: f64, w: f64) -> f64 {
    (w.mul_add(w * w, w) + y).abs() / y.abs().max(1.0)
}

/// Residual of the steady self-similar equation `-W/2 + (3y/2 + W) W' = 0`.
pub fn ode_residual(y: f64, w: f64, dw: f64) -> f64 {
    (-0.5 * w + (1.5 * y + w) * dw).abs()
}

/// `n` points log-spaced in `[y_min, y_max]`, mirrored to negative values,
/// with the origin included. Total length `2n + 1`, sorted ascending.
pub fn symmetric_log_points(n: usize, y_min: f64, y_max: f64) -> Vec<f64> {
    let mut pos = Vec::with_capacity(n);
    let (l0, l1) = (y_min.ln(), y_max.ln());
    for i in 0..n {
        let frac = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        pos.push((l0 + frac * (l1 - l0)).exp());
    }
    let mut out: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    out.push(0.0);
    out.extend(pos);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub evaluated: usize,
    pub violations: usize,
    /// Largest value of `|quantity| / bound` over evaluated points.
    pub worst_ratio: f64,
    pub worst_y: f64,
}

impl BoundCheck {
    fn new(name: &str) -> Self {
        BoundCheck {
            name: name.to_string(),
            evaluated: 0,
            violations: 0,
            worst_ratio: 0.0,
            worst_y: 0.0,
        }
    }

    fn record(&mut self, y: f64, ratio: f64, violated: bool) {
        self.evaluated += 1;
        if violated {
            self.violations += 1;
        }
        if ratio > self.worst_ratio || self.evaluated == 1 {
            self.worst_ratio = ratio;
            self.worst_y = y;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeConstant {
    pub order: usize,
    /// Smallest `C` with `|W^(k)| <= C <y>^{1/3 - k}` on the evaluated points.
    pub fitted: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub points: usize,
    pub checks: Vec<BoundCheck>,
    pub constants: Vec<DerivativeConstant>,
    pub pass: bool,
}

/// Ceiling on the fitted constants `C_k`, k = 3..=5. The fifth derivative
/// at the origin is exactly -360, so the ceiling has to exceed that.
pub const DERIVATIVE_CONSTANT_LIMIT: f64 = 1000.0;

/// Relative slack allowed on pointwise bounds that are attained with
/// equality (for instance `|W'(0)| = 1`).
const BOUND_SLACK: f64 = 1e-12;

/// Evaluates the pointwise profile bounds on the given points.
pub fn check_profile_bounds(ys: &[f64]) -> Result<BoundReport> {
    let mut value = BoundCheck::new("abs_value_le_bracket_1/3");
    let mut slope = BoundCheck::new("abs_slope_le_bracket_-2/3");
    let mut curv = BoundCheck::new("abs_second_le_bracket_-5/3");
    let mut range = BoundCheck::new("slope_in_[-1,0]");
    let mut window = BoundCheck::new("far_slope_window_[1/4,7/20]");
    let mut fitted = [0.0f64; 3];
    for &y in ys {
        let d = profile_derivatives(y)?;
        let b = bracket(y);
        let r0 = d[0].abs() / b.powf(1.0 / 3.0);
        value.record(y, r0, r0 > 1.0 + BOUND_SLACK);
        let r1 = d[1].abs() / b.powf(-2.0 / 3.0);
        slope.record(y, r1, r1 > 1.0 + BOUND_SLACK);
        let r2 = d[2].abs() / b.powf(-5.0 / 3.0);
        curv.record(y, r2, r2 > 1.0 + BOUND_SLACK);
        let out = d[1] < -1.0 - BOUND_SLACK || d[1] > 0.0;
        range.record(y, d[1].abs(), out);
        if y.abs() >= 100.0 {
            let scaled = d[1].abs() * b.powf(2.0 / 3.0);
            let out = !(0.25..=0.35).contains(&scaled);
            window.record(y, scaled / 0.35, out);
        }
        for k in 3..=5 {
            let c = d[k].abs() * b.powf(k as f64 - 1.0 / 3.0);
            fitted[k - 3] = fitted[k - 3].max(c);
        }
    }
    let constants: Vec<DerivativeConstant> = (3..=5)
        .map(|k| DerivativeConstant {
            order: k,
            fitted: fitted[k - 3],
            limit: DERIVATIVE_CONSTANT_LIMIT,
            pass: fitted[k - 3] < DERIVATIVE_CONSTANT_LIMIT,
        })
        .collect();
    let checks = vec![value, slope, curv, range, window];
    let pass = checks.iter().all(|c| c.violations == 0) && constants.iter().all(|c| c.pass);
    Ok(BoundReport {
        points: ys.len(),
        checks,
        constants,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_at_origin() {
        let d = profile_derivatives(0.0).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], -1.0);
        assert_eq!(d[2], 0.0);
        assert!((d[3] - 6.0).abs() < 1e-14);
        assert_eq!(d[4], 0.0);
    }

    #[test]
    fn non_finite_is_domain_error() {
        assert!(matches!(profile(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(profile(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn symmetric_points_are_sorted_and_odd() {
        let p = symmetric_log_points(10, 1e-3, 1e3);
        assert_eq!(p.len(), 21);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        for i in 0..10 {
            assert_eq!(p[i], -p[20 - i]);
        }
    }
}
