//! Spatial grids and finite-difference / interpolation operators.
//!
//! Every grid is parametrized by a continuous node coordinate `q`, with
//! nodes at integer `q`. Periodic grids are uniform; stretched grids use
//! `x = origin + core * sinh(stretch * eta)` with `eta` uniform on `[-1, 1]`,
//! which concentrates resolution near `origin`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridMap {
    Periodic { x_min: f64, length: f64 },
    Stretched { core: f64, stretch: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub map: GridMap,
    pub n: usize,
    /// Translation applied to the whole grid; advanced when the grid moves.
    pub origin: f64,
}

impl Grid {
    pub fn periodic(n: usize, x_min: f64, length: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::Argument(format!("periodic grid needs at least 16 nodes, got {n}")));
        }
        if !(length > 0.0 && length.is_finite() && x_min.is_finite()) {
            return Err(Error::Argument(format!("invalid periodic box [{x_min}, +{length})")));
        }
        Ok(Grid { map: GridMap::Periodic { x_min, length }, n, origin: 0.0 })
    }

    /// Stretched grid with spacing close to `core * asinh(half_width/core) * 2/(n-1)`
    /// near `origin` and total extent `origin +- half_width`.
    pub fn stretched(n: usize, core: f64, half_width: f64, origin: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::Argument(format!("stretched grid needs at least 16 nodes, got {n}")));
        }
        if !(core > 0.0 && half_width > core && origin.is_finite()) {
            return Err(Error::Argument(format!(
                "invalid stretched grid: core {core}, half width {half_width}"
            )));
        }
        let stretch = (half_width / core).asinh();
        Ok(Grid { map: GridMap::Stretched { core, stretch }, n, origin })
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.map, GridMap::Periodic { .. })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Period of a periodic grid.
    pub fn period(&self) -> Option<f64> {
        match self.map {
            GridMap::Periodic { length, .. } => Some(length),
            GridMap::Stretched { .. } => None,
        }
    }

    fn eta(&self, q: f64) -> f64 {
        -1.0 + 2.0 * q / (self.n - 1) as f64
    }

    /// Position at continuous node coordinate `q`.
    pub fn x_at(&self, q: f64) -> f64 {
        match self.map {
            GridMap::Periodic { x_min, length } => self.origin + x_min + q * length / self.n as f64,
            GridMap::Stretched { core, stretch } => self.origin + core * (stretch * self.eta(q)).sinh(),
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_at(i as f64)
    }

    /// `dx/dq` at continuous coordinate `q`.
    pub fn metric_at(&self, q: f64) -> f64 {
        match self.map {
            GridMap::Periodic { length, .. } => length / self.n as f64,
            GridMap::Stretched { core, stretch } => {
                core * stretch * (stretch * self.eta(q)).cosh() * 2.0 / (self.n - 1) as f64
            }
        }
    }

    /// Local spacing at node `i`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.metric_at(i as f64)
    }

    /// Smallest spacing on the grid.
    pub fn min_spacing(&self) -> f64 {
        match self.map {
            GridMap::Periodic { .. } => self.spacing(0),
            GridMap::Stretched { .. } => self.metric_at((self.n - 1) as f64 / 2.0),
        }
    }

    /// Continuous node coordinate of position `x`. Periodic grids wrap into
    /// `[0, n)`; stretched grids may return values outside `[0, n-1]`.
    pub fn q_of(&self, x: f64) -> f64 {
        match self.map {
            GridMap::Periodic { x_min, length } => {
                let r = (x - self.origin - x_min).rem_euclid(length);
                let q = r / length * self.n as f64;
                if q >= self.n as f64 {
                    0.0
                } else {
                    q
                }
            }
            GridMap::Stretched { core, stretch } => {
                let eta = ((x - self.origin) / core).asinh() / stretch;
                (eta + 1.0) * (self.n - 1) as f64 / 2.0
            }
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x(0)
    }

    pub fn x_max(&self) -> f64 {
        match self.map {
            GridMap::Periodic { x_min, length } => self.origin + x_min + length,
            GridMap::Stretched { .. } => self.x(self.n - 1),
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn metrics(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.spacing(i)).collect()
    }

    pub fn shifted(&self, dx: f64) -> Grid {
        Grid { origin: self.origin + dx, ..*self }
    }

    /// Signed displacement `x - x0`, taking the shortest periodic image.
    pub fn displacement(&self, x: f64, x0: f64) -> f64 {
        let d = x - x0;
        match self.period() {
            Some(l) => d - l * (d / l).round(),
            None => d,
        }
    }

    /// Index `i + k` on this grid; `None` outside a non-periodic grid.
    #[inline]
    pub fn offset(&self, i: usize, k: isize) -> Option<usize> {
        let j = i as isize + k;
        let n = self.n as isize;
        if self.is_periodic() {
            Some(j.rem_euclid(n) as usize)
        } else if (0..n).contains(&j) {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Index `i + k`, clamped to the grid ends for non-periodic grids.
    #[inline]
    pub fn offset_clamped(&self, i: usize, k: isize) -> usize {
        let j = i as isize + k;
        let n = self.n as isize;
        if self.is_periodic() {
            j.rem_euclid(n) as usize
        } else {
            j.clamp(0, n - 1) as usize
        }
    }

    /// Trapezoidal integral of nodal values.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.integrate_with_metrics(f, &self.metrics())
    }

    pub fn integrate_with_metrics(&self, f: &[f64], metrics: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (i, v) in f.iter().enumerate() {
            let w = if !self.is_periodic() && (i == 0 || i == self.n - 1) { 0.5 } else { 1.0 };
            sum += w * v * metrics[i];
        }
        sum
    }
}

/// Central first-derivative weights for half-widths 1..=4 (orders 2..=8).
const CENTRAL: [&[f64]; 4] = [
    &[0.5],
    &[2.0 / 3.0, -1.0 / 12.0],
    &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
    &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
];

/// First derivative in `q` at node `i`, eighth order in the interior.
pub fn dq_at(grid: &Grid, f: &[f64], i: usize) -> f64 {
    let half = if grid.is_periodic() { 4 } else { i.min(grid.n - 1 - i).min(4) };
    if half == 0 {
        // second-order one-sided at the box edge
        return if i == 0 {
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / 2.0
        } else {
            let n = grid.n;
            (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / 2.0
        };
    }
    let mut acc = 0.0;
    for (k, c) in CENTRAL[half - 1].iter().enumerate() {
        let k = k as isize + 1;
        let p = grid.offset_clamped(i, k);
        let m = grid.offset_clamped(i, -k);
        acc += c * (f[p] - f[m]);
    }
    acc
}

/// First derivative `df/dx` at all nodes.
pub fn derivative(grid: &Grid, f: &[f64]) -> Vec<f64> {
    derivative_with_metrics(grid, f, &grid.metrics())
}

/// [`derivative`] with precomputed `dx/dq` at the nodes.
pub fn derivative_with_metrics(grid: &Grid, f: &[f64], metrics: &[f64]) -> Vec<f64> {
    let n = grid.n;
    let c = CENTRAL[3];
    let mut out: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let d = if (4..n - 4).contains(&i) {
            c[0] * (f[i + 1] - f[i - 1])
                + c[1] * (f[i + 2] - f[i - 2])
                + c[2] * (f[i + 3] - f[i - 3])
                + c[3] * (f[i + 4] - f[i - 4])
        } else {
            dq_at(grid, f, i)
        };
        out.push(d / metrics[i]);
    }
    out
}

/// Derivatives of orders `1..=k` by repeated application of [`derivative`].
pub fn derivatives(grid: &Grid, f: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(k);
    let mut cur = f.to_vec();
    for _ in 0..k {
        cur = derivative(grid, &cur);
        out.push(cur.clone());
    }
    out
}

/// Quintic Lagrange interpolation of nodal values at position `x`.
/// Outside a non-periodic grid the end values are returned.
pub fn interpolate(grid: &Grid, f: &[f64], x: f64) -> f64 {
    let q = grid.q_of(x);
    interpolate_q(grid, f, q)
}

/// Quintic Lagrange interpolation at continuous node coordinate `q`.
pub fn interpolate_q(grid: &Grid, f: &[f64], q: f64) -> f64 {
    let n = grid.n;
    if !grid.is_periodic() {
        if q <= 0.0 {
            return f[0];
        }
        if q >= (n - 1) as f64 {
            return f[n - 1];
        }
    }
    let base = q.floor() as isize - 2;
    let base = if grid.is_periodic() { base } else { base.clamp(0, n as isize - 6) };
    let t = q - base as f64;
    let mut acc = 0.0;
    for j in 0..6 {
        let mut w = 1.0;
        for m in 0..6 {
            if m != j {
                w *= (t - m as f64) / (j as f64 - m as f64);
            }
        }
        let idx = if grid.is_periodic() {
            (base + j as isize).rem_euclid(n as isize) as usize
        } else {
            (base + j as isize) as usize
        };
        acc += w * f[idx];
    }
    acc
}

/// Lagrange interpolation on sorted nonuniform abscissae using the
/// `order + 1` nodes nearest to `x`. Outside the range the end values are
/// returned.
pub fn interpolate_sorted(xs: &[f64], ys: &[f64], x: f64, order: usize) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let m = (order + 1).min(n);
    let hi = xs.partition_point(|&v| v <= x);
    let start = (hi as isize - (m as isize) / 2).clamp(0, (n - m) as isize) as usize;
    let mut acc = 0.0;
    for j in start..start + m {
        let mut w = 1.0;
        for k in start..start + m {
            if k != j {
                w *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += w * ys[j];
    }
    acc
}

/// Finite-difference weights (Fornberg) for derivatives of orders
/// `0..=m` at `x0` from the abscissae `xs`. Returns `w[k][j]`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivatives of orders `0..=m` of tabulated data at every abscissa, from
/// local stencils of `width` points on sorted nonuniform abscissae.
pub fn sorted_derivatives(xs: &[f64], ys: &[f64], m: usize, width: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let width = width.min(n);
    let mut out = vec![vec![0.0; n]; m + 1];
    for i in 0..n {
        let start = (i as isize - (width as isize) / 2).clamp(0, (n - width) as isize) as usize;
        let w = fornberg_weights(xs[i], &xs[start..start + width], m);
        for k in 0..=m {
            out[k][i] = w[k].iter().zip(&ys[start..start + width]).map(|(a, b)| a * b).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_derivative_of_sine_is_accurate() {
        let g = Grid::periodic(128, 0.0, 2.0 * std::f64::consts::PI).unwrap();
        let f: Vec<f64> = g.positions().iter().map(|x| x.sin()).collect();
        let d = derivative(&g, &f);
        for (i, x) in g.positions().iter().enumerate() {
            assert!((d[i] - x.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn stretched_grid_inverse_map_roundtrips() {
        let g = Grid::stretched(101, 1e-3, 10.0, 0.5).unwrap();
        for i in 0..g.n {
            assert!((g.q_of(g.x(i)) - i as f64).abs() < 1e-9);
        }
        assert!((g.x(0) - (0.5 - 10.0)).abs() < 1e-9);
        assert!((g.x(100) - 10.5).abs() < 1e-9);
    }

    #[test]
    fn stretched_derivative_of_smooth_function() {
        let g = Grid::stretched(801, 0.05, 5.0, 0.0).unwrap();
        let f: Vec<f64> = g.positions().iter().map(|x| (0.7 * x).sin()).collect();
        let d = derivative(&g, &f);
        for i in 4..g.n - 4 {
            assert!((d[i] - 0.7 * (0.7 * g.x(i)).cos()).abs() < 1e-7, "node {i}");
        }
    }

    #[test]
    fn interpolation_reproduces_quintics() {
        let g = Grid::stretched(64, 0.3, 4.0, 0.0).unwrap();
        let p = |x: f64| 1.0 + x - 0.5 * x.powi(3) + 0.1 * x.powi(5);
        let q: Vec<f64> = (0..g.n).map(|i| p(i as f64)).collect();
        for k in 0..50 {
            let t = 0.37 + k as f64 * 1.21;
            assert!((interpolate_q(&g, &q, t) - p(t)).abs() < 1e-7 * p(t).abs().max(1.0));
        }
    }

    #[test]
    fn fornberg_weights_differentiate_polynomials() {
        let xs: [f64; 7] = [-0.3, 0.0, 0.2, 0.7, 1.1, 1.6, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(4) - x).collect();
        let d = sorted_derivatives(&xs, &ys, 4, 7);
        for (i, x) in xs.iter().enumerate() {
            assert!((d[1][i] - (4.0 * x.powi(3) - 1.0)).abs() < 1e-9);
            assert!((d[2][i] - 12.0 * x * x).abs() < 1e-8);
            assert!((d[4][i] - 24.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sorted_interpolation_hits_nodes() {
        let xs = [0.0, 0.1, 0.5, 1.2, 2.0, 3.5, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((interpolate_sorted(&xs, &ys, *x, 5) - y).abs() < 1e-12);
        }
        assert!((interpolate_sorted(&xs, &ys, 1.7, 5) - 2.89).abs() < 1e-12);
    }
}
