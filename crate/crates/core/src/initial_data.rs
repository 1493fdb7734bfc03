//! Self-similar seed data near a prescribed shock profile: construction,
//! admissibility checks and conversion to physical variables.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate_sorted, sorted_derivatives, Grid};
use crate::jet::Jet;
use crate::profile::{bracket, profile_derivatives};
use crate::topography::Topography;
use crate::transforms::{depth_from_riemann, ModelParams, PhysicalState, RiemannState};

/// Number of derivative orders stored per seed sample (0..=4).
pub const SEED_ORDERS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedParams {
    /// Large constant `M`.
    pub m: f64,
    /// Small time scale `delta`; the seed is posed at `t = -delta`.
    pub delta: f64,
    /// Constant `kappa0` added to `w`.
    pub kappa0: f64,
}

impl SeedParams {
    pub fn new(m: f64, delta: f64, kappa0: f64) -> Result<Self> {
        let p = SeedParams { m, delta, kappa0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.m > std::f64::consts::E && self.m.is_finite()) {
            return Err(Error::Config(format!("M must exceed e, got {}", self.m)));
        }
        if !self.kappa0.is_finite() {
            return Err(Error::Config("kappa0 must be finite".into()));
        }
        Ok(())
    }

    /// Parameters for which the seed construction has been exercised.
    pub fn in_supported_window(&self) -> bool {
        (1e-3..=1e-1).contains(&self.delta) && (10.0..=1e3).contains(&self.m)
    }

    /// Initial self-similar time `s0 = -log(delta)`.
    pub fn s0(&self) -> f64 {
        -self.delta.ln()
    }

    /// Near-field radius `ell = (log M)^{-2}`.
    pub fn ell(&self) -> f64 {
        self.m.ln().powi(-2)
    }

    /// Inner radius of the far field, `delta^{-3/2} / 2`.
    pub fn far_radius(&self) -> f64 {
        0.5 * self.delta.powf(-1.5)
    }
}

fn bump_factor(t: f64) -> Jet {
    // exp(-1/t) for t > 0
    (Jet::variable(t).recip() * -1.0).exp()
}

/// Smooth cutoff equal to 1 on `|r| <= 1/2` and 0 on `|r| >= 1`, with
/// derivatives.
pub fn cutoff(r: f64) -> Jet {
    let a = r.abs();
    if a <= 0.5 {
        return Jet::constant(1.0);
    }
    if a >= 1.0 {
        return Jet::constant(0.0);
    }
    // both factors are expanded in their own variable; convert to `a`
    let inner = bump_factor(1.0 - a).chain_linear(-1.0);
    let outer = bump_factor(a - 0.5);
    let phi = inner / (inner + outer);
    if r < 0.0 {
        phi.chain_linear(-1.0)
    } else {
        phi
    }
}

/// Smooth localized perturbation `a (c3 y^3 + c4 y^4) exp(-y^2/2)` added to
/// the seed. It vanishes to third order at the origin, so the constraints
/// at `y = 0` are untouched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedPerturbation {
    pub amplitude: f64,
    pub c3: f64,
    pub c4: f64,
}

impl SeedPerturbation {
    pub fn random(amplitude: f64, rng_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        SeedPerturbation { amplitude, c3: rng.gen_range(-1.0..1.0), c4: rng.gen_range(-1.0..1.0) }
    }

    fn jet(&self, y: f64) -> Jet {
        let x = Jet::variable(y);
        let poly = x * x * x * self.c3 + x * x * x * x * self.c4;
        (poly * ((x * x) * -0.5).exp()).scale(self.amplitude)
    }
}

fn w0_jet(y: f64, far_scale: f64, perturbation: Option<&SeedPerturbation>) -> Jet {
    let d = profile_derivatives(y).expect("finite argument");
    let wbar = Jet::from_derivatives(&d);
    let mut j = wbar * cutoff(y / far_scale).chain_linear(1.0 / far_scale);
    if let Some(p) = perturbation {
        j = j + p.jet(y);
    }
    j
}

fn z0_jet(y: f64, params: &SeedParams) -> Jet {
    let amp = 0.25 * params.m * params.delta;
    let rate = params.delta.powf(1.5);
    let u = Jet::variable(rate * y);
    let ep = u.exp();
    let em = (u * -1.0).exp();
    let cosh = (ep + em) * 0.5;
    ((cosh * cosh).recip() * amp).chain_linear(rate)
}

/// Samples `(y, [f, f', f'', f''', f''''])` of a seed component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedField {
    pub y: Vec<f64>,
    pub d: Vec<[f64; SEED_ORDERS]>,
}

impl SeedField {
    fn from_jets(y: &[f64], f: impl Fn(f64) -> Jet) -> Self {
        let d = y
            .iter()
            .map(|&v| {
                let j = f(v);
                let mut out = [0.0; SEED_ORDERS];
                for (k, o) in out.iter_mut().enumerate() {
                    *o = j.derivative(k);
                }
                out
            })
            .collect();
        SeedField { y: y.to_vec(), d }
    }

    /// Builds a field from sampled values only; derivatives come from
    /// local finite-difference stencils.
    pub fn from_samples(y: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if y.len() != values.len() || y.len() < 9 {
            return Err(Error::Argument("seed samples need matching lengths and at least 9 points".into()));
        }
        if !y.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Argument("seed abscissae must be strictly increasing".into()));
        }
        let der = sorted_derivatives(&y, &values, SEED_ORDERS - 1, 9);
        let d = (0..y.len())
            .map(|i| {
                let mut out = [0.0; SEED_ORDERS];
                for k in 0..SEED_ORDERS {
                    out[k] = der[k][i];
                }
                out[0] = values[i];
                out
            })
            .collect();
        Ok(SeedField { y, d })
    }

    pub fn values(&self) -> Vec<f64> {
        self.d.iter().map(|v| v[0]).collect()
    }

    fn column(&self, k: usize) -> Vec<f64> {
        self.d.iter().map(|v| v[k]).collect()
    }

    /// Interpolated value; outside the sampled range the end value is held.
    pub fn value_at(&self, y: f64) -> f64 {
        interpolate_sorted(&self.y, &self.column(0), y, 5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedShape {
    /// Profile times a smooth cutoff at scale `far_scale`, plus an optional
    /// perturbation. Evaluated analytically.
    Cutoff { far_scale: f64, perturbation: Option<SeedPerturbation> },
    /// Sampled data, evaluated by interpolation.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarSeed {
    pub params: SeedParams,
    pub shape: SeedShape,
    pub w0: SeedField,
    pub z0: SeedField,
}

/// Region-adapted sample points: uniform on the near field, 128 per decade
/// beyond it, out to `y_max`.
pub fn seed_points(params: &SeedParams, y_max: f64) -> Vec<f64> {
    let ell = params.ell();
    let near = 200;
    let mut pos: Vec<f64> = (1..=near).map(|i| ell * i as f64 / near as f64).collect();
    let decades = (y_max / ell).log10().max(0.0);
    let count = (decades * 128.0).ceil() as usize;
    for i in 1..=count {
        pos.push(ell * 10f64.powf(decades * i as f64 / count as f64));
    }
    let mut y: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    y.push(0.0);
    y.extend(pos);
    y
}

/// Samples the cutoff profile `W0 = Wbar * phi(y / far_scale)`.
pub fn build_w0(params: &SeedParams, far_scale: f64) -> Result<SeedField> {
    params.validate()?;
    if !(far_scale >= 2.0 * params.far_radius()) {
        return Err(Error::Construction(format!(
            "cutoff scale {far_scale} must be at least {} so that the profile is untouched inside the far field",
            2.0 * params.far_radius()
        )));
    }
    let y = seed_points(params, 2.0 * far_scale);
    let field = SeedField::from_jets(&y, |v| w0_jet(v, far_scale, None));
    let bound = params.delta;
    let r = params.far_radius();
    for (yi, d) in field.y.iter().zip(&field.d) {
        if yi.abs() >= r && d[1].abs() > bound {
            return Err(Error::Construction(format!(
                "far-field slope {} exceeds {bound} at y = {yi} for cutoff scale {far_scale}",
                d[1].abs()
            )));
        }
    }
    Ok(field)
}

/// Samples `Z0 = (M delta / 4) sech^2(delta^{3/2} y)`.
pub fn build_z0(params: &SeedParams, y: &[f64]) -> Result<SeedField> {
    params.validate()?;
    Ok(SeedField::from_jets(y, |v| z0_jet(v, params)))
}

/// Smallest cutoff scale (to bisection accuracy) for which [`build_w0`]
/// succeeds.
pub fn minimal_far_scale(params: &SeedParams) -> Result<f64> {
    let mut hi = 2.0 * params.far_radius();
    let mut tries = 0;
    while build_w0(params, hi).is_err() {
        hi *= 2.0;
        tries += 1;
        if tries > 40 {
            return Err(Error::Construction("no admissible cutoff scale found".into()));
        }
    }
    if tries == 0 {
        return Ok(hi);
    }
    let mut lo = hi / 2.0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if build_w0(params, mid).is_ok() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

impl SelfSimilarSeed {
    /// Cutoff seed with the given scale (or the smallest admissible one).
    pub fn cutoff(params: SeedParams, far_scale: Option<f64>, perturbation: Option<SeedPerturbation>) -> Result<Self> {
        let far_scale = match far_scale {
            Some(f) => f,
            None => minimal_far_scale(&params)?,
        };
        let base = build_w0(&params, far_scale)?;
        let w0 = match &perturbation {
            None => base,
            Some(p) => SeedField::from_jets(&base.y, |v| w0_jet(v, far_scale, Some(p))),
        };
        let z0 = build_z0(&params, &w0.y)?;
        Ok(SelfSimilarSeed { params, shape: SeedShape::Cutoff { far_scale, perturbation }, w0, z0 })
    }

    pub fn far_scale(&self) -> Option<f64> {
        match self.shape {
            SeedShape::Cutoff { far_scale, .. } => Some(far_scale),
            SeedShape::Tabulated => None,
        }
    }

    /// Extent in `y` outside of which `W0` vanishes (or is held constant).
    pub fn support(&self) -> f64 {
        match self.shape {
            SeedShape::Cutoff { far_scale, .. } => far_scale,
            SeedShape::Tabulated => self.w0.y.last().copied().unwrap_or(0.0),
        }
    }

    pub fn w0_at(&self, y: f64) -> f64 {
        match &self.shape {
            SeedShape::Cutoff { far_scale, perturbation } => w0_jet(y, *far_scale, perturbation.as_ref()).value(),
            SeedShape::Tabulated => self.w0.value_at(y),
        }
    }

    pub fn z0_at(&self, y: f64) -> f64 {
        match &self.shape {
            SeedShape::Cutoff { .. } => z0_jet(y, &self.params).value(),
            SeedShape::Tabulated => self.z0.value_at(y),
        }
    }

    /// Writes `seed.json` (header), `w0.csv` and `z0.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let header = SeedHeader { params: self.params, shape: self.shape.clone(), samples: self.w0.y.len() };
        std::fs::write(dir.join("seed.json"), serde_json::to_string_pretty(&header)? + "\n")?;
        for (name, field) in [("w0.csv", &self.w0), ("z0.csv", &self.z0)] {
            let mut wtr = csv::Writer::from_path(dir.join(name))?;
            wtr.write_record(["y", "value"])?;
            for (y, d) in field.y.iter().zip(&field.d) {
                wtr.write_record([y.to_string(), d[0].to_string()])?;
            }
            wtr.flush()?;
        }
        Ok(())
    }

    /// Reads a seed written by [`SelfSimilarSeed::write`] as tabulated data.
    pub fn read(dir: &Path) -> Result<Self> {
        let header: SeedHeader = serde_json::from_str(&std::fs::read_to_string(dir.join("seed.json"))?)?;
        header.params.validate()?;
        let read = |name: &str| -> Result<SeedField> {
            let mut rdr = csv::Reader::from_path(dir.join(name))?;
            let (mut y, mut v) = (Vec::new(), Vec::new());
            for rec in rdr.records() {
                let rec = rec?;
                let parse = |s: &str| {
                    s.trim().parse::<f64>().map_err(|e| Error::Argument(format!("{name}: bad number `{s}`: {e}")))
                };
                y.push(parse(&rec[0])?);
                v.push(parse(&rec[1])?);
            }
            SeedField::from_samples(y, v)
        };
        Ok(SelfSimilarSeed { params: header.params, shape: SeedShape::Tabulated, w0: read("w0.csv")?, z0: read("z0.csv")? })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeedHeader {
    params: SeedParams,
    shape: SeedShape,
    samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedCheck {
    pub name: String,
    pub evaluated: usize,
    /// Worst value of `|quantity| / threshold`.
    pub worst_ratio: f64,
    pub worst_y: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedReport {
    pub s0: f64,
    pub ell: f64,
    pub far_scale: Option<f64>,
    pub in_supported_window: bool,
    pub checks: Vec<SeedCheck>,
    pub pass: bool,
}

struct Accum {
    check: SeedCheck,
}

impl Accum {
    fn new(name: &str, threshold: f64) -> Self {
        Accum {
            check: SeedCheck {
                name: name.to_string(),
                evaluated: 0,
                worst_ratio: 0.0,
                worst_y: 0.0,
                threshold,
                pass: true,
            },
        }
    }

    fn add(&mut self, y: f64, value: f64, bound: f64) {
        let ratio = value.abs() / bound;
        let c = &mut self.check;
        c.evaluated += 1;
        if ratio > c.worst_ratio || c.evaluated == 1 {
            c.worst_ratio = ratio;
            c.worst_y = y;
        }
        if !(ratio <= 1.0) {
            c.pass = false;
        }
    }
}

/// Checks every initial admissibility inequality on the seed samples.
pub fn verify_seed(seed: &SelfSimilarSeed) -> Result<SeedReport> {
    let p = &seed.params;
    p.validate()?;
    let delta = p.delta;
    let m = p.m;
    let ell = p.ell();
    let r = p.far_radius();
    let small = delta.powf(1.0 / 12.0);
    let sqrt_delta = delta.sqrt();

    let mut constraints = Accum::new("constraints_at_origin", 1e-10);
    let mut tilde_near = Accum::new("w_tilde_near", 0.5 * small * ell.powi(4));
    let mut tilde_mid = Accum::new("w_tilde_middle", small);
    let mut d1_near = Accum::new("dw_tilde_near", 0.5 * small * ell.powi(3));
    let mut d1_mid = Accum::new("dw_tilde_middle", small);
    let mut d1_far = Accum::new("dw_far", delta);
    let mut d2_near = Accum::new("d2w_tilde_near", 0.5 * small * ell * ell);
    let mut d2_out = Accum::new("d2w_outside_near", m.powf(0.1));
    let mut d3_near = Accum::new("d3w_tilde_near", 0.5 * small * ell);
    let mut d4_near = Accum::new("d4w_tilde_near", 0.25 * small);
    let mut d4_sup = Accum::new("d4w_sup", 0.5 * m);
    let mut shifted_sup = Accum::new("w_plus_kappa_sup", 0.5 * m / sqrt_delta);
    let mut d3_origin = Accum::new("d3w_tilde_origin", 0.25 * delta.powf(1.0 / 9.0));
    let mut z_sup = Accum::new("z_sup", 0.5 * m * delta);
    let mut dz_sup = Accum::new("dz_sup", 0.5 * m * delta.powf(5.0 / 6.0));
    let mut d4z_sup = Accum::new("d4z_sup", 0.5 * m * delta.powf(2.0 / 3.0));

    let kappa_shift = p.kappa0 / sqrt_delta;
    for (y, d) in seed.w0.y.iter().zip(&seed.w0.d) {
        let y = *y;
        let bar = profile_derivatives(y)?;
        let tilde: Vec<f64> = (0..SEED_ORDERS).map(|k| d[k] - bar[k]).collect();
        let ay = y.abs();
        if y == 0.0 {
            constraints.add(y, d[0], 1e-10);
            constraints.add(y, d[1] + 1.0, 1e-10);
            constraints.add(y, d[2], 1e-10);
            d3_origin.add(y, tilde[3], d3_origin.check.threshold);
        }
        if ay <= ell {
            tilde_near.add(y, tilde[0], tilde_near.check.threshold);
            d1_near.add(y, tilde[1], d1_near.check.threshold);
            d2_near.add(y, tilde[2], d2_near.check.threshold);
            d3_near.add(y, tilde[3], d3_near.check.threshold);
            d4_near.add(y, tilde[4], d4_near.check.threshold);
        } else {
            d2_out.add(y, d[2], d2_out.check.threshold);
            if ay <= r {
                tilde_mid.add(y, tilde[0], small * bracket(y).powf(1.0 / 3.0));
                d1_mid.add(y, tilde[1], small * bracket(y).powf(-2.0 / 3.0));
            }
        }
        if ay >= r {
            d1_far.add(y, d[1], delta);
        }
        d4_sup.add(y, d[4], d4_sup.check.threshold);
        shifted_sup.add(y, d[0] + kappa_shift, shifted_sup.check.threshold);
    }
    for (y, d) in seed.z0.y.iter().zip(&seed.z0.d) {
        z_sup.add(*y, d[0], z_sup.check.threshold);
        dz_sup.add(*y, d[1], dz_sup.check.threshold);
        d4z_sup.add(*y, d[4], d4z_sup.check.threshold);
    }
    let checks: Vec<SeedCheck> = [
        constraints, tilde_near, tilde_mid, d1_near, d1_mid, d1_far, d2_near, d2_out, d3_near, d4_near,
        d4_sup, shifted_sup, d3_origin, z_sup, dz_sup, d4z_sup,
    ]
    .into_iter()
    .map(|a| {
        let mut c = a.check;
        if c.evaluated == 0 {
            c.pass = false;
        }
        c
    })
    .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(SeedReport {
        s0: p.s0(),
        ell,
        far_scale: seed.far_scale(),
        in_supported_window: p.in_supported_window(),
        checks,
        pass,
    })
}

/// Maps the seed to physical Riemann invariants and surface variables at
/// `t = -delta`: `w = delta^{1/2} W0(x delta^{-3/2}) + kappa0`,
/// `z = Z0(x delta^{-3/2})`.
pub fn seed_to_physical(
    seed: &SelfSimilarSeed,
    topo: &Topography,
    model: &ModelParams,
    grid: &Grid,
) -> Result<(RiemannState, PhysicalState)> {
    model.validate()?;
    let p = &seed.params;
    let scale = p.delta.powf(-1.5);
    let amp = p.delta.sqrt();
    let mut w = Vec::with_capacity(grid.n);
    let mut z = Vec::with_capacity(grid.n);
    let mut zeta = Vec::with_capacity(grid.n);
    let mut vbar = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        let y = x * scale;
        let wi = amp * seed.w0_at(y) + p.kappa0;
        let zi = seed.z0_at(y);
        let (h, u) = depth_from_riemann(wi, zi);
        if !(h >= model.h_min) || wi <= zi {
            return Err(Error::Admissibility { node: i, x, h, h_min: model.h_min });
        }
        if model.eps > 0.0 {
            zeta.push((h - model.h_rest + model.beta_star * topo.value(x)) / model.eps);
            vbar.push(u / model.eps);
        }
        w.push(wi);
        z.push(zi);
    }
    if model.eps <= 0.0 {
        return Err(Error::Argument("the seed needs eps > 0 to define surface variables".into()));
    }
    let t = -p.delta;
    Ok((RiemannState { grid: *grid, t, w, z }, PhysicalState { grid: *grid, t, zeta, vbar }))
}
