//! Single runs: seed or data construction, integration, modulation,
//! diagnostics and verdict.

use serde::{Deserialize, Serialize};

use super::config::{DataKind, RunConfig};
use crate::diagnostics::*;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial_data::*;
use crate::renormalization::*;
use crate::solver::*;
use crate::topography::Topography;
use crate::transforms::{to_riemann, DepthState, RiemannState};

/// Tolerance on `dW/dy (0) + 1` for every frame.
pub const SLOPE_CONSTRAINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictItem {
    pub id: String,
    pub name: String,
    pub evaluated: bool,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub items: Vec<VerdictItem>,
    /// Every evaluated item passes.
    pub pass: bool,
}

impl Verdict {
    pub fn new(items: Vec<VerdictItem>) -> Self {
        let pass = items.iter().filter(|i| i.evaluated).all(|i| i.pass);
        Verdict { items, pass }
    }

    pub fn item(&self, id: &str) -> Option<&VerdictItem> {
        self.items.iter().find(|i| i.id == id)
    }
}

fn item(id: &str, name: &str, pass: bool, detail: String) -> VerdictItem {
    VerdictItem { id: id.into(), name: name.into(), evaluated: true, pass, detail }
}

fn skipped(id: &str, name: &str, why: &str) -> VerdictItem {
    VerdictItem { id: id.into(), name: name.into(), evaluated: false, pass: false, detail: why.into() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub s: f64,
    pub w0: f64,
    pub slope_error: f64,
    pub curvature: f64,
    /// `|d^3 W(0)| h_y^2`, the resolution of the curvature constraint.
    pub curvature_tol: f64,
    pub slope_sup: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleComparison {
    pub t_star_exact: f64,
    pub x_star_exact: f64,
    /// Sup error of `w` against characteristics at the cusp snapshot.
    pub sup_error: f64,
    pub error_time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspResult {
    pub snapshot: usize,
    pub center: f64,
    pub fit: CuspFit,
}

/// Everything a run produces in memory.
#[derive(Debug, Clone)]
pub struct RunResults {
    pub config: RunConfig,
    pub seed: Option<SelfSimilarSeed>,
    pub seed_report: Option<SeedReport>,
    pub topography: Topography,
    pub initial: RiemannState,
    pub trajectory: Trajectory,
    /// Modulation of each snapshot, `None` where extraction failed.
    pub records: Vec<Option<ModulationRecord>>,
    /// Snapshot indices of the frames.
    pub frame_snapshots: Vec<usize>,
    pub frames: Vec<SelfSimilarFrame>,
    pub frame_rates: Vec<ModulationRates>,
    pub blowup: Option<BlowupEstimate>,
    pub rate: Option<RateReport>,
    pub rate_tight: Option<RateReport>,
    pub cusp: Option<CuspResult>,
    pub nu: Option<NuEstimate>,
    pub convergence: Option<ConvergenceReport>,
    pub constraints: Vec<ConstraintRow>,
    pub bootstrap: Vec<BootstrapReport>,
    pub lagrangian: Vec<LagrangianPath>,
    pub oracle: Option<OracleComparison>,
    /// Stage errors that did not abort the run.
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

/// Grid, initial state and automatic grid velocity for a configuration.
pub fn initial_state(cfg: &RunConfig, seed: Option<&SelfSimilarSeed>, topo: &Topography) -> Result<(RiemannState, f64)> {
    let model = cfg.model_params();
    let n = cfg.grid.nodes;
    match cfg.data.kind {
        DataKind::Seed => {
            let seed = seed.ok_or_else(|| Error::Precondition("seed runs need a seed".into()))?;
            let p = &seed.params;
            let core = p.delta.powf(1.5);
            let half = 1.25 * seed.support() * core + 1.0;
            let grid = Grid::stretched(n, core, half, 0.0)?;
            let (state, _) = seed_to_physical(seed, topo, &model, &grid)?;
            // follow the steepest point: w + z/3 there
            let velocity = p.kappa0 + seed.z0_at(0.0) / 3.0;
            Ok((state, velocity))
        }
        DataKind::Oracle => {
            let data = cfg.oracle_data()?;
            let grid = Grid::periodic(n, cfg.grid.x_min, cfg.grid.length)?;
            let w = grid.positions().iter().map(|x| data.value(*x)).collect();
            Ok((RiemannState { grid, t: 0.0, w, z: vec![cfg.data.oracle_z; n] }, 0.0))
        }
        DataKind::Physical => {
            let grid = Grid::periodic(n, cfg.grid.x_min, cfg.grid.length)?;
            let k = cfg.data.wavenumber * 2.0 * std::f64::consts::PI / cfg.grid.length;
            let (mut h, mut u) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for x in grid.positions() {
                let phase = (k * (x - cfg.grid.x_min)).sin();
                h.push(model.h_rest + model.eps * cfg.data.zeta_amplitude * phase - model.beta_star * topo.value(x));
                u.push(model.eps * cfg.data.vbar_amplitude * phase + cfg.model.background_current);
            }
            let state = to_riemann(&DepthState { grid, t: 0.0, h, u }, model.h_min)?;
            Ok((state, 0.0))
        }
    }
}

/// Builds (or reads) the seed of a seed run.
pub fn build_seed(cfg: &RunConfig) -> Result<SelfSimilarSeed> {
    if !cfg.seed.files.is_empty() {
        return SelfSimilarSeed::read(std::path::Path::new(&cfg.seed.files));
    }
    let p = cfg.seed_params()?;
    let far = cfg.seed.far_scale_factor * minimal_far_scale(&p)?;
    let pert = (cfg.seed.perturbation != 0.0).then(|| SeedPerturbation::random(cfg.seed.perturbation, cfg.seed.perturbation_rng));
    SelfSimilarSeed::cutoff(p, Some(far), pert)
}

/// Starting points of the Lagrangian checks: magnitudes log-spaced over
/// `[1e-3, y_max]`, both signs.
pub fn lagrangian_starts(count: usize, y_max: f64) -> Vec<f64> {
    let half = count.div_ceil(2).max(1);
    let mut out = Vec::with_capacity(count);
    for k in 0..half {
        let frac = if half > 1 { k as f64 / (half - 1) as f64 } else { 0.0 };
        let r = 1e-3 * (y_max / 1e-3).powf(frac);
        out.push(r);
        if out.len() < count {
            out.push(-r);
        }
    }
    out
}

fn is_resolvable(r: &ModulationRecord) -> bool {
    r.tau - r.t >= resolvable_gap(r.local_dx)
}

/// Runs the whole pipeline in memory. Errors carry the failing stage.
pub fn compute(cfg: &RunConfig) -> Result<RunResults> {
    cfg.validate()?;
    let topo = cfg.topography().map_err(|e| e.in_stage("config"))?;
    let model = cfg.model_params();
    let mut notes = Vec::new();

    let (seed, seed_report) = if cfg.data.kind == DataKind::Seed {
        let seed = build_seed(cfg).map_err(|e| e.in_stage("seed"))?;
        let report = verify_seed(&seed).map_err(|e| e.in_stage("seed"))?;
        (Some(seed), Some(report))
    } else {
        (None, None)
    };
    let (initial, auto_velocity) = initial_state(cfg, seed.as_ref(), &topo).map_err(|e| e.in_stage("initial-data"))?;
    let solver_cfg = cfg.solver_config(auto_velocity);
    let trajectory = run(&initial, &topo, &model, &solver_cfg).map_err(|e| e.in_stage("solver"))?;

    let records: Vec<Option<ModulationRecord>> = trajectory.snapshots.iter().map(|s| extract_modulation(&s.state).ok()).collect();
    let valid: Vec<(usize, ModulationRecord)> = records.iter().enumerate().filter_map(|(i, r)| r.map(|r| (i, r))).collect();
    let valid_records: Vec<ModulationRecord> = valid.iter().map(|v| v.1).collect();
    let period = initial.grid.period();

    let blowup = match estimate_blowup(&valid_records, period) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(e.in_stage("blowup").to_string());
            None
        }
    };
    let rate = blowup.as_ref().map(|b| rate_check(&trajectory.history, b.t_star, (0.5, 2.0)));
    let rate_tight = match (cfg.data.kind, &blowup) {
        (DataKind::Oracle, Some(b)) => Some(rate_check(&trajectory.history, b.t_star, (0.99, 1.01))),
        _ => None,
    };

    // the penultimate snapshot is the last one taken on schedule
    let cusp = if trajectory.snapshots.len() >= 2 {
        let k = trajectory.snapshots.len() - 2;
        match records[k] {
            Some(r) => match cusp_fit(&trajectory.snapshots[k].state, r.xi) {
                Ok(fit) => Some(CuspResult { snapshot: k, center: r.xi, fit }),
                Err(e) => {
                    notes.push(e.in_stage("cusp").to_string());
                    None
                }
            },
            None => None,
        }
    } else {
        None
    };

    // frames inside the resolvable window
    let mut frame_snapshots = Vec::new();
    let mut frames = Vec::new();
    let mut frame_rates = Vec::new();
    for (j, (i, r)) in valid.iter().enumerate() {
        if !is_resolvable(r) {
            continue;
        }
        let frame = to_frame(&trajectory.snapshots[*i].state, r, &topo).map_err(|e| e.in_stage("frames"))?;
        let rates = modulation_rates(&valid_records, j).map_err(|e| e.in_stage("frames"))?;
        frame_snapshots.push(*i);
        frames.push(frame);
        frame_rates.push(rates);
    }

    let constraints: Vec<ConstraintRow> = frames
        .iter()
        .map(|f| {
            let o = f.origin();
            let w0 = f.w[0][o];
            let slope_error = f.w[1][o] + 1.0;
            let curvature = f.w[2][o];
            let curvature_tol = third_derivative_at_origin(f).abs() * f.core_h * f.core_h;
            let pass = w0 == 0.0 && slope_error.abs() <= SLOPE_CONSTRAINT_TOL && curvature.abs() <= curvature_tol;
            ConstraintRow { s: f.s(), w0, slope_error, curvature, curvature_tol, slope_sup: f.slope_sup(), pass }
        })
        .collect();

    let nu = match estimate_nu(&frames) {
        Ok(n) => Some(n),
        Err(e) => {
            notes.push(e.in_stage("nu").to_string());
            None
        }
    };
    let convergence = match &nu {
        Some(n) if n.nu > 0.0 => Some(
            convergence_check(&frames, n.nu, cfg.checks.convergence_y_max, cfg.checks.convergence_threshold)
                .map_err(|e| e.in_stage("convergence"))?,
        ),
        _ => None,
    };

    let mut bootstrap = Vec::new();
    let mut lagrangian = Vec::new();
    if let Some(seed) = &seed {
        let p = &seed.params;
        for (f, r) in frames.iter().zip(&frame_rates) {
            bootstrap.push(bootstrap_check(f, r, p, 1.0).map_err(|e| e.in_stage("bootstrap"))?);
        }
        if frames.len() >= 2 {
            let y_max = (0.5 * frames[0].y_limit).min(1e4);
            for family in [Family::W, Family::Z] {
                let field = VelocityField::new(&frames, &frame_rates, family).map_err(|e| e.in_stage("lagrangian"))?;
                for y0 in lagrangian_starts(cfg.checks.lagrangian_points, y_max) {
                    let path = trace_trajectory(&field, p, y0, family, cfg.checks.lagrangian_substeps)
                        .map_err(|e| e.in_stage("lagrangian"))?;
                    lagrangian.push(path);
                }
            }
        }
    }

    // compared on the last scheduled snapshot, independent of the cusp fit
    let oracle = match cfg.data.kind {
        DataKind::Oracle if trajectory.snapshots.len() >= 2 => {
            let k = trajectory.snapshots.len() - 2;
            let data = cfg.oracle_data()?;
            let zbar = cfg.data.oracle_z;
            let t_star_exact = data.breaking_time();
            let x_star_exact = data.steepest_point() + t_star_exact * (data.kappa() + zbar / 3.0);
            let state = &trajectory.snapshots[k].state;
            let mut err = 0.0f64;
            for i in 0..state.grid.n {
                let exact = burgers_exact(&data, zbar, state.grid.x(i), state.t).map_err(|e| e.in_stage("oracle"))?;
                err = err.max((state.w[i] - exact).abs());
            }
            Some(OracleComparison { t_star_exact, x_star_exact, sup_error: err, error_time: state.t })
        }
        _ => None,
    };

    let mut results = RunResults {
        config: cfg.clone(),
        seed,
        seed_report,
        topography: topo,
        initial,
        trajectory,
        records,
        frame_snapshots,
        frames,
        frame_rates,
        blowup,
        rate,
        rate_tight,
        cusp,
        nu,
        convergence,
        constraints,
        bootstrap,
        lagrangian,
        oracle,
        notes,
        verdict: Verdict::new(Vec::new()),
    };
    results.verdict = judge(&results);
    Ok(results)
}

fn periodic_distance(a: f64, b: f64, period: Option<f64>) -> f64 {
    match period {
        Some(l) => {
            let d = (a - b) / l;
            (d - d.round()).abs() * l
        }
        None => (a - b).abs(),
    }
}

/// Theorem items (I)-(V) and the auxiliary checks.
pub fn judge(r: &RunResults) -> Verdict {
    let cfg = &r.config;
    let kind = cfg.data.kind;
    let mut items = Vec::new();
    let period = r.initial.grid.period();

    // (I) breaking time and location
    items.push(match (&r.blowup, kind) {
        (None, _) => item("I", "blowup_time_and_location", false, "no blowup estimate".into()),
        (Some(b), DataKind::Seed) => {
            let p = r.seed.as_ref().map(|s| s.params).expect("seed run");
            let keep = 1.0 - cfg.checks.bound_margin;
            let t_bound = 2.0 * p.m * p.delta.powf(4.0 / 3.0);
            let x_bound = 2.0 * p.m * p.delta;
            let pass = b.t_star <= keep * t_bound && b.x_star.abs() <= keep * x_bound;
            item(
                "I",
                "blowup_time_and_location",
                pass,
                format!("T* = {:e} (bound {:e}), x* = {:e} (bound {:e}), margin {}", b.t_star, t_bound, b.x_star, x_bound, cfg.checks.bound_margin),
            )
        }
        (Some(b), DataKind::Oracle) => match &r.oracle {
            Some(o) => {
                let dt = (b.t_star - o.t_star_exact).abs();
                let dx = periodic_distance(b.x_star, o.x_star_exact, period);
                item(
                    "I",
                    "blowup_time_and_location",
                    dt <= 1e-3 && dx <= 1e-3,
                    format!("T* = {} (exact {}), x* = {} (exact {})", b.t_star, o.t_star_exact, b.x_star, o.x_star_exact),
                )
            }
            None => item("I", "blowup_time_and_location", false, "no oracle comparison".into()),
        },
        (Some(b), DataKind::Physical) => VerdictItem {
            id: "I".into(),
            name: "blowup_time_and_location".into(),
            evaluated: false,
            pass: false,
            detail: format!("T* = {}, x* = {} (no reference bound for physical data)", b.t_star, b.x_star),
        },
    });

    // (II) sup bound on w
    items.push(match &r.seed {
        Some(seed) => {
            let sup = r.trajectory.history.iter().map(|h| h.w_sup).fold(0.0, f64::max);
            item("II", "w_sup_bound", sup <= seed.params.m, format!("max |w| = {sup} (bound M = {})", seed.params.m))
        }
        None => skipped("II", "w_sup_bound", "only defined for seed runs"),
    });

    // (III) blowup rate
    items.push(match &r.rate {
        Some(rate) if kind == DataKind::Physical => skipped(
            "III",
            "blowup_rate",
            &format!("product in [{}, {}]; not asserted for physical data", rate.min, rate.max),
        ),
        Some(rate) => {
            let mut pass = rate.pass;
            let mut detail = format!("product in [{}, {}] over {} points", rate.min, rate.max, rate.series.len());
            if let Some(t) = &r.rate_tight {
                pass &= t.pass;
                detail += &format!("; oracle band [{}, {}]", t.bounds.0, t.bounds.1);
            }
            item("III", "blowup_rate", pass, detail)
        }
        None => item("III", "blowup_rate", false, "no blowup estimate".into()),
    });

    // (IV) cusp exponent
    items.push(match (&r.cusp, kind) {
        (_, DataKind::Physical) => skipped("IV", "cusp_exponent", "not asserted for physical data"),
        (Some(c), _) => {
            let dev = (c.fit.exponent - 1.0 / 3.0).abs();
            item(
                "IV",
                "cusp_exponent",
                dev <= cfg.checks.cusp_tolerance,
                format!("exponent {} (95% CI [{}, {}]) at t = {}", c.fit.exponent, c.fit.interval.0, c.fit.interval.1, c.fit.t),
            )
        }
        (None, _) => {
            let why = r.notes.iter().find(|n| n.contains("`cusp`")).cloned().unwrap_or_else(|| "no cusp fit".into());
            item("IV", "cusp_exponent", false, why)
        }
    });

    // (V) convergence to the profile
    items.push(match (&r.convergence, kind) {
        (Some(c), DataKind::Seed) => item(
            "V",
            "profile_convergence",
            c.pass,
            format!("nu = {}, final distance {} (threshold {}), decreasing {}", c.nu, c.final_distance, c.threshold, c.decreasing),
        ),
        (None, DataKind::Seed) => item("V", "profile_convergence", false, "no convergence series".into()),
        _ => skipped("V", "profile_convergence", "only asserted for seed runs"),
    });

    if let Some(rep) = &r.seed_report {
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        items.push(item("seed", "seed_admissible", rep.pass, format!("failed checks: {failed:?}")));
    }
    if !r.constraints.is_empty() {
        let pass = r.constraints.iter().all(|c| c.pass);
        let worst = r.constraints.iter().map(|c| c.slope_error.abs()).fold(0.0, f64::max);
        items.push(item("constraints", "modulation_constraints", pass, format!("{} frames, worst |dW(0) + 1| = {worst:e}", r.constraints.len())));
    } else {
        items.push(item("constraints", "modulation_constraints", false, "no frames in the resolvable window".into()));
    }
    if kind == DataKind::Seed {
        let pass = !r.frames.is_empty() && r.constraints.iter().all(|c| (c.slope_sup - 1.0).abs() <= 0.01);
        let (lo, hi) = r.constraints.iter().fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(c.slope_sup), b.max(c.slope_sup)));
        items.push(item("slope", "global_slope_window", pass, format!("sup |dW| in [{lo}, {hi}]")));
        let pass = !r.bootstrap.is_empty() && r.bootstrap.iter().all(|b| b.pass);
        let worst = r.bootstrap.iter().min_by(|a, b| a.worst_margin.total_cmp(&b.worst_margin));
        items.push(item(
            "bootstrap",
            "bootstrap_inequalities",
            pass,
            match worst {
                Some(w) => format!("{} frames, worst margin {} ({} at s = {})", r.bootstrap.len(), w.worst_margin, w.worst_entry, w.s),
                None => "no frames".into(),
            },
        ));
        let pass = !r.lagrangian.is_empty() && r.lagrangian.iter().all(|p| p.upper_pass && p.lower_pass && p.integral_pass);
        let truncated = r.lagrangian.iter().filter(|p| p.truncated).count();
        items.push(item("lagrangian", "lagrangian_bounds", pass, format!("{} paths, {truncated} truncated", r.lagrangian.len())));
    }
    Verdict::new(items)
}
