//! Lifespan sweeps over `eps` and `beta*`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataKind, RunConfig};
use super::output::*;
use super::pipeline::{initial_state, Verdict, VerdictItem};
use crate::diagnostics::{estimate_blowup, lifespan_regression, LifespanFit, LifespanPoint};
use crate::error::{Error, Result};
use crate::renormalization::extract_modulation;
use crate::solver::run;
use crate::transforms::{moser_scaling_check, riemann_seminorm, ScalingReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `eps` or `beta_star`.
    pub axis: String,
    pub index: usize,
    pub eps: f64,
    pub beta_star: f64,
    pub t_star: Option<f64>,
    pub x_star: Option<f64>,
    /// Order-5 seminorm of the initial Riemann invariants.
    pub seminorm: Option<f64>,
    /// `ok`, or the error that excluded the point.
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisFit {
    pub axis: String,
    pub fit: Option<LifespanFit>,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<AxisFit>,
    pub moser: Option<ScalingReport>,
    pub verdict: Verdict,
    pub manifest: RunManifest,
}

/// Breaking time estimate and initial seminorm of one sweep point.
pub fn lifespan_point(cfg: &RunConfig) -> Result<(f64, f64, f64)> {
    cfg.validate()?;
    let topo = cfg.topography()?;
    let (init, velocity) = initial_state(cfg, None, &topo)?;
    let seminorm = riemann_seminorm(&init, 5)?;
    let traj = run(&init, &topo, &cfg.model_params(), &cfg.solver_config(velocity))?;
    let records: Vec<_> = traj.snapshots.iter().filter_map(|s| extract_modulation(&s.state).ok()).collect();
    let est = estimate_blowup(&records, init.grid.period())?;
    Ok((est.t_star, est.x_star, seminorm))
}

fn sweep_points(cfg: &RunConfig) -> Vec<(String, usize, f64, f64)> {
    let mut pts = Vec::new();
    for (i, e) in cfg.sweep.eps.iter().enumerate() {
        pts.push(("eps".to_string(), i, *e, 0.0));
    }
    for (i, b) in cfg.sweep.beta_star.iter().enumerate() {
        pts.push(("beta_star".to_string(), i, 0.0, *b));
    }
    pts
}

/// Runs every sweep point on `sweep.workers` threads. Rows are kept in
/// axis order, so the output does not depend on the worker count.
pub fn run_sweep(cfg: &RunConfig, root: &Path) -> Result<SweepOutcome> {
    cfg.validate()?;
    if cfg.data.kind != DataKind::Physical {
        return Err(Error::Config("sweeps need data.kind = \"physical\" (presets topo-sine or physical)".into()));
    }
    let points = sweep_points(cfg);
    if points.is_empty() {
        return Err(Error::Config("sweep axes are empty".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.sweep.workers)))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|(axis, index, eps, beta_star)| {
                let mut c = cfg.clone();
                c.model.eps = *eps;
                c.model.beta_star = *beta_star;
                let (t_star, x_star, seminorm, status) = match lifespan_point(&c) {
                    Ok((t, x, s)) => (Some(t), Some(x), Some(s), "ok".to_string()),
                    Err(e) => (None, None, None, e.to_string()),
                };
                SweepRow { axis: axis.clone(), index: *index, eps: *eps, beta_star: *beta_star, t_star, x_star, seminorm, status }
            })
            .collect()
    });

    let mut fits = Vec::new();
    let mut items = Vec::new();
    for axis in ["eps", "beta_star"] {
        let pts: Vec<LifespanPoint> = rows
            .iter()
            .filter(|r| r.axis == axis && r.t_star.is_some())
            .map(|r| LifespanPoint { eps: r.eps, beta_star: r.beta_star, t_star: r.t_star.unwrap() })
            .collect();
        if rows.iter().all(|r| r.axis != axis) {
            items.push(VerdictItem {
                id: format!("lifespan_{axis}"),
                name: "lifespan_scaling".into(),
                evaluated: false,
                pass: false,
                detail: "axis not swept".into(),
            });
            continue;
        }
        let (fit, error) = match lifespan_regression(&pts) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        items.push(VerdictItem {
            id: format!("lifespan_{axis}"),
            name: "lifespan_scaling".into(),
            evaluated: true,
            pass: fit.as_ref().is_some_and(|f| f.pass),
            detail: match (&fit, &error) {
                (Some(f), _) => format!("slope {} over {} points, {:.2} decades", f.slope, f.points, f.decades),
                (_, Some(e)) => e.clone(),
                _ => String::new(),
            },
        });
        fits.push(AxisFit { axis: axis.into(), fit, error });
    }

    let moser = if cfg.sweep.moser_amplitudes.is_empty() {
        None
    } else {
        let topo = cfg.topography()?;
        let grid = crate::grid::Grid::periodic(cfg.sweep.moser_nodes, cfg.grid.x_min, cfg.grid.length)?;
        let k = cfg.data.wavenumber * 2.0 * std::f64::consts::PI / cfg.grid.length;
        let phase: Vec<f64> = grid.positions().iter().map(|x| (k * (x - cfg.grid.x_min)).sin()).collect();
        let zeta: Vec<f64> = phase.iter().map(|p| cfg.data.zeta_amplitude * p).collect();
        let vbar: Vec<f64> = phase.iter().map(|p| cfg.data.vbar_amplitude * p).collect();
        let mut pairs = Vec::new();
        for a in &cfg.sweep.moser_amplitudes {
            pairs.push((*a, 0.0));
        }
        if !topo.is_flat() {
            for a in &cfg.sweep.moser_amplitudes {
                pairs.push((0.0, *a));
            }
        }
        Some(moser_scaling_check(&zeta, &vbar, &topo, &grid, &cfg.model_params(), &pairs)?)
    };
    items.push(match &moser {
        Some(m) => VerdictItem {
            id: "moser".into(),
            name: "seminorm_scaling".into(),
            evaluated: true,
            pass: m.pass,
            detail: format!("ratio spread {} over {:.2} decades", m.ratio_spread, m.decades),
        },
        None => VerdictItem { id: "moser".into(), name: "seminorm_scaling".into(), evaluated: false, pass: false, detail: "no amplitudes".into() },
    });
    let verdict = Verdict::new(items);

    let mut name = cfg.output.name.clone();
    name.push_str("-sweep");
    let dir = root.join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir)?;
    }
    let mut out = ArtifactWriter::new(&dir)?;
    // the worker count does not affect results, so it is left out of the
    // hashed configuration
    let mut hashed = cfg.clone();
    hashed.sweep.workers = 1;
    let config_text = hashed.to_toml()?;
    out.write_bytes("config.toml", config_text.as_bytes())?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.axis.clone(),
                r.index.to_string(),
                fmt_f64(r.eps),
                fmt_f64(r.beta_star),
                opt(r.t_star),
                opt(r.x_star),
                opt(r.seminorm),
                r.status.clone(),
            ]
        })
        .collect();
    out.write_records("sweep.csv", &["axis", "index", "eps", "beta_star", "t_star", "x_star", "seminorm", "status"], &table)?;
    out.write_json("lifespan.json", &fits)?;
    if let Some(m) = &moser {
        out.write_json("moser.json", m)?;
    }
    out.write_json(super::artifacts::VERDICT_FILE, &verdict)?;
    let manifest = RunManifest {
        command: "sweep".into(),
        config_sha256: config_hash(&config_text),
        code_version: env!("CARGO_PKG_VERSION").into(),
        grid: None,
        stop_reason: None,
        failure: None,
        verdict_pass: verdict.pass,
        files: out.files(),
    };
    write_manifest(&dir, &manifest)?;
    Ok(SweepOutcome { dir, rows, fits, moser, verdict, manifest })
}
