//! Emission of run artifacts and the single-run entry point.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::output::*;
use super::pipeline::*;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridMap};
use crate::renormalization::{ModulationRates, ModulationRecord, SelfSimilarFrame, FRAME_ORDERS};
use crate::solver::StateSummary;
use crate::transforms::{depth_from_riemann, RiemannState};

pub const VERDICT_FILE: &str = "verdict.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub index: usize,
    pub t: f64,
    pub grid: Grid,
    pub summary: StateSummary,
    pub modulation: Option<ModulationRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSidecar {
    pub snapshot: usize,
    pub modulation: ModulationRecord,
    pub rates: ModulationRates,
    pub core_h: f64,
    pub y_limit: f64,
}

pub fn snapshot_path(index: usize) -> String {
    format!("snapshots/{index:04}.csv")
}

pub fn frame_path(index: usize) -> String {
    format!("frames/{index:04}.csv")
}

fn sidecar(path: &str) -> String {
    path.replace(".csv", ".json")
}

pub fn grid_summary(grid: &Grid) -> GridSummary {
    GridSummary {
        kind: match grid.map {
            GridMap::Periodic { .. } => "periodic".into(),
            GridMap::Stretched { .. } => "stretched".into(),
        },
        nodes: grid.n,
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        min_spacing: grid.min_spacing(),
    }
}

fn state_rows(state: &RiemannState) -> Vec<Vec<f64>> {
    (0..state.grid.n)
        .map(|i| {
            let (h, u) = depth_from_riemann(state.w[i], state.z[i]);
            vec![state.grid.x(i), state.w[i], state.z[i], h, u]
        })
        .collect()
}

const STATE_HEADER: [&str; 5] = ["x", "w", "z", "h", "u"];

/// Writes every artifact of a completed run.
pub fn write_results(r: &RunResults, out: &mut ArtifactWriter) -> Result<()> {
    if let (Some(seed), Some(report)) = (&r.seed, &r.seed_report) {
        let dir = out.root().join("seed");
        seed.write(&dir)?;
        for name in ["seed.json", "w0.csv", "z0.csv"] {
            let bytes = std::fs::read(dir.join(name))?;
            out.write_bytes(&format!("seed/{name}"), &bytes)?;
        }
        out.write_json("seed_report.json", report)?;
    }
    out.write_table("initial.csv", &STATE_HEADER, &state_rows(&r.initial))?;
    let hist: Vec<Vec<f64>> = r
        .trajectory
        .history
        .iter()
        .map(|h| vec![h.t, h.min_slope, h.argmin_x, h.local_dx, h.min_opposing_slope, h.mass, h.w_sup])
        .collect();
    out.write_table("history.csv", &["t", "min_slope", "argmin_x", "local_dx", "min_opposing_slope", "mass", "w_sup"], &hist)?;

    let mut modulation = Vec::new();
    for (i, snap) in r.trajectory.snapshots.iter().enumerate() {
        if let Some(m) = r.records[i] {
            let res = if m.tau - m.t >= crate::diagnostics::resolvable_gap(m.local_dx) { 1.0 } else { 0.0 };
            modulation.push(vec![i as f64, m.t, m.s, m.kappa, m.tau, m.xi, m.slope, m.local_dx, res]);
        }
        if r.config.output.fields {
            let path = snapshot_path(i);
            out.write_table(&path, &STATE_HEADER, &state_rows(&snap.state))?;
            let side = SnapshotSidecar { index: i, t: snap.state.t, grid: snap.state.grid, summary: snap.summary, modulation: r.records[i] };
            out.write_json(&sidecar(&path), &side)?;
        }
    }
    out.write_table("modulation.csv", &["snapshot", "t", "s", "kappa", "tau", "xi", "slope", "local_dx", "resolvable"], &modulation)?;

    if r.config.output.fields {
        for (k, f) in r.frames.iter().enumerate() {
            let path = frame_path(k);
            let rows: Vec<Vec<f64>> = (0..f.y.len())
                .map(|i| {
                    let mut row = vec![f.y[i]];
                    row.extend((0..FRAME_ORDERS).map(|j| f.w[j][i]));
                    row.extend((0..FRAME_ORDERS).map(|j| f.z[j][i]));
                    row.push(f.b[i]);
                    row
                })
                .collect();
            out.write_table(&path, &FRAME_HEADER, &rows)?;
            let side = FrameSidecar {
                snapshot: r.frame_snapshots[k],
                modulation: f.modulation,
                rates: r.frame_rates[k],
                core_h: f.core_h,
                y_limit: f.y_limit,
            };
            out.write_json(&sidecar(&path), &side)?;
        }
    }

    if let Some(b) = &r.blowup {
        out.write_json("blowup.json", b)?;
    }
    for (name, rate) in [("rate", &r.rate), ("rate_oracle", &r.rate_tight)] {
        if let Some(rate) = rate {
            let rows: Vec<Vec<f64>> = rate.series.iter().map(|p| vec![p.t, p.product, rate.bounds.0, rate.bounds.1]).collect();
            out.write_table(&format!("{name}.csv"), &["t", "product", "lower", "upper"], &rows)?;
            let mut summary = rate.clone();
            summary.series.clear();
            out.write_json(&format!("{name}.json"), &summary)?;
        }
    }
    if let Some(c) = &r.cusp {
        out.write_json("cusp.json", c)?;
    }
    if let Some(n) = &r.nu {
        out.write_json("nu.json", n)?;
    }
    if let Some(c) = &r.convergence {
        let rows: Vec<Vec<f64>> = c.series.iter().map(|p| vec![p.s, p.distance, c.threshold, p.y_max]).collect();
        out.write_table("convergence.csv", &["s", "distance", "threshold", "y_max"], &rows)?;
        out.write_json("convergence.json", c)?;
    }
    let rows: Vec<Vec<f64>> = r
        .constraints
        .iter()
        .map(|c| vec![c.s, c.w0, c.slope_error, c.curvature, c.curvature_tol, c.slope_sup, c.pass as u8 as f64])
        .collect();
    out.write_table("constraints.csv", &["s", "w0", "slope_error", "curvature", "curvature_tol", "slope_sup", "pass"], &rows)?;
    if !r.bootstrap.is_empty() {
        out.write_json("bootstrap.json", &r.bootstrap)?;
    }
    if !r.lagrangian.is_empty() {
        let rows: Vec<Vec<String>> = r
            .lagrangian
            .iter()
            .map(|p| {
                vec![
                    format!("{:?}", p.family),
                    fmt_f64(p.y0),
                    fmt_f64(*p.phi.last().unwrap_or(&p.y0)),
                    fmt_f64(p.upper_ratio),
                    p.lower_applicable.to_string(),
                    fmt_f64(p.lower_ratio),
                    fmt_f64(p.integral),
                    fmt_f64(p.integral_bound),
                    p.truncated.to_string(),
                ]
            })
            .collect();
        out.write_records(
            "lagrangian.csv",
            &["family", "y0", "phi_end", "upper_ratio", "lower_applicable", "lower_ratio", "integral", "integral_bound", "truncated"],
            &rows,
        )?;
        out.write_json("lagrangian.json", &r.lagrangian)?;
    }
    if let Some(o) = &r.oracle {
        out.write_json("oracle.json", o)?;
    }
    if !r.notes.is_empty() {
        out.write_json("notes.json", &r.notes)?;
    }
    Ok(())
}

pub const FRAME_HEADER: [&str; 12] = ["y", "W", "W_y", "W_yy", "W_yyy", "W_yyyy", "Z", "Z_y", "Z_yy", "Z_yyy", "Z_yyyy", "B"];

/// Outcome of a run written to disk.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub verdict: Verdict,
    pub results: Option<RunResults>,
}

/// Runs one configuration and writes its artifacts to `root/<output.name>`.
/// Invalid configurations are rejected before any computation; failures
/// of later stages are recorded in the manifest and fail the verdict.
pub fn run_single(cfg: &RunConfig, root: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let dir = cfg.run_dir(root);
    if dir.exists() {
        std::fs::remove_dir_all(&dir)?;
    }
    let mut out = ArtifactWriter::new(&dir)?;
    let config_text = cfg.to_toml()?;
    out.write_bytes("config.toml", config_text.as_bytes())?;
    let (results, failure) = match compute(cfg) {
        Ok(r) => (Some(r), None),
        Err(Error::Stage { stage, source }) => (None, Some((stage, source.to_string()))),
        Err(e) => (None, Some(("run".to_string(), e.to_string()))),
    };
    let verdict = match &results {
        Some(r) => {
            write_results(r, &mut out)?;
            r.verdict.clone()
        }
        None => {
            let (stage, msg) = failure.clone().expect("failure recorded");
            Verdict::new(vec![VerdictItem { id: "run".into(), name: "pipeline".into(), evaluated: true, pass: false, detail: format!("stage `{stage}` failed: {msg}") }])
        }
    };
    out.write_json(VERDICT_FILE, &verdict)?;
    let manifest = RunManifest {
        command: "simulate".into(),
        config_sha256: config_hash(&config_text),
        code_version: env!("CARGO_PKG_VERSION").into(),
        grid: results.as_ref().map(|r| grid_summary(&r.initial.grid)),
        stop_reason: results.as_ref().map(|r| format!("{:?}", r.trajectory.stop)),
        failure,
        verdict_pass: verdict.pass,
        files: out.files(),
    };
    write_manifest(&dir, &manifest)?;
    Ok(RunOutcome { dir, manifest, verdict, results })
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Argument(format!("{}: bad number `{s}`: {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reads a numeric CSV table and returns its columns by name.
pub fn read_columns(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let (header, rows) = read_table(path)?;
    Ok(header.into_iter().enumerate().map(|(j, h)| (h, rows.iter().map(|r| r[j]).collect())).collect())
}

pub fn column<'a>(cols: &'a [(String, Vec<f64>)], name: &str) -> Result<&'a [f64]> {
    cols.iter()
        .find(|c| c.0 == name)
        .map(|c| c.1.as_slice())
        .ok_or_else(|| Error::Argument(format!("missing column `{name}`")))
}

/// Loads a snapshot written by [`write_results`].
pub fn load_snapshot(dir: &Path, index: usize) -> Result<(RiemannState, SnapshotSidecar)> {
    let path = snapshot_path(index);
    let side: SnapshotSidecar = serde_json::from_str(&std::fs::read_to_string(dir.join(sidecar(&path)))?)?;
    let cols = read_columns(&dir.join(&path))?;
    let state = RiemannState { grid: side.grid, t: side.t, w: column(&cols, "w")?.to_vec(), z: column(&cols, "z")?.to_vec() };
    Ok((state, side))
}

/// Loads a frame written by [`write_results`].
pub fn load_frame(dir: &Path, index: usize) -> Result<(SelfSimilarFrame, FrameSidecar)> {
    let path = frame_path(index);
    let side: FrameSidecar = serde_json::from_str(&std::fs::read_to_string(dir.join(sidecar(&path)))?)?;
    let cols = read_columns(&dir.join(&path))?;
    let get = |name: &str| column(&cols, name).map(|c| c.to_vec());
    let frame = SelfSimilarFrame {
        modulation: side.modulation,
        y: get("y")?,
        w: FRAME_HEADER[1..6].iter().map(|n| get(n)).collect::<Result<_>>()?,
        z: FRAME_HEADER[6..11].iter().map(|n| get(n)).collect::<Result<_>>()?,
        b: get("B")?,
        core_h: side.core_h,
        y_limit: side.y_limit,
    };
    Ok((frame, side))
}
