//! Plot-ready tables derived from a run directory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts::*;
use super::output::*;
use crate::diagnostics::{cusp_samples, resolvable_gap, BlowupEstimate, BootstrapReport, ConvergenceReport};
use crate::error::{Error, Result};
use crate::profile::rescaled_profile;
use crate::renormalization::NuEstimate;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PlotIndex {
    pub emitted: Vec<String>,
    /// Tables that could not be produced, with the reason.
    pub absent: Vec<(String, String)>,
}

fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(Error::Precondition(format!("missing artifact {name}")));
    }
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn frame_count(dir: &Path) -> usize {
    let mut k = 0;
    while dir.join(frame_path(k)).exists() {
        k += 1;
    }
    k
}

/// Writes `plot/*.csv` into a completed run directory and adds them to
/// its manifest. Missing inputs are listed in `plot/index.json`.
pub fn emit_plotdata(dir: &Path) -> Result<PlotIndex> {
    let mut manifest = read_manifest(dir)?;
    let mut out = ArtifactWriter::new(dir)?;
    let mut index = PlotIndex::default();
    let note = |index: &mut PlotIndex, name: &str, r: Result<()>| match r {
        Ok(()) => index.emitted.push(name.to_string()),
        Err(e) => index.absent.push((name.to_string(), e.to_string())),
    };

    // rate product recomputed from the step history
    let r = (|| -> Result<()> {
        let b: BlowupEstimate = read_json(dir, "blowup.json")?;
        let cols = read_columns(&dir.join("history.csv"))?;
        let (t, slope, dx) = (column(&cols, "t")?, column(&cols, "min_slope")?, column(&cols, "local_dx")?);
        let mut rows = Vec::new();
        for i in 0..t.len() {
            if slope[i] < 0.0 && -1.0 / slope[i] >= resolvable_gap(dx[i]) && t[i] < b.t_star {
                rows.push(vec![t[i], (b.t_star - t[i]) * slope[i].abs(), 0.5, 2.0]);
            }
        }
        out.write_table("plot/rate_product.csv", &["t", "product", "lower", "upper"], &rows)
    })();
    note(&mut index, "plot/rate_product.csv", r);

    let r = (|| -> Result<()> {
        let c: ConvergenceReport = read_json(dir, "convergence.json")?;
        let rows: Vec<Vec<f64>> = c.series.iter().map(|p| vec![p.s, p.distance, c.threshold]).collect();
        out.write_table("plot/convergence.csv", &["s", "distance", "threshold"], &rows)
    })();
    note(&mut index, "plot/convergence.csv", r);

    let r = (|| -> Result<()> {
        let c: crate::harness::pipeline::CuspResult = read_json(dir, "cusp.json")?;
        let (state, _) = load_snapshot(dir, c.snapshot)?;
        let samples = cusp_samples(&state, c.center)?;
        let rows: Vec<Vec<f64>> = samples
            .pairs
            .iter()
            .filter(|p| p.2 > 0.0)
            .map(|&(side, r, d)| vec![side, r, d, r.log10(), d.log10()])
            .collect();
        out.write_table("plot/cusp_pairs.csv", &["side", "r", "increment", "log10_r", "log10_increment"], &rows)
    })();
    note(&mut index, "plot/cusp_pairs.csv", r);

    let frames = frame_count(dir);
    let nu: Result<NuEstimate> = read_json(dir, "nu.json");
    match (&nu, frames) {
        (Ok(nu), n) if n > 0 => {
            for k in 0..n {
                let name = format!("plot/overlay_{k:04}.csv");
                let r = (|| -> Result<()> {
                    let (f, _) = load_frame(dir, k)?;
                    let mut rows = Vec::with_capacity(f.y.len());
                    for (y, w) in f.y.iter().zip(&f.w[0]) {
                        rows.push(vec![*y, *w, rescaled_profile(*y, nu.nu)?]);
                    }
                    out.write_table(&name, &["y", "W", "W_profile"], &rows)
                })();
                note(&mut index, &name, r);
            }
        }
        (Err(e), _) => index.absent.push(("plot/overlay_*.csv".into(), e.to_string())),
        _ => index.absent.push(("plot/overlay_*.csv".into(), "no frames written".into())),
    }

    let r = (|| -> Result<()> {
        let reports: Vec<BootstrapReport> = read_json(dir, "bootstrap.json")?;
        let first = reports.first().ok_or_else(|| Error::Precondition("empty bootstrap report".into()))?;
        let mut header = vec!["s".to_string()];
        header.extend(first.entries.iter().map(|e| e.name.clone()));
        let rows: Vec<Vec<String>> = reports
            .iter()
            .map(|b| {
                let mut row = vec![fmt_f64(b.s)];
                row.extend(b.entries.iter().map(|e| if e.skipped { String::new() } else { fmt_f64(e.margin) }));
                row
            })
            .collect();
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        out.write_records("plot/bootstrap_margins.csv", &h, &rows)
    })();
    note(&mut index, "plot/bootstrap_margins.csv", r);

    out.write_json("plot/index.json", &index)?;
    let mut files: std::collections::BTreeMap<String, FileEntry> =
        manifest.files.drain(..).map(|f| (f.path.clone(), f)).collect();
    for f in out.files() {
        files.insert(f.path.clone(), f);
    }
    manifest.files = files.into_values().collect();
    write_manifest(dir, &manifest)?;
    Ok(index)
}
