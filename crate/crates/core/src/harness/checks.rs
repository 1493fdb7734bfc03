//! Stand-alone checks behind the `profile-check` and `verify-seed` verbs.

use std::path::Path;

use serde::Serialize;

use super::artifacts::VERDICT_FILE;
use super::config::RunConfig;
use super::output::*;
use super::pipeline::{build_seed, Verdict, VerdictItem};
use crate::error::Result;
use crate::initial_data::{verify_seed, SeedReport};
use crate::profile::*;

#[derive(Debug, Clone, Serialize)]
pub struct TaylorCheck {
    pub order: usize,
    pub value: f64,
    pub expected: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileCheck {
    pub points: usize,
    pub y_max: f64,
    pub max_cubic_residual: f64,
    pub cubic_tolerance: f64,
    pub max_ode_residual: f64,
    pub ode_tolerance: f64,
    pub taylor: Vec<TaylorCheck>,
    pub bounds: BoundReport,
    pub pass: bool,
}

pub const CUBIC_TOLERANCE: f64 = 1e-12;
pub const ODE_TOLERANCE: f64 = 1e-10;
pub const TAYLOR_TOLERANCE: f64 = 1e-8;

/// Residuals, Taylor data at the origin and pointwise bounds of the
/// profile on `2 half + 1` points log-spaced in `|y| <= y_max`.
pub fn profile_check(half: usize, y_max: f64) -> Result<ProfileCheck> {
    let ys = symmetric_log_points(half, y_max * 1e-12, y_max);
    let (mut cubic, mut ode) = (0.0f64, 0.0f64);
    for &y in &ys {
        let d = profile_derivatives(y)?;
        cubic = cubic.max(cubic_residual(y, d[0]));
        ode = ode.max(ode_residual(y, d[0], d[1]));
    }
    let d0 = profile_derivatives(0.0)?;
    let expected = [0.0, -1.0, 0.0, 6.0, 0.0, -360.0];
    let taylor: Vec<TaylorCheck> = (0..=MAX_DERIVATIVE)
        .map(|k| TaylorCheck {
            order: k,
            value: d0[k],
            expected: expected[k],
            pass: (d0[k] - expected[k]).abs() <= TAYLOR_TOLERANCE * expected[k].abs().max(1.0),
        })
        .collect();
    let bounds = check_profile_bounds(&ys)?;
    let pass = cubic < CUBIC_TOLERANCE && ode < ODE_TOLERANCE && taylor.iter().all(|t| t.pass) && bounds.pass;
    Ok(ProfileCheck {
        points: ys.len(),
        y_max,
        max_cubic_residual: cubic,
        cubic_tolerance: CUBIC_TOLERANCE,
        max_ode_residual: ode,
        ode_tolerance: ODE_TOLERANCE,
        taylor,
        bounds,
        pass,
    })
}

fn finish(out: ArtifactWriter, command: &str, config_text: &str, verdict: &Verdict) -> Result<RunManifest> {
    let manifest = RunManifest {
        command: command.into(),
        config_sha256: config_hash(config_text),
        code_version: env!("CARGO_PKG_VERSION").into(),
        grid: None,
        stop_reason: None,
        failure: None,
        verdict_pass: verdict.pass,
        files: out.files(),
    };
    write_manifest(out.root(), &manifest)?;
    Ok(manifest)
}

fn fresh_dir(dir: &Path) -> Result<ArtifactWriter> {
    if dir.exists() {
        std::fs::remove_dir_all(dir)?;
    }
    ArtifactWriter::new(dir)
}

/// Writes `profile_check.json` and the sampled profile into `dir`.
pub fn write_profile_check(dir: &Path, half: usize, y_max: f64) -> Result<(ProfileCheck, Verdict)> {
    let report = profile_check(half, y_max)?;
    let mut out = fresh_dir(dir)?;
    let ys = symmetric_log_points(half, y_max * 1e-12, y_max);
    let mut rows = Vec::with_capacity(ys.len());
    for &y in &ys {
        let d = profile_derivatives(y)?;
        rows.push(vec![y, d[0], d[1], d[2], cubic_residual(y, d[0]), ode_residual(y, d[0], d[1])]);
    }
    out.write_table("profile.csv", &["y", "W", "W_y", "W_yy", "cubic_residual", "ode_residual"], &rows)?;
    out.write_json("profile_check.json", &report)?;
    let verdict = Verdict::new(vec![VerdictItem {
        id: "profile".into(),
        name: "profile_identities".into(),
        evaluated: true,
        pass: report.pass,
        detail: format!("cubic {:e}, ode {:e}, bounds pass {}", report.max_cubic_residual, report.max_ode_residual, report.bounds.pass),
    }]);
    out.write_json(VERDICT_FILE, &verdict)?;
    finish(out, "profile-check", &format!("points = {}\ny_max = {y_max}\n", report.points), &verdict)?;
    Ok((report, verdict))
}

/// Builds the configured seed, checks it and writes it with its report.
pub fn write_seed_check(cfg: &RunConfig, dir: &Path) -> Result<(SeedReport, Verdict)> {
    cfg.validate()?;
    let seed = build_seed(cfg)?;
    let report = verify_seed(&seed)?;
    let mut out = fresh_dir(dir)?;
    let config_text = cfg.to_toml()?;
    out.write_bytes("config.toml", config_text.as_bytes())?;
    seed.write(&dir.join("seed"))?;
    for name in ["seed.json", "w0.csv", "z0.csv"] {
        let bytes = std::fs::read(dir.join("seed").join(name))?;
        out.write_bytes(&format!("seed/{name}"), &bytes)?;
    }
    out.write_json("seed_report.json", &report)?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let verdict = Verdict::new(vec![VerdictItem {
        id: "seed".into(),
        name: "seed_admissible".into(),
        evaluated: true,
        pass: report.pass,
        detail: format!("failed checks: {failed:?}"),
    }]);
    out.write_json(VERDICT_FILE, &verdict)?;
    finish(out, "verify-seed", &config_text, &verdict)?;
    Ok((report, verdict))
}
