//! Run configuration: presets, TOML files with dotted keys and
//! `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::SeedParams;
use crate::solver::{OracleData, SolverConfig};
use crate::topography::Topography;
use crate::transforms::ModelParams;

/// Environment variable naming the root directory for run outputs.
pub const OUTPUT_ENV: &str = "WAVEBREAK_OUT";

pub const PRESETS: [&str; 4] = ["burgers-oracle", "paper-seed", "topo-sine", "physical"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    /// Constructed self-similar seed at `t = -delta` on a stretched grid.
    Seed,
    /// Pure transport data with constant `z`, compared to characteristics.
    Oracle,
    /// Surface and velocity data on a periodic grid.
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub m: f64,
    pub delta: f64,
    pub kappa0: f64,
    /// Cutoff scale as a multiple of the smallest admissible one.
    pub far_scale_factor: f64,
    /// Directory holding `seed.json`, `w0.csv`, `z0.csv`; replaces the
    /// constructed seed when nonempty.
    pub files: String,
    /// Amplitude of the random odd-even perturbation (0 disables it).
    pub perturbation: f64,
    pub perturbation_rng: u64,
}

impl Default for SeedSection {
    fn default() -> Self {
        SeedSection {
            m: 100.0,
            delta: 1e-2,
            kappa0: 3.0,
            far_scale_factor: 1.25,
            files: String::new(),
            perturbation: 0.0,
            perturbation_rng: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub h_rest: f64,
    pub eps: f64,
    pub beta_star: f64,
    pub h_min: f64,
    /// Uniform current added to `u` for physical data.
    pub background_current: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelParams::default();
        ModelSection { h_rest: m.h_rest, eps: m.eps, beta_star: m.beta_star, h_min: m.h_min, background_current: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub kind: DataKind,
    /// `sine` or `profile-sine` (oracle data).
    pub oracle_shape: String,
    pub oracle_kappa: f64,
    pub oracle_amplitude: f64,
    /// Constant `z` of the oracle.
    pub oracle_z: f64,
    /// Physical data `zeta0 = a sin(k x)`, `vbar0 = b sin(k x)`.
    pub zeta_amplitude: f64,
    pub vbar_amplitude: f64,
    pub wavenumber: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            kind: DataKind::Seed,
            oracle_shape: "profile-sine".into(),
            oracle_kappa: 3.0,
            oracle_amplitude: 1.0,
            oracle_z: 0.0,
            zeta_amplitude: 1.0,
            vbar_amplitude: 1.0,
            wavenumber: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopoSection {
    /// `flat`, `gaussian` or `sine`.
    pub family: String,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
}

impl Default for TopoSection {
    fn default() -> Self {
        TopoSection { family: "flat".into(), amplitude: 0.0, width: 1.0, center: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub nodes: usize,
    /// Left end and length of periodic boxes.
    pub x_min: f64,
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { nodes: 8192, x_min: -std::f64::consts::PI, length: 2.0 * std::f64::consts::PI }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub cfl: f64,
    pub stop_slope_factor: f64,
    /// Scale the stop threshold by the initial oscillation of `w` and `z`.
    pub relative_stop: bool,
    pub snapshot_ds: f64,
    pub t_max: f64,
    pub max_steps: usize,
    /// Grid translation speed; `auto` follows the seed's steepest point.
    pub grid_velocity: GridVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridVelocity {
    Auto(AutoTag),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            cfl: s.cfl,
            stop_slope_factor: s.stop_slope_factor,
            relative_stop: s.relative_stop,
            snapshot_ds: s.snapshot_ds,
            t_max: s.t_max,
            max_steps: s.max_steps,
            grid_velocity: GridVelocity::Auto(AutoTag::Auto),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    /// Final sup distance allowed between frames and the profile.
    pub convergence_threshold: f64,
    /// Range `|y| <= convergence_y_max` of the distance.
    pub convergence_y_max: f64,
    /// Number of sampled Lagrangian starting points.
    pub lagrangian_points: usize,
    pub lagrangian_substeps: usize,
    /// Accepted deviation of the cusp exponent from 1/3.
    pub cusp_tolerance: f64,
    /// Relative margin demanded by the construction-scale bounds.
    pub bound_margin: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            convergence_threshold: 0.1,
            convergence_y_max: 1e3,
            lagrangian_points: 20,
            lagrangian_substeps: 4,
            cusp_tolerance: 0.05,
            bound_margin: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Values of `eps` run with `beta* = 0`.
    pub eps: Vec<f64>,
    /// Values of `beta*` run with `eps = 0`.
    pub beta_star: Vec<f64>,
    pub workers: usize,
    /// Amplitudes of the seminorm scaling check, applied on both axes.
    pub moser_amplitudes: Vec<f64>,
    /// Nodes of the grid the seminorms are evaluated on; kept coarse because
    /// the fifth spectral derivative amplifies round-off like `n^5`.
    pub moser_nodes: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            eps: vec![0.01, 0.02, 0.04, 0.08, 0.16, 0.32],
            beta_star: vec![0.01, 0.02, 0.04, 0.08, 0.16, 0.32],
            workers: 8,
            moser_amplitudes: vec![0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2],
            moser_nodes: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Run directory name below the output root.
    pub name: String,
    /// Write every snapshot and frame (otherwise reports only).
    pub fields: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { name: "run".into(), fields: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub seed: SeedSection,
    pub model: ModelSection,
    pub data: DataSection,
    pub topo: TopoSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub checks: CheckSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::preset("paper-seed").expect("known preset")
    }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = RunConfig {
            preset: name.to_string(),
            seed: SeedSection::default(),
            model: ModelSection::default(),
            data: DataSection::default(),
            topo: TopoSection::default(),
            grid: GridSection::default(),
            solver: SolverSection::default(),
            checks: CheckSection::default(),
            sweep: SweepSection::default(),
            output: OutputSection { name: name.to_string(), fields: true },
        };
        match name {
            "paper-seed" => {
                c.solver.snapshot_ds = 0.05;
            }
            "burgers-oracle" => {
                c.data.kind = DataKind::Oracle;
            }
            "topo-sine" => {
                c.data.kind = DataKind::Physical;
                c.model.eps = 0.0;
                c.model.beta_star = 0.1;
                c.model.background_current = -0.5;
                c.topo = TopoSection { family: "sine".into(), amplitude: 1.0, width: 2.0 * std::f64::consts::PI, center: 0.0 };
                c.grid.nodes = 2048;
                c.solver.relative_stop = true;
                c.solver.stop_slope_factor = 0.2;
            }
            "physical" => {
                c.data.kind = DataKind::Physical;
                c.model.eps = 0.1;
                c.model.background_current = -0.5;
                c.topo = TopoSection { family: "sine".into(), amplitude: 1.0, width: 2.0 * std::f64::consts::PI, center: 0.0 };
                c.grid.nodes = 2048;
                c.solver.relative_stop = true;
                c.solver.stop_slope_factor = 0.2;
            }
            other => {
                return Err(Error::Config(format!("unknown preset `{other}` (known: {})", PRESETS.join(", "))));
            }
        }
        Ok(c)
    }

    /// Preset defaults, then the file, then overrides. The preset is taken
    /// from the overrides, the file, or `paper-seed`, in that order.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let file_table: toml::Table = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                text.parse::<toml::Table>().map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        let mut name = file_table.get("preset").and_then(|v| v.as_str()).unwrap_or("paper-seed").to_string();
        for (k, v) in overrides {
            if k == "preset" {
                name = v.clone();
            }
        }
        let base = RunConfig::preset(&name)?;
        let mut table = toml::Table::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut table, file_table);
        for (k, v) in overrides {
            set_key(&mut table, k, v)?;
        }
        table.insert("preset".into(), toml::Value::String(name));
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params().validate()?;
        self.solver_config(0.0).validate()?;
        self.topography()?.validate()?;
        if self.grid.nodes < 64 {
            return Err(Error::Config(format!("grid.nodes must be at least 64, got {}", self.grid.nodes)));
        }
        if !(self.grid.length > 0.0 && self.grid.length.is_finite() && self.grid.x_min.is_finite()) {
            return Err(Error::Config("grid.length must be positive and grid.x_min finite".into()));
        }
        match self.data.kind {
            DataKind::Seed => {
                if self.seed.files.is_empty() {
                    self.seed_params()?;
                    if !(self.seed.far_scale_factor >= 1.0) {
                        return Err(Error::Config("seed.far_scale_factor must be at least 1".into()));
                    }
                }
                if !(self.model.eps > 0.0) {
                    return Err(Error::Config("seed runs need model.eps > 0".into()));
                }
            }
            DataKind::Oracle => {
                self.oracle_data()?;
            }
            DataKind::Physical => {
                if !(self.data.wavenumber.fract() == 0.0 && self.data.wavenumber != 0.0) {
                    return Err(Error::Config("data.wavenumber must be a nonzero integer".into()));
                }
            }
        }
        if self.sweep.workers == 0 {
            return Err(Error::Config("sweep.workers must be at least 1".into()));
        }
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) || self.output.name.starts_with('.') {
            return Err(Error::Config(format!("output.name `{}` is not a plain directory name", self.output.name)));
        }
        Ok(())
    }

    pub fn seed_params(&self) -> Result<SeedParams> {
        SeedParams::new(self.seed.m, self.seed.delta, self.seed.kappa0)
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams { h_rest: self.model.h_rest, eps: self.model.eps, beta_star: self.model.beta_star, h_min: self.model.h_min }
    }

    pub fn topography(&self) -> Result<Topography> {
        Topography::from_family(&self.topo.family, self.topo.amplitude, self.topo.width, self.topo.center)
    }

    pub fn oracle_data(&self) -> Result<OracleData> {
        let (kappa, amplitude) = (self.data.oracle_kappa, self.data.oracle_amplitude);
        match self.data.oracle_shape.as_str() {
            "sine" => Ok(OracleData::Sine { kappa, amplitude }),
            "profile-sine" => Ok(OracleData::ProfileSine { kappa, amplitude }),
            "constant" => Ok(OracleData::Constant { kappa }),
            other => Err(Error::Config(format!("unknown oracle shape `{other}`"))),
        }
    }

    /// Solver settings with `auto` grid velocity replaced by `auto_velocity`.
    pub fn solver_config(&self, auto_velocity: f64) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            cfl: s.cfl,
            stop_slope_factor: s.stop_slope_factor,
            relative_stop: s.relative_stop,
            snapshot_ds: s.snapshot_ds,
            t_max: s.t_max,
            max_steps: s.max_steps,
            grid_velocity: match s.grid_velocity {
                GridVelocity::Auto(_) => auto_velocity,
                GridVelocity::Value(v) => v,
            },
        }
    }

    /// Directory of this run below `root`.
    pub fn run_dir(&self, root: &Path) -> PathBuf {
        root.join(&self.output.name)
    }
}

/// Output root from the environment, defaulting to `./runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Sets a dotted key. The value is parsed as a TOML literal and falls back
/// to a plain string.
fn set_key(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let value = parse_value(raw);
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        cur = match cur.get_mut(*p) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        };
    }
    let last = parts[parts.len() - 1];
    if !cur.contains_key(last) {
        return Err(Error::Config(format!("unknown configuration key `{key}`")));
    }
    // keep integer-typed keys integer and float-typed keys float
    let value = match (&cur[last], value) {
        (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) => v,
    };
    cur.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Parses `key=value` pairs.
pub fn parse_overrides(items: &[String]) -> Result<Vec<(String, String)>> {
    items
        .iter()
        .map(|s| match s.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(Error::Config(format!("override `{s}` is not of the form key=value"))),
        })
        .collect()
}
