//! Strict JSON run configuration.
//!
//! Unknown keys are rejected so a typo'd optional key fails loudly instead
//! of silently running with a default. Parsing yields a fully resolved
//! [`SimConfig`] whose provenance hash fingerprints the exact config text.

use std::path::{Path, PathBuf};

use compdiff::linalg::{SolverConfig, SolverMethod};
use compdiff::mesh::Rect;
use compdiff::model::ModelParams;
use serde::Deserialize;

use crate::AppError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    nx: usize,
    ny: usize,
    #[serde(default = "default_dt")]
    dt: f64,
    t_end: f64,
    params: RawParams,
    #[serde(default)]
    ic: RawIc,
    #[serde(default)]
    snapshot_times: Vec<f64>,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    mass_lumping: bool,
    #[serde(default)]
    uniform_stage_diffusivity: bool,
}

fn default_dt() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    a: f64,
    b: f64,
    alpha: Option<f64>,
    eps2: f64,
    eps3: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIc {
    x_c: Option<f64>,
    y_c: Option<f64>,
    #[serde(default)]
    theta0: f64,
    #[serde(default = "default_inside")]
    inside_value: f64,
    #[serde(default)]
    outside_value: f64,
}

// a missing ic block must resolve to the same values as an empty one, so
// this cannot be derived (derive would zero inside_value)
impl Default for RawIc {
    fn default() -> Self {
        RawIc { x_c: None, y_c: None, theta0: 0.0, inside_value: 1.0, outside_value: 0.0 }
    }
}

fn default_inside() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_out_dir")]
    directory: PathBuf,
    #[serde(default = "default_formats")]
    formats: Vec<OutputFormat>,
}

impl Default for RawOutput {
    fn default() -> Self {
        RawOutput { directory: default_out_dir(), formats: default_formats() }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Ppm, OutputFormat::Csv]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Ppm,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawMethod {
    Iterative,
    Direct,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    rel_tol: Option<f64>,
    max_iters: Option<usize>,
    method: Option<RawMethod>,
}

/// Triple-junction initial condition settings, fully resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcSettings {
    pub x_c: f64,
    pub y_c: f64,
    pub theta0: f64,
    pub inside_value: f64,
    pub outside_value: f64,
}

/// A validated simulation configuration with every default applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub domain: Rect,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    pub params: ModelParams,
    pub ic: IcSettings,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub solver: SolverConfig,
    pub mass_lumping: bool,
    pub uniform_stage_diffusivity: bool,
    /// FNV-1a hash of the raw config text; stamped into snapshots.
    pub provenance: u64,
}

/// 64-bit FNV-1a over the raw config bytes.
pub fn provenance_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in text.as_bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn bad(key: &str, detail: impl std::fmt::Display) -> AppError {
    AppError::Config(format!("{key}: {detail}"))
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<SimConfig, AppError> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| AppError::Config(format!("line {}: {}", e.line(), e)))?;

    let d = &raw.domain;
    for (key, v) in [
        ("domain.x_min", d.x_min),
        ("domain.x_max", d.x_max),
        ("domain.y_min", d.y_min),
        ("domain.y_max", d.y_max),
    ] {
        if !v.is_finite() {
            return Err(bad(key, "must be finite"));
        }
    }
    if !(d.x_min < d.x_max) || !(d.y_min < d.y_max) {
        return Err(bad("domain", "min bounds must be strictly below max bounds"));
    }
    let domain = Rect::new(d.x_min, d.x_max, d.y_min, d.y_max);

    if raw.nx < 2 || raw.ny < 2 {
        return Err(bad("nx/ny", "need at least 2 nodes per axis"));
    }
    if !(raw.dt > 0.0) || !raw.dt.is_finite() {
        return Err(bad("dt", "must be positive and finite"));
    }
    if !(raw.t_end >= 0.0) || !raw.t_end.is_finite() {
        return Err(bad("t_end", "must be nonnegative and finite"));
    }

    let p = &raw.params;
    let params = match p.alpha {
        Some(alpha) => ModelParams::with_alpha(p.a, p.b, alpha, p.eps2, p.eps3),
        None => ModelParams::new(p.a, p.b, p.eps2, p.eps3),
    }
    .map_err(|e| bad("params", e))?;

    let ic = IcSettings {
        x_c: raw.ic.x_c.unwrap_or((domain.x_min + 3.0 * domain.x_max) / 4.0),
        y_c: raw.ic.y_c.unwrap_or((domain.y_min + 3.0 * domain.y_max) / 4.0),
        theta0: raw.ic.theta0,
        inside_value: raw.ic.inside_value,
        outside_value: raw.ic.outside_value,
    };
    for (key, v) in [
        ("ic.x_c", ic.x_c),
        ("ic.y_c", ic.y_c),
        ("ic.theta0", ic.theta0),
        ("ic.inside_value", ic.inside_value),
        ("ic.outside_value", ic.outside_value),
    ] {
        if !v.is_finite() {
            return Err(bad(key, "must be finite"));
        }
    }
    if !domain.contains(ic.x_c, ic.y_c) {
        return Err(bad("ic", "junction must lie inside the domain"));
    }

    for &t in &raw.snapshot_times {
        if !t.is_finite() || t < 0.0 || t > raw.t_end {
            return Err(bad("snapshot_times", format!("{t} outside [0, t_end]")));
        }
    }
    let mut snapshot_times = raw.snapshot_times;
    snapshot_times.sort_by(|x, y| x.partial_cmp(y).expect("finite times"));
    snapshot_times.dedup();

    let solver = SolverConfig {
        rel_tol: raw.solver.rel_tol.unwrap_or(1e-10),
        max_iters: raw.solver.max_iters.unwrap_or(5000),
        method: match raw.solver.method {
            Some(RawMethod::Direct) => SolverMethod::Direct,
            _ => SolverMethod::Iterative,
        },
    };
    solver.validate().map_err(|e| bad("solver", e))?;

    Ok(SimConfig {
        domain,
        nx: raw.nx,
        ny: raw.ny,
        dt: raw.dt,
        t_end: raw.t_end,
        params,
        ic,
        snapshot_times,
        out_dir: raw.output.directory,
        formats: raw.output.formats,
        solver,
        mass_lumping: raw.mass_lumping,
        uniform_stage_diffusivity: raw.uniform_stage_diffusivity,
        provenance: provenance_hash(text),
    })
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<SimConfig, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_config(&text)
}
