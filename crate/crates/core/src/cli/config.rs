//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LhfError, Result};
use crate::lhf::ScfParams;
use crate::occupations::{default_fill_order, parse_fill_order, OccupationSpec, Shell, Side, Spin};
use crate::radial::{build_grid, RadialGrid, DEFAULT_POINTS, DEFAULT_RMAX};

/// Explicit subshell lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitShells {
    pub up: Vec<Shell>,
    pub down: Vec<Shell>,
    pub homo: Shell,
    pub homo_spin: Spin,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ScanRange {
    /// Points `start + i·step` up to `stop` inclusive.
    pub fn points(&self) -> Vec<f64> {
        if self.stop < self.start {
            return Vec::new();
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let x = self.start + i as f64 * self.step;
                (x * 1e10).round() / 1e10
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub z: f64,
    pub shells: Option<ExplicitShells>,
    pub n_total: Option<f64>,
    pub fill: Vec<(Shell, Spin)>,
    pub grid_points: usize,
    pub grid_rmax: f64,
    pub scf: ScfParams,
    pub scan: Option<ScanRange>,
    pub output_path: Option<PathBuf>,
    pub output_profiles: bool,
}

impl RunConfig {
    pub fn grid(&self) -> Result<RadialGrid> {
        build_grid(self.z, self.grid_points, self.grid_rmax)
    }

    /// Configuration at the configured particle number.
    pub fn spec(&self, side: Side) -> Result<OccupationSpec> {
        if let Some(sh) = &self.shells {
            return OccupationSpec::new(
                self.z,
                sh.up.clone(),
                sh.down.clone(),
                sh.homo,
                sh.homo_spin,
                sh.alpha,
            );
        }
        let n = self
            .n_total
            .ok_or_else(|| LhfError::Config("neither shells nor N_total given".into()))?;
        self.spec_at(n, side)
    }

    /// Configuration at `n_total` electrons from the fill order.
    pub fn spec_at(&self, n_total: f64, side: Side) -> Result<OccupationSpec> {
        OccupationSpec::from_fill(self.z, &self.fill, n_total, side)
    }
}

fn field<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        LhfError::Config(format!("line {line}: cannot parse '{value}' for key '{key}'"))
    })
}

fn shell_list(line: usize, value: &str) -> Result<Vec<Shell>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: LhfError| LhfError::Config(format!("line {line}: {e}"))))
        .collect()
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut z = None;
    let mut up = None;
    let mut down = None;
    let mut homo: Option<(Shell, Spin)> = None;
    let mut alpha = None;
    let mut n_total = None;
    let mut fill = None;
    let mut grid_points = DEFAULT_POINTS;
    let mut grid_rmax = DEFAULT_RMAX;
    let mut scf = ScfParams::default();
    let (mut start, mut stop, mut step) = (None, None, None);
    let mut output_path = None;
    let mut output_profiles = false;
    let mut seen: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            LhfError::Config(format!("line {line}: expected 'key = value', got '{content}'"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(LhfError::Config(format!("line {line}: duplicate key '{key}'")));
        }
        seen.push(key.to_string());
        match key {
            "Z" => z = Some(field::<f64>(line, key, value)?),
            "shells_up" => up = Some(shell_list(line, value)?),
            "shells_down" => down = Some(shell_list(line, value)?),
            "homo" => {
                let (s, sp) = value.split_once(',').ok_or_else(|| {
                    LhfError::Config(format!("line {line}: homo must look like '2s,up'"))
                })?;
                let wrap = |e: LhfError| LhfError::Config(format!("line {line}: {e}"));
                homo = Some((s.parse().map_err(wrap)?, sp.parse().map_err(wrap)?));
            }
            "alpha" => alpha = Some(field::<f64>(line, key, value)?),
            "N_total" => n_total = Some(field::<f64>(line, key, value)?),
            "fill" => {
                fill = Some(
                    parse_fill_order(value)
                        .map_err(|e| LhfError::Config(format!("line {line}: {e}")))?,
                )
            }
            "grid.n" => grid_points = field(line, key, value)?,
            "grid.rmax" => grid_rmax = field(line, key, value)?,
            "scf.mixing" => scf.mixing = field(line, key, value)?,
            "scf.tol" => scf.tol = field(line, key, value)?,
            "scf.tol_energy" => scf.tol_energy = field(line, key, value)?,
            "scf.max_iter" => scf.max_iter = field(line, key, value)?,
            "scan.start" => start = Some(field::<f64>(line, key, value)?),
            "scan.stop" => stop = Some(field::<f64>(line, key, value)?),
            "scan.step" => step = Some(field::<f64>(line, key, value)?),
            "output.path" => output_path = Some(PathBuf::from(value)),
            "output.profiles" => output_profiles = field(line, key, value)?,
            other => return Err(LhfError::Config(format!("line {line}: unknown key '{other}'"))),
        }
    }

    let z = z.ok_or_else(|| LhfError::Config("missing key 'Z'".into()))?;
    if !(z > 0.0) {
        return Err(LhfError::Config(format!("Z must be positive, got {z}")));
    }
    let explicit = up.is_some() || down.is_some() || homo.is_some() || alpha.is_some();
    let shells = if explicit {
        if n_total.is_some() {
            return Err(LhfError::Config(
                "give either explicit shells with alpha or N_total, not both".into(),
            ));
        }
        let (homo, homo_spin) =
            homo.ok_or_else(|| LhfError::Config("explicit shells need 'homo'".into()))?;
        Some(ExplicitShells {
            up: up.unwrap_or_default(),
            down: down.unwrap_or_default(),
            homo,
            homo_spin,
            alpha: alpha.ok_or_else(|| LhfError::Config("explicit shells need 'alpha'".into()))?,
        })
    } else {
        None
    };
    scf.validate()?;
    let scan = match (start, stop, step) {
        (None, None, None) => None,
        (Some(start), Some(stop), Some(step)) => {
            if !(step > 0.0) {
                return Err(LhfError::Config(format!("scan.step must be positive, got {step}")));
            }
            Some(ScanRange { start, stop, step })
        }
        _ => {
            return Err(LhfError::Config(
                "scan needs all of scan.start, scan.stop and scan.step".into(),
            ))
        }
    };
    let config = RunConfig {
        z,
        shells,
        n_total,
        fill: fill.unwrap_or_else(default_fill_order),
        grid_points,
        grid_rmax,
        scf,
        scan,
        output_path,
        output_profiles,
    };
    config.grid()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        LhfError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_config(&text)
}
