//! Subcommand implementations returning their outputs as values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::config::RunConfig;
use super::output::{fmt_num, status_label, PointRecord};
use crate::error::{LhfError, Result};
use crate::lhf::{potential_jump, scf, ScfResult};
use crate::occupations::{beta_from_alpha, Side};
use crate::radial::RadialGrid;
use crate::wick::{run_wick_suite, WickSuiteReport};

pub const JUMP_DENSITY_FLOOR: f64 = 1e-6;
pub const BETA_TABLE_N: [usize; 4] = [1, 2, 3, 4];
pub const BETA_TABLE_STEP: f64 = 0.05;

pub fn run_single(config: &RunConfig, side: Side) -> Result<(RadialGrid, ScfResult, PointRecord)> {
    let spec = config.spec(side)?;
    let grid = config.grid()?;
    let res = scf(&spec, &grid, &config.scf)?;
    let record = PointRecord::from_result(&grid, &res)?;
    Ok((grid, res, record))
}

pub fn run_point(config: &RunConfig, grid: &RadialGrid, n_total: f64, side: Side) -> Result<PointRecord> {
    let spec = config.spec_at(n_total, side)?;
    let res = scf(&spec, grid, &config.scf)?;
    PointRecord::from_result(grid, &res)
}

/// Rows in the order of `points`; failures carry a status label.
pub fn run_scan(
    config: &RunConfig,
    points: &[f64],
    side: Side,
) -> Result<Vec<(f64, std::result::Result<PointRecord, String>)>> {
    let grid = config.grid()?;
    Ok(points
        .par_iter()
        .map(|&n| {
            let row = run_point(config, &grid, n, side).map_err(|e| status_label(&e).to_string());
            (n, row)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSummary {
    pub n_int: f64,
    pub delta: f64,
    pub mean: [f64; 2],
    pub variation: [f64; 2],
    pub counts: [f64; 2],
    pub constraint_residual: f64,
    pub region_points: usize,
    pub tail_slope_below: [f64; 2],
    pub tail_slope_above: [f64; 2],
    pub e_below: f64,
    pub e_above: f64,
}

/// Summary plus a profile table `r, dv_up, dv_down, constraint, in_region`.
pub fn run_jump(config: &RunConfig, delta: f64, side: Side) -> Result<(JumpSummary, String)> {
    let n_int = config
        .n_total
        .ok_or_else(|| LhfError::Config("jump needs N_total".into()))?;
    if n_int.fract() != 0.0 || n_int < 1.0 {
        return Err(LhfError::Config(format!("jump needs a positive integer N_total, got {n_int}")));
    }
    if !(0.0..=0.5).contains(&delta) {
        return Err(LhfError::Domain(format!("delta must lie in [0, 0.5], got {delta}")));
    }
    let grid = config.grid()?;
    let (lo, hi) = if delta == 0.0 {
        (n_int, n_int)
    } else {
        (n_int - delta, n_int + delta)
    };
    let specs = [config.spec_at(lo, side)?, config.spec_at(hi, side)?];
    let runs: Vec<ScfResult> = specs
        .par_iter()
        .map(|s| scf(s, &grid, &config.scf))
        .collect::<Result<_>>()?;
    let (below, above) = (&runs[0], &runs[1]);
    let jump = potential_jump(&grid, below, above, JUMP_DENSITY_FLOOR)?;
    let rb = PointRecord::from_result(&grid, below)?;
    let ra = PointRecord::from_result(&grid, above)?;
    let summary = JumpSummary {
        n_int,
        delta,
        mean: jump.mean,
        variation: jump.variation,
        counts: jump.counts,
        constraint_residual: jump.constraint_residual,
        region_points: jump.region.iter().filter(|k| **k).count(),
        tail_slope_below: rb.tail_slope,
        tail_slope_above: ra.tail_slope,
        e_below: rb.e_dft,
        e_above: ra.e_dft,
    };
    let mut csv = String::from("r,dv_up,dv_down,constraint,in_region\n");
    for i in 0..grid.len() {
        let (du, dd) = (jump.delta_v[0][i], jump.delta_v[1][i]);
        let c = jump.counts[0] * du + jump.counts[1] * dd;
        writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_num(grid.r()[i]),
            fmt_num(du),
            fmt_num(dd),
            fmt_num(c),
            u8::from(jump.region[i])
        )
        .unwrap();
    }
    Ok((summary, csv))
}

/// Columns `N, alpha, beta` on a uniform grid in `alpha`.
pub fn beta_table() -> Result<String> {
    let steps = (1.0 / BETA_TABLE_STEP).round() as usize;
    let mut csv = String::from("N,alpha,beta\n");
    for n in BETA_TABLE_N {
        for i in 0..=steps {
            let alpha = i as f64 / steps as f64;
            writeln!(csv, "{n},{},{}", fmt_num(alpha), fmt_num(beta_from_alpha(n, alpha)?)).unwrap();
        }
    }
    Ok(csv)
}

pub fn wick_verify(seed: u64, trials: usize) -> Result<WickSuiteReport> {
    run_wick_suite(seed, trials)
}
