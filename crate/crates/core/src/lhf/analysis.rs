//! Tail fits and the jumps of the exchange potentials across integer
//! particle number.

use serde::{Deserialize, Serialize};

use super::scf::ScfResult;
use crate::error::{LhfError, Result};
use crate::occupations::{build_density_matrix, spin_density};
use crate::radial::{RadialFunction, RadialGrid};

/// Default tail window `[0.5 r_max, 0.9 r_max]`.
pub fn default_window(grid: &RadialGrid) -> (f64, f64) {
    (0.5 * grid.r_max(), 0.9 * grid.r_max())
}

/// Least-squares fit of `v(r) ≈ a/r + c` inside `window`, per spin.
/// Returns `(a, c)`.
pub fn asymptotic_fit(
    grid: &RadialGrid,
    v: &[RadialFunction; 2],
    window: (f64, f64),
) -> Result<[(f64, f64); 2]> {
    let (lo, hi) = window;
    if !(lo < hi) || lo < grid.r_min() || hi > grid.r_max() {
        return Err(LhfError::Config(format!(
            "fit window [{lo}, {hi}] is not inside the grid [{}, {}]",
            grid.r_min(),
            grid.r_max()
        )));
    }
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.r()[i] >= lo && grid.r()[i] <= hi)
        .collect();
    if idx.len() < 3 {
        return Err(LhfError::Config(format!(
            "fit window [{lo}, {hi}] holds fewer than 3 grid points"
        )));
    }
    let mut out = [(0.0, 0.0); 2];
    for s in 0..2 {
        grid.check(&v[s])?;
        let m = idx.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &i in &idx {
            let x = 1.0 / grid.r()[i];
            let y = v[s][i];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let a = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        out[s] = (a, (sy - a * sx) / m);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialJump {
    /// `v_xσ(N+δ) - v_xσ(N-δ)`.
    pub delta_v: [RadialFunction; 2],
    /// Points where every spin density of both runs exceeds the floor.
    pub region: Vec<bool>,
    pub mean: [f64; 2],
    /// `(max - min) / |mean|` of each jump over the region.
    pub variation: [f64; 2],
    /// Spin counts at the integer particle number.
    pub counts: [f64; 2],
    /// `|Δv↑N↑ + Δv↓N↓| / (|Δv↑|N↑ + |Δv↓|N↓)` from the region means.
    pub constraint_residual: f64,
}

/// Compare the converged exchange potentials on both sides of an integer
/// particle number. `floor` is relative to the peak of each occupied spin density.
pub fn potential_jump(
    grid: &RadialGrid,
    below: &ScfResult,
    above: &ScfResult,
    floor: f64,
) -> Result<PotentialJump> {
    for res in [below, above] {
        grid.check(&res.potentials.v_ext)?;
    }
    if below.potentials.v_ext != above.potentials.v_ext {
        return Err(LhfError::Consistency(
            "jump requires both runs on the same grid and nucleus".into(),
        ));
    }
    let mut region = vec![true; grid.len()];
    for res in [below, above] {
        let dm = build_density_matrix(&res.orbitals, &res.spec, res.spec.alpha)?;
        for n in spin_density(&dm) {
            let peak = n.iter().fold(0.0f64, |m, x| m.max(*x));
            if peak == 0.0 {
                continue;
            }
            for (keep, x) in region.iter_mut().zip(&n) {
                *keep &= *x > floor * peak;
            }
        }
    }
    let delta_v: [RadialFunction; 2] = [0, 1].map(|s| {
        above.potentials.v_x[s]
            .iter()
            .zip(&below.potentials.v_x[s])
            .map(|(a, b)| a - b)
            .collect()
    });
    let mut mean = [0.0; 2];
    let mut variation = [0.0; 2];
    let count = region.iter().filter(|k| **k).count();
    for s in 0..2 {
        if count == 0 {
            continue;
        }
        let vals: Vec<f64> = (0..grid.len())
            .filter(|&i| region[i])
            .map(|i| delta_v[s][i])
            .collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        mean[s] = m;
        variation[s] = if m == 0.0 { 0.0 } else { (hi - lo) / m.abs() };
    }
    // The run below the integer fills its HOMO completely at the integer.
    let counts = below.spec.counts(1.0);
    let scale = mean[0].abs() * counts[0] + mean[1].abs() * counts[1];
    let constraint_residual = if scale == 0.0 {
        0.0
    } else {
        (mean[0] * counts[0] + mean[1] * counts[1]).abs() / scale
    };
    Ok(PotentialJump {
        delta_v,
        region,
        mean,
        variation,
        counts,
        constraint_residual,
    })
}
