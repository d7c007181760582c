//! Bound states of `-½u'' + [l(l+1)/(2r²) + v(r)] u = ε u` on a logarithmic
//! mesh.
//!
//! With `r = e^x` and `u = √r y` the equation becomes
//! `y'' = [(l+½)² + 2r²(v-ε)] y`, integrated with Numerov's method on the
//! uniform `x` mesh. Each state is located by node-counting bisection plus a
//! cusp-matching energy correction at the outer classical turning point, and
//! the eigenvalue is Richardson-extrapolated against the half-density mesh.

use serde::{Deserialize, Serialize};

use super::grid::{RadialFunction, RadialGrid};
use crate::error::{LhfError, Result};

const MAX_SHOTS: usize = 400;
/// Decay exponent beyond which the inward solution is set to zero.
const TAIL_CUTOFF: f64 = 250.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub energy: f64,
    pub nodes: usize,
    /// Radial function `u(r) = r R(r)`, normalized to `∫u² dr = 1`.
    pub u: RadialFunction,
}

struct Shot {
    y: Vec<f64>,
    correction: f64,
}

/// Lowest `n_states` eigenpairs for angular momentum `l`.
///
/// The returned vector is shorter than `n_states` when the potential does not
/// bind that many states; the caller decides whether that is an error.
pub fn solve_bound_states(
    grid: &RadialGrid,
    v: &[f64],
    l: usize,
    n_states: usize,
) -> Result<Vec<BoundState>> {
    grid.check(v)?;
    if n_states == 0 {
        return Err(LhfError::Config("n_states must be at least 1".into()));
    }
    let r = grid.r();
    let lf = l as f64;
    let centrifugal = |i: usize| lf * (lf + 1.0) / (2.0 * r[i] * r[i]);
    let e_floor = (0..grid.len())
        .map(|i| v[i] + centrifugal(i))
        .fold(f64::INFINITY, f64::min);
    let last = grid.len() - 1;
    let e_ceiling = v[last] + centrifugal(last);
    let bound = sturm_count(grid, v, l, e_ceiling);

    let mut states = Vec::with_capacity(n_states);
    let mut lower = e_floor;
    for nodes in 0..n_states.min(bound) {
        let state = locate(grid, v, l, nodes, lower, e_ceiling)?;
        lower = state.energy;
        states.push(state);
    }

    // Richardson step against the every-other-point mesh removes the h⁴
    // Numerov error from the eigenvalues.
    let coarse_r: Vec<f64> = grid.r().iter().step_by(2).copied().collect();
    if coarse_r.len() >= 3 && !states.is_empty() {
        let coarse = RadialGrid::from_points(coarse_r)?;
        let coarse_v: Vec<f64> = v.iter().step_by(2).copied().collect();
        let mut lower = e_floor;
        for state in states.iter_mut() {
            match locate(&coarse, &coarse_v, l, state.nodes, lower, e_ceiling) {
                Ok(c) => {
                    lower = c.energy;
                    state.energy = (16.0 * state.energy - c.energy) / 15.0;
                }
                Err(_) => break,
            }
        }
    }
    Ok(states)
}

fn locate(
    grid: &RadialGrid,
    v: &[f64],
    l: usize,
    target: usize,
    lower: f64,
    upper: f64,
) -> Result<BoundState> {
    let (mut lo, mut hi) = (lower, upper);
    let fail = |lo: f64, hi: f64| LhfError::Eigensolver {
        l,
        nodes: target,
        lower: lo,
        upper: hi,
        iterations: MAX_SHOTS,
    };
    // Bisect on the number of eigenvalues below e until the bracket holds
    // exactly the target state and is reasonably tight.
    let mut shots = 0;
    loop {
        shots += 1;
        if shots > MAX_SHOTS {
            return Err(fail(lo, hi));
        }
        let e = 0.5 * (lo + hi);
        if sturm_count(grid, v, l, e) > target {
            hi = e;
        } else {
            lo = e;
        }
        let tight = hi - lo < 1e-3 * hi.abs().max(1e-2);
        if tight && sturm_count(grid, v, l, lo) == target {
            break;
        }
    }
    let mut e = 0.5 * (lo + hi);
    for _ in 0..MAX_SHOTS {
        let shot = shoot(grid, v, l, e);
        let next = e + shot.correction;
        if shot.correction.abs() < 1e-13 * e.abs().max(1.0) {
            let u = finish(grid, &shot.y);
            if count_nodes(&u) != target {
                return Err(fail(lo, hi));
            }
            return Ok(BoundState {
                energy: e,
                nodes: target,
                u,
            });
        }
        if shot.correction > 0.0 {
            lo = lo.max(e);
        } else {
            hi = hi.min(e);
        }
        e = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(fail(lo, hi))
}

/// Number of eigenvalues below `e`: sign changes of the outward solution
/// over the whole mesh.
fn sturm_count(grid: &RadialGrid, v: &[f64], l: usize, e: f64) -> usize {
    let r = grid.r();
    let n = grid.len();
    let h = grid.dx();
    let h12 = h * h / 12.0;
    let lh = (l as f64 + 0.5).powi(2);
    let g = |i: usize| lh + 2.0 * r[i] * r[i] * (v[i] - e);
    // Beyond the outer turning point the solution can only change sign
    // before the growing branch takes over.
    let Some(turning) = (0..n).rev().find(|&i| g(i) < 0.0) else {
        return 0;
    };
    let mut y0 = r[0].powf(l as f64 + 0.5);
    let mut y1 = r[1].powf(l as f64 + 0.5);
    let (mut f0, mut f1) = (1.0 - h12 * g(0), 1.0 - h12 * g(1));
    let mut nodes = 0;
    let mut decay = 0.0;
    for i in 1..n - 1 {
        if i > turning {
            decay += h * g(i).max(0.0).sqrt();
            if decay > 40.0 {
                break;
            }
        }
        let f2 = 1.0 - h12 * g(i + 1);
        let y2 = ((12.0 - 10.0 * f1) * y1 - f0 * y0) / f2;
        if y2 * y1 < 0.0 {
            nodes += 1;
        }
        if y2.abs() > 1e150 {
            y0 = y1 * 1e-150;
            y1 = y2 * 1e-150;
        } else {
            y0 = y1;
            y1 = y2;
        }
        f0 = f1;
        f1 = f2;
    }
    nodes
}

fn shoot(grid: &RadialGrid, v: &[f64], l: usize, e: f64) -> Shot {
    let r = grid.r();
    let n = grid.len();
    let h = grid.dx();
    let h12 = h * h / 12.0;
    let lh = (l as f64 + 0.5).powi(2);
    let g: Vec<f64> = (0..n).map(|i| lh + 2.0 * r[i] * r[i] * (v[i] - e)).collect();
    let f: Vec<f64> = g.iter().map(|gi| 1.0 - h12 * gi).collect();

    // Outer classical turning point.
    let mut m = n - 3;
    while m > 2 && g[m] > 0.0 {
        m -= 1;
    }
    m = m.clamp(2, n - 3);

    let mut y = vec![0.0; n];
    let z_eff = -v[0] * r[0];
    let lp1 = l as f64 + 1.0;
    for i in 0..2 {
        y[i] = r[i].powf(l as f64 + 0.5) * (1.0 - z_eff * r[i] / lp1);
    }
    for i in 1..m {
        y[i + 1] = ((12.0 - 10.0 * f[i]) * y[i] - f[i - 1] * y[i - 1]) / f[i + 1];
    }
    let y_match = y[m];

    // Start the inward integration where the decaying solution is still
    // representable.
    let mut start = n - 1;
    let mut decay = 0.0;
    for i in m..n {
        decay += h * g[i].max(0.0).sqrt();
        if decay > TAIL_CUTOFF {
            start = i;
            break;
        }
    }
    let start = start.max(m + 2);
    for yi in y.iter_mut().skip(start + 1) {
        *yi = 0.0;
    }
    y[start] = 1.0;
    let k = g[start].max(0.0).sqrt();
    y[start - 1] = (h * k).exp();
    for i in (m + 1..start).rev() {
        y[i - 1] = ((12.0 - 10.0 * f[i]) * y[i] - f[i + 1] * y[i + 1]) / f[i - 1];
    }
    let scale = y_match / y[m];
    for yi in y.iter_mut().skip(m) {
        *yi *= scale;
    }

    // Energy correction from the derivative discontinuity at the match point.
    let norm: f64 = y
        .iter()
        .zip(r)
        .map(|(yi, ri)| yi * yi * ri * ri)
        .sum::<f64>()
        * h;
    let correction = if norm > 0.0 && y[m] != 0.0 {
        let ycusp = (y[m - 1] * f[m - 1] + y[m + 1] * f[m + 1] + 10.0 * f[m] * y[m]) / 12.0;
        let dfcusp = f[m] * (y[m] / ycusp - 1.0);
        0.5 * dfcusp / h12 * ycusp * ycusp * h / norm
    } else {
        0.0
    };
    Shot { y, correction }
}

fn finish(grid: &RadialGrid, y: &[f64]) -> RadialFunction {
    let mut u: Vec<f64> = y.iter().zip(grid.r()).map(|(yi, ri)| yi * ri.sqrt()).collect();
    let norm = grid.inner(&u, &u).sqrt();
    let sign = if u.iter().find(|x| x.abs() > 0.0).copied().unwrap_or(1.0) < 0.0 {
        -1.0
    } else {
        1.0
    };
    for x in &mut u {
        *x *= sign / norm;
    }
    u
}

/// Number of sign changes of `u`, ignoring negligible amplitudes.
pub fn count_nodes(u: &[f64]) -> usize {
    let peak = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut nodes = 0;
    let mut last = 0.0;
    for &x in u {
        if x.abs() < 1e-10 * peak {
            continue;
        }
        if last != 0.0 && x * last < 0.0 {
            nodes += 1;
        }
        last = x;
    }
    nodes
}
