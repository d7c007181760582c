//! The local exchange condition of an ensemble density matrix: pointwise
//! update, the scalar `G`, the additive constants, and the exact solve of the
//! condition as a small linear system.

use nalgebra::{DMatrix, DVector};

use super::kernels::{homo_exchange, ChannelKernels};
use crate::error::{LhfError, Result};
use crate::occupations::{EnsembleDensityMatrix, Spin, WeightedOrbital};
use crate::radial::{hartree_potential, RadialFunction, RadialGrid};

/// Angularly integrated densities below this value are treated as zero when
/// dividing by the density.
pub const DENSITY_FLOOR: f64 = 1e-250;

/// Exchange potentials satisfying the local condition together with the
/// scalar `G` of the same ensemble.
#[derive(Debug, Clone)]
pub struct ExchangeSolution {
    pub v_x: [RadialFunction; 2],
    pub g: f64,
    /// `∫∫|ρ_σ(r,r')|²/|r-r'|` per spin.
    pub exchange_integrals: [f64; 2],
}

/// `v(r) = base(r) + Σ_j cols[j](r) z_j` with `z` the pair integrals of the
/// channel followed by `G`.
struct AffinePotential {
    base: Vec<f64>,
    pair_cols: Vec<Vec<f64>>,
    g_col: Vec<f64>,
}

impl AffinePotential {
    fn build(grid: &RadialGrid, orbs: &[WeightedOrbital], kern: &ChannelKernels) -> Self {
        let n = grid.len();
        let r = grid.r();
        let pair_terms: Vec<Vec<f64>> = (0..kern.pairs.len())
            .map(|p| kern.pair_term(orbs, p))
            .collect();
        let Some(last) = kern.density.iter().rposition(|d| *d > DENSITY_FLOOR) else {
            return Self {
                base: vec![0.0; n],
                pair_cols: vec![vec![0.0; n]; kern.pairs.len()],
                g_col: vec![-1.0; n],
            };
        };
        let mut base = vec![0.0; n];
        let mut pair_cols = vec![vec![0.0; n]; kern.pairs.len()];
        for i in 0..=last {
            let d = kern.density[i];
            if d <= DENSITY_FLOOR {
                if i > 0 {
                    base[i] = base[i - 1];
                    for col in pair_cols.iter_mut() {
                        col[i] = col[i - 1];
                    }
                }
                continue;
            }
            base[i] = (kern.triple[i] - kern.hole[i]) / d;
            for (col, term) in pair_cols.iter_mut().zip(&pair_terms) {
                col[i] = term[i] / d;
            }
        }
        // Beyond the last representable density point the potential follows
        // the -w/r law of the slowest-decaying occupied orbital.
        let tail_weight = orbs
            .iter()
            .filter(|o| o.weight != 0.0)
            .max_by(|a, b| {
                let da = a.weight * a.multiplicity() * a.orbital.u[last].powi(2);
                let db = b.weight * b.multiplicity() * b.orbital.u[last].powi(2);
                da.total_cmp(&db)
            })
            .map_or(0.0, |o| o.weight);
        for i in last + 1..n {
            base[i] = base[last] + tail_weight * (1.0 / r[last] - 1.0 / r[i]);
            for col in pair_cols.iter_mut() {
                col[i] = col[last];
            }
        }
        Self {
            base,
            pair_cols,
            g_col: vec![-1.0; n],
        }
    }

    fn evaluate(&self, pairs: &[f64], g: f64) -> Vec<f64> {
        let mut v = self.base.clone();
        for (col, z) in self.pair_cols.iter().zip(pairs) {
            for (vi, ci) in v.iter_mut().zip(col) {
                *vi += ci * z;
            }
        }
        for (vi, ci) in v.iter_mut().zip(&self.g_col) {
            *vi += ci * g;
        }
        v
    }
}

fn pair_product(orbs: &[WeightedOrbital], (a, b): (usize, usize)) -> Vec<f64> {
    orbs[a]
        .orbital
        .u
        .iter()
        .zip(&orbs[b].orbital.u)
        .map(|(x, y)| x * y)
        .collect()
}

fn total_hartree(grid: &RadialGrid, kern: &[ChannelKernels; 2]) -> Result<RadialFunction> {
    let total: Vec<f64> = kern[0]
        .density
        .iter()
        .zip(&kern[1].density)
        .map(|(a, b)| a + b)
        .collect();
    hartree_potential(grid, &total)
}

fn channel_kernels(grid: &RadialGrid, dm: &EnsembleDensityMatrix) -> Result<[ChannelKernels; 2]> {
    for o in dm.channels.iter().flatten() {
        grid.check(&o.orbital.u)?;
    }
    Ok([
        ChannelKernels::new(grid, dm.channel(Spin::Up)),
        ChannelKernels::new(grid, dm.channel(Spin::Down)),
    ])
}

fn occupied(dm: &EnsembleDensityMatrix, spin: Spin) -> bool {
    dm.channel(spin).iter().any(|o| o.weight > 0.0)
}

/// Whether the condition leaves the constant shift `c↑N↑ + c↓N↓ = 0` free,
/// which happens for an integer HOMO weight with both spins occupied.
pub fn is_gauge_free(dm: &EnsembleDensityMatrix) -> bool {
    (dm.gamma == 0.0 || dm.gamma == 1.0) && occupied(dm, Spin::Up) && occupied(dm, Spin::Down)
}

/// Solve the local exchange condition of `dm` exactly.
///
/// The potential of each spin is affine in the integrals `V_ab = ∫v u_a u_b`
/// over same-`l` orbital pairs and in `G`, so the self-consistency of these
/// integrals plus the definition of `G` form a small linear system. When the
/// gauge is free the HOMO is required to satisfy
/// `∫v_x u_h² = -Σ_b w_b R^{l_b}(hb, bh)`, which selects the one-sided limit
/// matching the HOMO weight. Same-`l` orbitals must be orthonormal.
pub fn solve_exchange(grid: &RadialGrid, dm: &EnsembleDensityMatrix) -> Result<ExchangeSolution> {
    let kern = channel_kernels(grid, dm)?;
    let v_h = total_hartree(grid, &kern)?;
    let affine = [
        AffinePotential::build(grid, dm.channel(Spin::Up), &kern[0]),
        AffinePotential::build(grid, dm.channel(Spin::Down), &kern[1]),
    ];
    let offsets = [0, kern[0].pairs.len()];
    let n_pairs = offsets[1] + kern[1].pairs.len();
    let g_idx = n_pairs;
    let gauge = is_gauge_free(dm);
    let rows = n_pairs + 1 + usize::from(gauge);
    let mut a = DMatrix::<f64>::zeros(rows, n_pairs + 1);
    let mut rhs = DVector::<f64>::zeros(rows);

    for spin in Spin::BOTH {
        let s = spin.index();
        let orbs = dm.channel(spin);
        let aff = &affine[s];
        for (p, &pair) in kern[s].pairs.iter().enumerate() {
            let row = offsets[s] + p;
            let prod = pair_product(orbs, pair);
            a[(row, row)] += 1.0;
            for (q, col) in aff.pair_cols.iter().enumerate() {
                a[(row, offsets[s] + q)] -= grid.inner(&prod, col);
            }
            a[(row, g_idx)] -= grid.inner(&prod, &aff.g_col);
            rhs[row] = grid.inner(&prod, &aff.base);
        }
        for (q, col) in aff.pair_cols.iter().enumerate() {
            a[(g_idx, offsets[s] + q)] -= grid.inner(&kern[s].density, col);
        }
        a[(g_idx, g_idx)] -= grid.inner(&kern[s].density, &aff.g_col);
        rhs[g_idx] += grid.inner(&kern[s].density, &aff.base) + 0.5 * kern[s].exchange_integral;
    }
    a[(g_idx, g_idx)] += 1.0;
    let total: Vec<f64> = kern[0]
        .density
        .iter()
        .zip(&kern[1].density)
        .map(|(x, y)| x + y)
        .collect();
    rhs[g_idx] += 0.5 * grid.inner(&v_h, &total);

    if gauge {
        let hs = dm.homo_spin.index();
        let h = dm.homo_index();
        let p = kern[hs]
            .pairs
            .iter()
            .position(|&pair| pair == (h, h))
            .expect("diagonal pair present");
        a[(rows - 1, offsets[hs] + p)] = 1.0;
        rhs[rows - 1] = -homo_exchange(grid, dm.channel(dm.homo_spin), h);
    }

    let z = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| LhfError::Singular(e.to_string()))?;
    if z.iter().any(|x| !x.is_finite()) {
        return Err(LhfError::Singular("exchange condition has no finite solution".into()));
    }
    let g = z[g_idx];
    let zs: Vec<f64> = z.iter().copied().collect();
    let v_x = [
        affine[0].evaluate(&zs[offsets[0]..offsets[1]], g),
        affine[1].evaluate(&zs[offsets[1]..n_pairs], g),
    ];
    Ok(ExchangeSolution {
        v_x,
        g,
        exchange_integrals: [kern[0].exchange_integral, kern[1].exchange_integral],
    })
}

/// One pointwise application of the local exchange condition: the pair
/// integrals are taken from `v_x` and the condition is solved for the
/// potential on the left-hand side.
pub fn vx_update(
    grid: &RadialGrid,
    dm: &EnsembleDensityMatrix,
    v_x: &[RadialFunction; 2],
    g: f64,
) -> Result<[RadialFunction; 2]> {
    let kern = channel_kernels(grid, dm)?;
    let mut out: [RadialFunction; 2] = [Vec::new(), Vec::new()];
    for spin in Spin::BOTH {
        let s = spin.index();
        grid.check(&v_x[s])?;
        let orbs = dm.channel(spin);
        let aff = AffinePotential::build(grid, orbs, &kern[s]);
        let pairs: Vec<f64> = kern[s]
            .pairs
            .iter()
            .map(|&pair| grid.inner(&pair_product(orbs, pair), &v_x[s]))
            .collect();
        out[s] = aff.evaluate(&pairs, g);
    }
    Ok(out)
}

/// `G = Σ_σ ∫v_xσ n_σ + ½∫v_H n + ½Σ_σ ∫∫|ρ_σ|²/|r-r'|` for the ensemble
/// `dm`, with `v_H` built from its own density.
pub fn compute_g(grid: &RadialGrid, v_x: &[RadialFunction; 2], dm: &EnsembleDensityMatrix) -> Result<f64> {
    let kern = channel_kernels(grid, dm)?;
    let v_h = total_hartree(grid, &kern)?;
    let mut g = 0.0;
    for s in 0..2 {
        grid.check(&v_x[s])?;
        g += grid.inner(&v_x[s], &kern[s].density)
            + 0.5 * grid.inner(&v_h, &kern[s].density)
            + 0.5 * kern[s].exchange_integral;
    }
    Ok(g)
}

/// Constants `(c↑, c↓)` that make `G` vanish for both the potential
/// ensemble `dm_beta` and the physical ensemble `dm_alpha`.
///
/// `v_x` is measured against the Hartree potential of `dm_beta`; for the
/// physical ensemble the same effective potential is measured against its own
/// Hartree potential. When the two conditions are degenerate (integer
/// particle number) the HOMO condition of [`solve_exchange`] replaces the
/// second one.
pub fn fix_constants(
    grid: &RadialGrid,
    v_x: &[RadialFunction; 2],
    dm_alpha: &EnsembleDensityMatrix,
    dm_beta: &EnsembleDensityMatrix,
) -> Result<[f64; 2]> {
    let kb = channel_kernels(grid, dm_beta)?;
    let ka = channel_kernels(grid, dm_alpha)?;
    let vh_b = total_hartree(grid, &kb)?;
    let vh_a = total_hartree(grid, &ka)?;
    let v_x_alpha: [RadialFunction; 2] = [0, 1].map(|s| {
        v_x[s]
            .iter()
            .zip(vh_b.iter().zip(&vh_a))
            .map(|(v, (b, a))| v + b - a)
            .collect()
    });
    let g_beta = compute_g(grid, v_x, dm_beta)?;
    let g_alpha = compute_g(grid, &v_x_alpha, dm_alpha)?;
    let nb = [dm_beta.trace(Spin::Up), dm_beta.trace(Spin::Down)];
    let na = [dm_alpha.trace(Spin::Up), dm_alpha.trace(Spin::Down)];

    let polarized = [0, 1].iter().find(|&&s| na[1 - s] == 0.0 && nb[1 - s] == 0.0);
    if let Some(&s) = polarized {
        let mut c = [0.0; 2];
        if na[s] > 0.0 {
            c[s] = -g_alpha / na[s];
        }
        return Ok(c);
    }

    let det = nb[0] * na[1] - nb[1] * na[0];
    let scale = (nb[0] + nb[1]) * (na[0] + na[1]);
    if det.abs() > 1e-10 * scale {
        let c_up = (-g_beta * na[1] + g_alpha * nb[1]) / det;
        let c_down = (-g_alpha * nb[0] + g_beta * na[0]) / det;
        return Ok([c_up, c_down]);
    }

    let hs = dm_beta.homo_spin.index();
    let h = dm_beta.homo_index();
    let orbs = dm_beta.channel(dm_beta.homo_spin);
    let uh = &orbs[h].orbital.u;
    let current = grid.inner3(uh, uh, &v_x[hs]);
    let norm = grid.inner(uh, uh);
    let c_h = (-homo_exchange(grid, orbs, h) - current) / norm;
    let other = 1 - hs;
    if nb[other] == 0.0 {
        return Err(LhfError::Singular("no occupied channel to absorb the constant".into()));
    }
    let mut c = [0.0; 2];
    c[hs] = c_h;
    c[other] = (-g_beta - c_h * nb[hs]) / nb[other];
    Ok(c)
}
