//! Self-consistent field loop and total energies.

use serde::{Deserialize, Serialize};

use super::analysis::{asymptotic_fit, default_window};
use super::kernels::ChannelKernels;
use super::solve::{compute_g, solve_exchange};
use crate::error::{LhfError, Result};
use crate::occupations::{build_density_matrix, total_density, OccupationSpec, Shell, Spin, SpinOrbital};
use crate::radial::{hartree_potential, solve_bound_states, RadialFunction, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScfParams {
    pub mixing: f64,
    /// Bound on the largest change of the effective potential.
    pub tol: f64,
    /// Bound on the change of the total energy between iterations.
    pub tol_energy: f64,
    pub max_iter: usize,
}

impl Default for ScfParams {
    fn default() -> Self {
        Self {
            mixing: 0.3,
            tol: 1e-8,
            tol_energy: 1e-8,
            max_iter: 1000,
        }
    }
}

impl ScfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(LhfError::Config(format!("mixing must lie in (0, 1], got {}", self.mixing)));
        }
        if !(self.tol > 0.0) || !(self.tol_energy > 0.0) {
            return Err(LhfError::Config("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(LhfError::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Converged potentials. `v_h` is built from the density of the potential
/// ensemble, and `v_ext + v_h + v_x[σ]` is the effective potential of spin σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSet {
    pub v_ext: RadialFunction,
    pub v_h: RadialFunction,
    pub v_x: [RadialFunction; 2],
    /// Asymptotic constants of `v_x` from a fit of `a/r + c` in the tail.
    pub constants: [f64; 2],
    pub g_alpha: f64,
    pub g_beta: f64,
}

impl PotentialSet {
    /// `v_h + v_x[σ]`.
    pub fn screening(&self, spin: Spin) -> RadialFunction {
        self.v_h
            .iter()
            .zip(&self.v_x[spin.index()])
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn effective(&self, spin: Spin) -> RadialFunction {
        self.screening(spin)
            .iter()
            .zip(&self.v_ext)
            .map(|(a, b)| a + b)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DftEnergy {
    pub e_dft: f64,
    pub e_x: f64,
    /// `-∫v_x n - ½∫v_H n + E_x` for the physical ensemble; vanishes when the
    /// eigenvalue sum is the total energy.
    pub identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfResult {
    pub spec: OccupationSpec,
    pub potentials: PotentialSet,
    pub orbitals: Vec<SpinOrbital>,
    pub e_direct: f64,
    pub e_dft: f64,
    pub e_x: f64,
    pub identity_residual: f64,
    pub iterations: usize,
    pub last_change: f64,
}

impl ScfResult {
    pub fn orbital(&self, shell_spin: (Shell, Spin)) -> Option<&SpinOrbital> {
        self.orbitals
            .iter()
            .find(|o| o.shell == shell_spin.0 && o.spin == shell_spin.1)
    }

    pub fn homo(&self) -> &SpinOrbital {
        self.orbital((self.spec.homo, self.spec.homo_spin))
            .expect("HOMO orbital present")
    }
}

pub fn external_potential(grid: &RadialGrid, z: f64) -> RadialFunction {
    grid.r().iter().map(|r| -z / r).collect()
}

/// Lowest orbitals of every subshell the configuration needs, per spin, in
/// the screened potentials `v_ext + screening[σ]`.
pub fn solve_orbitals(
    grid: &RadialGrid,
    spec: &OccupationSpec,
    v_ext: &[f64],
    screening: &[RadialFunction; 2],
) -> Result<Vec<SpinOrbital>> {
    let mut out = Vec::new();
    for spin in Spin::BOTH {
        let shells = spec.shells(spin);
        if shells.is_empty() {
            continue;
        }
        let v: Vec<f64> = v_ext
            .iter()
            .zip(&screening[spin.index()])
            .map(|(a, b)| a + b)
            .collect();
        // States must lie below the level the channel potential tends to.
        let threshold = asymptotic_fit(grid, &[v.clone(), v.clone()], default_window(grid))
            .map_or(0.0, |fit| fit[0].1.max(0.0));
        let mut ls: Vec<usize> = shells.iter().map(|s| s.l).collect();
        ls.sort_unstable();
        ls.dedup();
        for l in ls {
            let need = shells
                .iter()
                .filter(|s| s.l == l)
                .map(|s| s.radial_index() + 1)
                .max()
                .unwrap_or(0);
            let unbound = |shell: Shell| {
                LhfError::Unbound(format!(
                    "{shell} {spin} is not bound for Z={} at N={}",
                    spec.z,
                    spec.total_electrons()
                ))
            };
            let states = match solve_bound_states(grid, &v, l, need) {
                Ok(states) => states,
                Err(LhfError::Eigensolver { upper, nodes, .. }) if upper > threshold - 1e-2 => {
                    let shell = shells.iter().find(|s| s.l == l && s.radial_index() == nodes);
                    return Err(unbound(shell.copied().unwrap_or(Shell { n: nodes + l + 1, l })));
                }
                Err(e) => return Err(e),
            };
            for shell in shells.iter().filter(|s| s.l == l) {
                let state = states
                    .get(shell.radial_index())
                    .filter(|s| s.energy < threshold)
                    .ok_or_else(|| unbound(*shell))?;
                out.push(SpinOrbital {
                    shell: *shell,
                    spin,
                    energy: state.energy,
                    u: state.u.clone(),
                });
            }
        }
    }
    orthonormalize(grid, &mut out);
    Ok(out)
}

/// Modified Gram-Schmidt within each (spin, l) block, lowest shell first.
pub fn orthonormalize(grid: &RadialGrid, orbitals: &mut [SpinOrbital]) {
    let mut order: Vec<usize> = (0..orbitals.len()).collect();
    order.sort_by_key(|&i| (orbitals[i].spin, orbitals[i].shell.l, orbitals[i].shell.n));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[..pos] {
            if orbitals[j].spin != orbitals[i].spin || orbitals[j].shell.l != orbitals[i].shell.l {
                continue;
            }
            let overlap = grid.inner(&orbitals[i].u, &orbitals[j].u);
            let uj = orbitals[j].u.clone();
            for (a, b) in orbitals[i].u.iter_mut().zip(&uj) {
                *a -= overlap * b;
            }
        }
        let norm = grid.inner(&orbitals[i].u, &orbitals[i].u).sqrt();
        for a in orbitals[i].u.iter_mut() {
            *a /= norm;
        }
    }
}

/// `Σ_closed (2l+1) ε + α ε_HOMO`.
pub fn total_energy_direct(orbitals: &[SpinOrbital], spec: &OccupationSpec) -> Result<f64> {
    let find = |shell, spin| {
        orbitals
            .iter()
            .find(|o| o.shell == shell && o.spin == spin)
            .ok_or_else(|| LhfError::Consistency(format!("no orbital for {shell} {spin}")))
    };
    let mut e = 0.0;
    for spin in Spin::BOTH {
        for &shell in &spec.closed[spin.index()] {
            e += shell.multiplicity() as f64 * find(shell, spin)?.energy;
        }
    }
    Ok(e + spec.alpha * find(spec.homo, spec.homo_spin)?.energy)
}

/// Standard density-functional expression for the energy of the physical
/// ensemble in the effective potentials `v_ext + screening[σ]`.
pub fn total_energy_dft(
    grid: &RadialGrid,
    orbitals: &[SpinOrbital],
    spec: &OccupationSpec,
    screening: &[RadialFunction; 2],
) -> Result<DftEnergy> {
    let dm = build_density_matrix(orbitals, spec, spec.alpha)?;
    let kern = [
        ChannelKernels::new(grid, dm.channel(Spin::Up)),
        ChannelKernels::new(grid, dm.channel(Spin::Down)),
    ];
    let v_h = hartree_potential(grid, &total_density(&dm))?;
    let mut e_dft = total_energy_direct(orbitals, spec)?;
    let mut residual = 0.0;
    let mut e_x = 0.0;
    for s in 0..2 {
        let n = &kern[s].density;
        grid.check(&screening[s])?;
        let v_x: Vec<f64> = screening[s].iter().zip(&v_h).map(|(a, b)| a - b).collect();
        let term = -grid.inner(&v_x, n) - 0.5 * grid.inner(&v_h, n) - 0.5 * kern[s].exchange_integral;
        e_x -= 0.5 * kern[s].exchange_integral;
        residual += term;
    }
    e_dft += residual;
    Ok(DftEnergy {
        e_dft,
        e_x,
        identity_residual: residual,
    })
}

/// Self-consistent LHF solution for the ensemble described by `spec`.
pub fn scf(spec: &OccupationSpec, grid: &RadialGrid, params: &ScfParams) -> Result<ScfResult> {
    params.validate()?;
    let fraction = spec.potential_fraction();
    let v_ext = external_potential(grid, spec.z);
    let zero = [vec![0.0; grid.len()], vec![0.0; grid.len()]];

    let bare = solve_orbitals(grid, spec, &v_ext, &zero)?;
    let dm0 = build_density_matrix(&bare, spec, fraction)?;
    let n_pot = dm0.trace(Spin::Up) + dm0.trace(Spin::Down);
    let v_h0 = hartree_potential(grid, &total_density(&dm0))?;
    let scale = 1.0 - 1.0 / n_pot.max(1.0);
    let start: RadialFunction = v_h0.iter().map(|v| scale * v).collect();
    let mut screening = [start.clone(), start];

    let mut history = Vec::new();
    let mut last_energy = f64::NAN;
    let mut last_change = f64::INFINITY;
    for iteration in 1..=params.max_iter {
        let orbitals = solve_orbitals(grid, spec, &v_ext, &screening)?;
        let dm = build_density_matrix(&orbitals, spec, fraction)?;
        let exchange = solve_exchange(grid, &dm)?;
        let v_h = hartree_potential(grid, &total_density(&dm))?;
        let next: [RadialFunction; 2] = [0, 1].map(|s| {
            v_h.iter().zip(&exchange.v_x[s]).map(|(a, b)| a + b).collect()
        });

        let mut change: f64 = 0.0;
        for spin in Spin::BOTH {
            let s = spin.index();
            let mut weight = vec![0.0; grid.len()];
            for o in orbitals.iter().filter(|o| o.spin == spin) {
                for (w, u) in weight.iter_mut().zip(&o.u) {
                    *w += u * u;
                }
            }
            let peak = weight.iter().fold(0.0f64, |m, w| m.max(*w));
            for i in 0..grid.len() {
                if weight[i] > 1e-10 * peak {
                    change = change.max((next[s][i] - screening[s][i]).abs());
                }
            }
        }
        let energy = total_energy_direct(&orbitals, spec)?;
        let energy_change = (energy - last_energy).abs();
        history.push((change, energy_change));
        last_energy = energy;
        last_change = change;

        if change < params.tol && energy_change < params.tol_energy {
            let dft = total_energy_dft(grid, &orbitals, spec, &next)?;
            let window = default_window(grid);
            let constants = match asymptotic_fit(grid, &exchange.v_x, window) {
                Ok(fit) => [fit[0].1, fit[1].1],
                Err(_) => [0.0; 2],
            };
            let potentials = PotentialSet {
                v_ext,
                v_h,
                v_x: exchange.v_x.clone(),
                constants,
                g_alpha: -dft.identity_residual,
                g_beta: compute_g(grid, &exchange.v_x, &dm)?,
            };
            return Ok(ScfResult {
                spec: spec.clone(),
                potentials,
                orbitals,
                e_direct: energy,
                e_dft: dft.e_dft,
                e_x: dft.e_x,
                identity_residual: dft.identity_residual,
                iterations: iteration,
                last_change: change,
            });
        }
        for s in 0..2 {
            for (cur, new) in screening[s].iter_mut().zip(&next[s]) {
                *cur += params.mixing * (new - *cur);
            }
        }
    }
    Err(LhfError::NotConverged {
        iterations: params.max_iter,
        last_change,
        last_energy_change: history.last().map_or(f64::NAN, |h| h.1),
        history,
    })
}
