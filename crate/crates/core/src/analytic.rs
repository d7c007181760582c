//! Closed-form reference cases: one electron or less, the two-electron
//! singlet between one and two electrons, the derivative jumps at N = 1, and
//! the optimized-effective-potential singlet.

use serde::{Deserialize, Serialize};

use crate::error::{LhfError, Result};
use crate::lhf::{external_potential, ScfParams};
use crate::occupations::beta_from_alpha;
use crate::radial::{
    hartree_potential, multipole_of_product, solve_bound_states, RadialFunction, RadialGrid,
};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LhfError::Domain(format!("alpha={alpha} outside [0, 1]")));
    }
    Ok(())
}

fn lowest_s(grid: &RadialGrid, v: &[f64], what: &str) -> Result<(f64, RadialFunction)> {
    let states = solve_bound_states(grid, v, 0, 1)?;
    match states.into_iter().next() {
        Some(s) if s.energy < 0.0 => Ok((s.energy, s.u)),
        _ => Err(LhfError::Unbound(format!("no bound 1s state for {what}"))),
    }
}

fn density(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| x * x).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubOneParticle {
    pub epsilon: f64,
    pub orbital: RadialFunction,
    pub v_x: RadialFunction,
    pub v_eff: RadialFunction,
    pub energy: f64,
}

/// `0 ≤ N ≤ 1`: the exchange potential cancels the Hartree potential of the
/// single orbital, so the orbital sees the bare nucleus and `E = α ε₀`.
pub fn sub_one_particle(grid: &RadialGrid, z: f64, alpha: f64) -> Result<SubOneParticle> {
    check_alpha(alpha)?;
    let v_ext = external_potential(grid, z);
    let (epsilon, orbital) = lowest_s(grid, &v_ext, "the bare nucleus")?;
    let v_h = hartree_potential(grid, &density(&orbital))?;
    let v_x: Vec<f64> = v_h.iter().map(|v| -v).collect();
    let v_eff = add(&add(&v_ext, &v_h), &v_x);
    Ok(SubOneParticle {
        epsilon,
        orbital,
        v_x,
        v_eff,
        energy: alpha * epsilon,
    })
}

/// Closed-form potentials of the singlet `1s↑ + α 1s↓`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingletPotentials {
    pub alpha: f64,
    pub beta: f64,
    /// `∫φ↑²/|r-r'|` and `∫φ↓²/|r-r'|`.
    pub y: [RadialFunction; 2],
    pub v_x: [RadialFunction; 2],
    pub c_up: f64,
    /// `v_eff - v_ext` per spin.
    pub v_tilde: [RadialFunction; 2],
}

/// `v_x↑ = -Y↑ + c↑`, `v_x↓ = -βY↓`, `c↑ = -β∫φ↑²Y↓` with `β = α/(2-α)`.
pub fn singlet_closed_form(
    grid: &RadialGrid,
    u_up: &[f64],
    u_down: &[f64],
    alpha: f64,
) -> Result<SingletPotentials> {
    check_alpha(alpha)?;
    grid.check(u_up)?;
    grid.check(u_down)?;
    let beta = beta_from_alpha(1, alpha)?;
    let y_up = hartree_potential(grid, &density(u_up))?;
    let y_down = hartree_potential(grid, &density(u_down))?;
    let c_up = -beta * grid.inner(&density(u_up), &y_down);
    let v_x_up: Vec<f64> = y_up.iter().map(|y| -y + c_up).collect();
    let v_x_down: Vec<f64> = y_down.iter().map(|y| -beta * y).collect();
    let v_h: Vec<f64> = y_up.iter().zip(&y_down).map(|(a, b)| a + beta * b).collect();
    let v_tilde = [add(&v_h, &v_x_up), add(&v_h, &v_x_down)];
    Ok(SingletPotentials {
        alpha,
        beta,
        y: [y_up, y_down],
        v_x: [v_x_up, v_x_down],
        c_up,
        v_tilde,
    })
}

/// Self-consistent two-orbital singlet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingletSolution {
    pub epsilon: [f64; 2],
    pub orbitals: [RadialFunction; 2],
    pub v_tilde: [RadialFunction; 2],
    pub energy: f64,
    pub iterations: usize,
}

/// Iterate `1s↑` and `1s↓` in `v_ext + ṽ_σ`, where `screening` maps the
/// orbitals to `ṽ` and to the energy correction added to `ε↑ + αε↓`.
fn two_orbital_scf<F>(
    grid: &RadialGrid,
    z: f64,
    alpha: f64,
    params: &ScfParams,
    screening: F,
) -> Result<SingletSolution>
where
    F: Fn(&[f64], &[f64]) -> Result<([RadialFunction; 2], f64)>,
{
    params.validate()?;
    let v_ext = external_potential(grid, z);
    let mut v_tilde = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    let mut last = f64::NAN;
    let mut history = Vec::new();
    for iteration in 1..=params.max_iter {
        let (e_up, u_up) = lowest_s(grid, &add(&v_ext, &v_tilde[0]), "spin up")?;
        let (e_down, u_down) = lowest_s(grid, &add(&v_ext, &v_tilde[1]), "spin down")?;
        let (next, correction) = screening(&u_up, &u_down)?;
        let change = (0..2)
            .flat_map(|s| next[s].iter().zip(&v_tilde[s]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let energy = e_up + alpha * e_down + correction;
        let de = (energy - last).abs();
        history.push((change, de));
        last = energy;
        if change < params.tol && de < params.tol_energy {
            return Ok(SingletSolution {
                epsilon: [e_up, e_down],
                orbitals: [u_up, u_down],
                v_tilde: next,
                energy,
                iterations: iteration,
            });
        }
        for s in 0..2 {
            for (cur, new) in v_tilde[s].iter_mut().zip(&next[s]) {
                *cur += params.mixing * (new - *cur);
            }
        }
    }
    Err(LhfError::NotConverged {
        iterations: params.max_iter,
        last_change: history.last().map_or(f64::NAN, |h| h.0),
        last_energy_change: history.last().map_or(f64::NAN, |h| h.1),
        history,
    })
}

/// Singlet iterated with the closed-form potentials; `E = ε↑ + αε↓`.
pub fn singlet_scf(grid: &RadialGrid, z: f64, alpha: f64, params: &ScfParams) -> Result<SingletSolution> {
    check_alpha(alpha)?;
    two_orbital_scf(grid, z, alpha, params, |up, down| {
        Ok((singlet_closed_form(grid, up, down, alpha)?.v_tilde, 0.0))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OepSinglet {
    pub v_tilde: [RadialFunction; 2],
    /// `α∫∫φ↑²φ↓²/|r-r'|`, subtracted from `ε↑ + αε↓`.
    pub double_counting: f64,
}

/// OEP (here equal to Hartree-Fock) singlet with vanishing constants:
/// `ṽ↑ = α∫φ↓²/|r-r'|`, `ṽ↓ = ∫φ↑²/|r-r'|`.
pub fn oep_singlet(grid: &RadialGrid, u_up: &[f64], u_down: &[f64], alpha: f64) -> Result<OepSinglet> {
    check_alpha(alpha)?;
    grid.check(u_up)?;
    grid.check(u_down)?;
    let y_up = hartree_potential(grid, &density(u_up))?;
    let y_down = hartree_potential(grid, &density(u_down))?;
    let double_counting = alpha * grid.inner(&density(u_up), &y_down);
    Ok(OepSinglet {
        v_tilde: [y_down.iter().map(|y| alpha * y).collect(), y_up],
        double_counting,
    })
}

/// Self-consistent OEP singlet; `E = ε↑ + αε↓ - α∫∫φ↑²φ↓²/|r-r'|`.
pub fn oep_singlet_scf(grid: &RadialGrid, z: f64, alpha: f64, params: &ScfParams) -> Result<SingletSolution> {
    check_alpha(alpha)?;
    two_orbital_scf(grid, z, alpha, params, |up, down| {
        let oep = oep_singlet(grid, up, down, alpha)?;
        Ok((oep.v_tilde, -oep.double_counting))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingletJump {
    pub eps_up: f64,
    pub eps_down: f64,
    pub jump: f64,
}

/// Jump of `dE/dN` at `N = 1` for the singlet: `ε⁰↓ - ε⁰↑`, where `ε⁰↑` is
/// the bare-nucleus ground state and `ε⁰↓` the ground state screened by it.
pub fn singlet_jump(grid: &RadialGrid, z: f64) -> Result<SingletJump> {
    let v_ext = external_potential(grid, z);
    let (eps_up, u) = lowest_s(grid, &v_ext, "the bare nucleus")?;
    let v_h = hartree_potential(grid, &density(&u))?;
    let (eps_down, _) = lowest_s(grid, &add(&v_ext, &v_h), "the screened nucleus")?;
    Ok(SingletJump {
        eps_up,
        eps_down,
        jump: eps_down - eps_up,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripletJump {
    pub eps0: f64,
    pub eps1: f64,
    /// `∫∫φ₀²(r)φ₁²(r')/|r-r'|`.
    pub coulomb: f64,
    /// `∫∫φ₀φ₁(r)φ₀φ₁(r')/|r-r'|`.
    pub exchange: f64,
    pub jump: f64,
}

/// Jump of `dE/dN` at `N = 1` for the fully polarized `1s↑, 2s↑` system:
/// `ε₁ - ε₀ + J₀₁ - K₀₁` with the two lowest bare-nucleus s states.
pub fn triplet_jump(grid: &RadialGrid, z: f64) -> Result<TripletJump> {
    let v_ext = external_potential(grid, z);
    let states = solve_bound_states(grid, &v_ext, 0, 2)?;
    if states.len() < 2 || states[1].energy >= 0.0 {
        return Err(LhfError::Unbound("fewer than two bound s states".into()));
    }
    let (u0, u1) = (&states[0].u, &states[1].u);
    let y0 = hartree_potential(grid, &density(u0))?;
    let coulomb = grid.inner(&density(u1), &y0);
    let pair: Vec<f64> = u0.iter().zip(u1).map(|(a, b)| a * b).collect();
    let exchange = grid.inner(&pair, &multipole_of_product(grid, &pair, 0));
    let (eps0, eps1) = (states[0].energy, states[1].energy);
    Ok(TripletJump {
        eps0,
        eps1,
        coulomb,
        exchange,
        jump: eps1 - eps0 + coulomb - exchange,
    })
}
