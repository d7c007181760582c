//! Screened multipole integrals and the Hartree potential of a spherical
//! charge distribution.

use super::grid::{RadialFunction, RadialGrid};
use crate::error::{LhfError, Result};

/// `Y_k(r) = r^{-(k+1)} ∫_0^r p r'^k dr' + r^k ∫_r^∞ p r'^{-(k+1)} dr'` for a
/// radial product `p(r) = f(r) g(r)`.
pub fn multipole_of_product(grid: &RadialGrid, product: &[f64], k: usize) -> RadialFunction {
    let r = grid.r();
    let kf = k as i32;
    let inner: Vec<f64> = product
        .iter()
        .zip(r)
        .map(|(p, ri)| p * ri.powi(kf))
        .collect();
    let outer: Vec<f64> = product
        .iter()
        .zip(r)
        .map(|(p, ri)| p / ri.powi(kf + 1))
        .collect();
    let a = grid.cumulative(&inner);
    let b = grid.cumulative_from_outside(&outer);
    r.iter()
        .zip(a.iter().zip(&b))
        .map(|(ri, (ai, bi))| ai / ri.powi(kf + 1) + bi * ri.powi(kf))
        .collect()
}

/// Slater-type screened multipole `Y_k[f g](r)`.
pub fn multipole_integral_k(
    grid: &RadialGrid,
    f: &[f64],
    g: &[f64],
    k: usize,
) -> Result<RadialFunction> {
    grid.check(f)?;
    grid.check(g)?;
    let product: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    Ok(multipole_of_product(grid, &product, k))
}

/// Hartree potential of the angularly integrated density `n_rad = 4π r² n(r)`.
pub fn hartree_potential(grid: &RadialGrid, n_rad: &[f64]) -> Result<RadialFunction> {
    grid.check(n_rad)?;
    if let Some((i, v)) = n_rad.iter().enumerate().find(|(_, v)| **v < -1e-12) {
        return Err(LhfError::Domain(format!(
            "negative density {v:e} at r={:e}",
            grid.r()[i]
        )));
    }
    Ok(multipole_of_product(grid, n_rad, 0))
}
