//! Randomized property suite over fractional ensembles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::{random_unitary, FractionalEnsemble};
use super::pairing::{affine_residual, generalized_wick_check, pairing_sum, random_balanced_string};
use super::rdm::{idempotency_check, pair_density, rdm_bruteforce, triple_density, wick_factorization};
use crate::error::Result;

pub const MAX_SUITE_MODES: usize = 6;
const GAMMA_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub modes: usize,
    pub particles: usize,
    pub gamma: f64,
    pub wick_gap: f64,
    pub affine_residual: f64,
    pub factorization_error: f64,
    /// Deviation of `ρ² - ρ` at `γ = 0` and `γ = 1`.
    pub integer_idempotency: f64,
    /// Deviation at the sampled `γ`, minus the expected `γ(1-γ)`.
    pub fractional_idempotency_error: f64,
    pub fractional_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WickSuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub max_wick_gap: f64,
    pub max_affine_residual: f64,
    pub max_factorization_error: f64,
    pub max_integer_idempotency: f64,
    pub max_fractional_idempotency_error: f64,
    /// Smallest fractional deviation among trials with `γ(1-γ) > 1e-6`.
    pub min_fractional_deviation: f64,
}

impl WickSuiteReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_wick_gap < tol
            && self.max_affine_residual < tol
            && self.max_factorization_error < tol
            && self.max_integer_idempotency < tol
            && self.max_fractional_idempotency_error < tol
            && self.min_fractional_deviation > tol
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn one_body(ens: &FractionalEnsemble) -> Result<DMatrix<Complex64>> {
    rdm_bruteforce(ens, 1)?.one_body()
}

pub fn run_trial(seed: u64) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..=MAX_SUITE_MODES);
    let particles = rng.gen_range(0..m);
    let mut sites: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        sites.swap(i, rng.gen_range(0..=i));
    }
    let mask = sites[..particles].iter().fold(0u32, |acc, k| acc | (1 << k));
    let added = sites[particles];
    let gamma: f64 = rng.gen();
    let orbitals = random_unitary(m, &mut rng);
    let ens = FractionalEnsemble::new(orbitals, mask, added, gamma)?;

    let strings = [
        random_balanced_string(&mut rng, m, 4),
        random_balanced_string(&mut rng, m, 6),
    ];
    let mut wick_gap = 0.0f64;
    let mut affine = 0.0f64;
    let grid: Vec<FractionalEnsemble> = GAMMA_GRID
        .iter()
        .map(|g| ens.with_gamma(*g))
        .collect::<Result<_>>()?;
    for ops in &strings {
        wick_gap = wick_gap.max(generalized_wick_check(&ens, ops)?.gap);
        let lhs: Vec<Complex64> = grid.iter().map(|e| e.expectation(ops)).collect();
        let rhs: Vec<Complex64> = grid
            .iter()
            .map(|e| pairing_sum(ops, &|a, b| e.expectation(&[a, b])))
            .collect();
        affine = affine
            .max(affine_residual(&GAMMA_GRID, &lhs))
            .max(affine_residual(&GAMMA_GRID, &rhs));
    }

    let g = one_body(&ens)?;
    let g0 = one_body(&grid[0])?;
    let g1 = one_body(&grid[GAMMA_GRID.len() - 1])?;
    let mut factorization = 0.0f64;
    for k in 2..=3 {
        let brute = rdm_bruteforce(&ens, k)?;
        factorization = factorization.max(brute.max_difference(&wick_factorization(&g, k)?));
    }
    let b2 = rdm_bruteforce(&ens, 2)?;
    let b3 = rdm_bruteforce(&ens, 3)?;
    let p2 = pair_density(&g);
    let p3 = triple_density(&g);
    let d2: Vec<f64> = (0..m * m).map(|i| b2.diagonal(&[i / m, i % m])).collect();
    let d3: Vec<f64> = (0..m * m * m)
        .map(|i| b3.diagonal(&[i / (m * m), (i / m) % m, i % m]))
        .collect();
    factorization = factorization
        .max(max_abs_diff(p2.as_slice(), &d2))
        .max(max_abs_diff(&p3, &d3));
    let mixed2 = (1.0 - gamma) * pair_density(&g0) + gamma * pair_density(&g1);
    let mixed3: Vec<f64> = triple_density(&g0)
        .iter()
        .zip(triple_density(&g1))
        .map(|(a, b)| (1.0 - gamma) * a + gamma * b)
        .collect();
    factorization = factorization
        .max(max_abs_diff(p2.as_slice(), mixed2.as_slice()))
        .max(max_abs_diff(&p3, &mixed3));

    let integer = idempotency_check(&g0)
        .deviation
        .max(idempotency_check(&g1).deviation);
    let fractional = idempotency_check(&g).deviation;
    Ok(TrialOutcome {
        modes: m,
        particles,
        gamma,
        wick_gap,
        affine_residual: affine,
        factorization_error: factorization,
        integer_idempotency: integer,
        fractional_idempotency_error: (fractional - gamma * (1.0 - gamma)).abs(),
        fractional_deviation: fractional,
    })
}

/// Runs `trials` independent trials seeded by `seed + i`.
pub fn run_wick_suite(seed: u64, trials: usize) -> Result<WickSuiteReport> {
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(seed.wrapping_add(i)))
        .collect::<Result<_>>()?;
    let max = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).fold(0.0, f64::max);
    let min_fractional_deviation = outcomes
        .iter()
        .filter(|o| o.gamma * (1.0 - o.gamma) > 1e-6)
        .map(|o| o.fractional_deviation)
        .fold(f64::INFINITY, f64::min);
    Ok(WickSuiteReport {
        seed,
        trials,
        max_wick_gap: max(|o| o.wick_gap),
        max_affine_residual: max(|o| o.affine_residual),
        max_factorization_error: max(|o| o.factorization_error),
        max_integer_idempotency: max(|o| o.integer_idempotency),
        max_fractional_idempotency_error: max(|o| o.fractional_idempotency_error),
        min_fractional_deviation,
    })
}
