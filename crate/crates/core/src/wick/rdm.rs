//! Reduced density matrices by explicit operator application, and their
//! factorization into one-particle density matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{apply_string, inner, FockVector, FractionalEnsemble, Op, MAX_MODES};
use crate::error::{LhfError, Result};

/// `ρ_k(x_1…x_k; y_1…y_k) = ⟨c†_{x_1}…c†_{x_k} c_{y_k}…c_{y_1}⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub order: usize,
    pub modes: usize,
    pub data: Vec<Complex64>,
}

impl ReducedDensityMatrix {
    fn zeros(order: usize, modes: usize) -> Self {
        Self {
            order,
            modes,
            data: vec![Complex64::new(0.0, 0.0); modes.pow(2 * order as u32)],
        }
    }

    fn tuple_index(&self, xs: &[usize]) -> usize {
        xs.iter().fold(0, |acc, x| acc * self.modes + x)
    }

    fn index(&self, xs: &[usize], ys: &[usize]) -> usize {
        self.tuple_index(xs) * self.modes.pow(self.order as u32) + self.tuple_index(ys)
    }

    pub fn get(&self, xs: &[usize], ys: &[usize]) -> Complex64 {
        self.data[self.index(xs, ys)]
    }

    /// Diagonal element `ρ_k(x_1…x_k)`.
    pub fn diagonal(&self, xs: &[usize]) -> f64 {
        self.get(xs, xs).re
    }

    /// `ρ_1` as an `M×M` matrix with entries `⟨c†_x c_y⟩`.
    pub fn one_body(&self) -> Result<DMatrix<Complex64>> {
        if self.order != 1 {
            return Err(LhfError::Config(format!(
                "one-body matrix needs order 1, got {}",
                self.order
            )));
        }
        Ok(DMatrix::from_fn(self.modes, self.modes, |x, y| self.get(&[x], &[y])))
    }

    /// `Σ_z ρ_k(x…z; y…z)`, a tensor of order `k-1`.
    pub fn partial_trace(&self) -> ReducedDensityMatrix {
        let mut out = ReducedDensityMatrix::zeros(self.order - 1, self.modes);
        for_each_tuple(self.order - 1, self.modes, |xs| {
            for_each_tuple(self.order - 1, self.modes, |ys| {
                let mut s = Complex64::new(0.0, 0.0);
                for z in 0..self.modes {
                    let mut xz = xs.to_vec();
                    xz.push(z);
                    let mut yz = ys.to_vec();
                    yz.push(z);
                    s += self.get(&xz, &yz);
                }
                let i = out.index(xs, ys);
                out.data[i] = s;
            });
        });
        out
    }

    pub fn max_difference(&self, other: &ReducedDensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn for_each_tuple<F: FnMut(&[usize])>(k: usize, m: usize, mut f: F) {
    let mut t = vec![0usize; k];
    let total = m.pow(k as u32);
    for mut n in 0..total {
        for slot in t.iter_mut().rev() {
            *slot = n % m;
            n /= m;
        }
        f(&t);
    }
}

fn annihilated(k: usize, m: usize, state: &[Complex64]) -> Vec<FockVector> {
    let mut out = Vec::with_capacity(m.pow(k as u32));
    for_each_tuple(k, m, |ys| {
        // c_{y_k} … c_{y_1} |Φ⟩
        let ops: Vec<Op> = ys.iter().rev().map(|y| Op::Annihilate(*y)).collect();
        out.push(apply_string(&ops, state));
    });
    out
}

/// Exact `ρ_k` of the ensemble by applying field operators to the Fock-space
/// vectors of both determinants.
pub fn rdm_bruteforce(ens: &FractionalEnsemble, k: usize) -> Result<ReducedDensityMatrix> {
    let m = ens.modes();
    if k == 0 || k > 3 || m > MAX_MODES {
        return Err(LhfError::Config(format!(
            "brute-force RDMs need 1 <= k <= 3 and M <= {MAX_MODES}, got k={k}, M={m}"
        )));
    }
    let mut out = ReducedDensityMatrix::zeros(k, m);
    for (state, w) in ens.vectors().iter().zip(ens.weights()) {
        if w == 0.0 {
            continue;
        }
        let a = annihilated(k, m, state);
        for (i, ax) in a.iter().enumerate() {
            for (j, ay) in a.iter().enumerate() {
                out.data[i * a.len() + j] += inner(ax, ay) * w;
            }
        }
    }
    Ok(out)
}

/// `ρ_k(x; y) = det[ρ_1(x_i; y_j)]` assembled from the one-body matrix.
pub fn wick_factorization(rho1: &DMatrix<Complex64>, k: usize) -> Result<ReducedDensityMatrix> {
    let m = rho1.nrows();
    if !(1..=3).contains(&k) {
        return Err(LhfError::Config(format!("factorization order must be 1..=3, got {k}")));
    }
    let mut out = ReducedDensityMatrix::zeros(k, m);
    for_each_tuple(k, m, |xs| {
        for_each_tuple(k, m, |ys| {
            let g = DMatrix::from_fn(k, k, |i, j| rho1[(xs[i], ys[j])]);
            let i = out.index(xs, ys);
            out.data[i] = g.determinant();
        });
    });
    Ok(out)
}

/// `ρ(x, x') = Σ_i φ_i(x) φ_i*(x')` from the matrix of `⟨c†_x c_y⟩`.
fn rho(g: &DMatrix<Complex64>, a: usize, b: usize) -> Complex64 {
    g[(b, a)]
}

/// Pair density `n(x)n(x') - |ρ(x,x')|²`.
pub fn pair_density(g: &DMatrix<Complex64>) -> DMatrix<f64> {
    let m = g.nrows();
    DMatrix::from_fn(m, m, |x, y| {
        rho(g, x, x).re * rho(g, y, y).re - rho(g, x, y).norm_sqr()
    })
}

/// Triple density from the one-body density matrix: cyclic products plus
/// `n n' n''` minus the three density-times-exchange terms.
pub fn triple_density(g: &DMatrix<Complex64>) -> Vec<f64> {
    let m = g.nrows();
    let n = |x: usize| rho(g, x, x).re;
    let mut out = vec![0.0; m * m * m];
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let cyclic = rho(g, x, y) * rho(g, y, z) * rho(g, z, x)
                    + rho(g, x, z) * rho(g, z, y) * rho(g, y, x);
                out[(x * m + y) * m + z] = cyclic.re + n(x) * n(y) * n(z)
                    - n(y) * rho(g, x, z).norm_sqr()
                    - n(z) * rho(g, x, y).norm_sqr()
                    - n(x) * rho(g, y, z).norm_sqr();
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdempotencyReport {
    /// Frobenius norm of `ρ² - ρ`.
    pub deviation: f64,
    /// Eigenvalues of `ρ`, largest first.
    pub occupations: Vec<f64>,
}

pub fn idempotency_check(rho1: &DMatrix<Complex64>) -> IdempotencyReport {
    let deviation = (rho1 * rho1 - rho1).norm();
    let eig = SymmetricEigen::new(rho1.clone());
    let mut occupations: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    occupations.sort_by(|a, b| b.total_cmp(a));
    IdempotencyReport {
        deviation,
        occupations,
    }
}
