//! The local exchange condition on a lattice of spin-orbital sites with a pair
//! interaction, evaluated exactly and through the one-body density matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{FockVector, FractionalEnsemble};
use super::rdm::{pair_density, rdm_bruteforce, triple_density};
use crate::error::{LhfError, Result};
use crate::occupations::beta_from_alpha;

pub const MAX_SITES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    /// Orbitals are the columns.
    pub orbitals: DMatrix<Complex64>,
    /// Symmetric pair interaction `w_xy`; the diagonal is ignored.
    pub interaction: DMatrix<f64>,
    pub lower_mask: u32,
    pub added: usize,
    /// Physical fractional occupation of the added orbital.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteResidual {
    /// Normalized weighted average over the two determinants, per site.
    pub exact: Vec<f64>,
    /// Expectation in the renormalized ensemble from the factorized density
    /// matrices, rescaled to the same normalization.
    pub factorized: Vec<f64>,
    /// `N(N+1) / ((1-α)(N+1) + αN)`.
    pub scale: f64,
    /// `⟨V - U⟩` in the physical ensemble.
    pub integrated: f64,
}

impl DiscreteResidual {
    pub fn agreement(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.factorized)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.exact.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

impl LatticeModel {
    pub fn new(
        orbitals: DMatrix<Complex64>,
        interaction: DMatrix<f64>,
        lower_mask: u32,
        added: usize,
        alpha: f64,
    ) -> Result<Self> {
        let m = orbitals.nrows();
        if m > MAX_SITES {
            return Err(LhfError::Config(format!("at most {MAX_SITES} sites, got {m}")));
        }
        if interaction.shape() != (m, m) {
            return Err(LhfError::GridMismatch {
                expected: m,
                found: interaction.nrows(),
            });
        }
        if (&interaction - interaction.transpose()).amax() > 1e-12 {
            return Err(LhfError::Config("interaction must be symmetric".into()));
        }
        if lower_mask.count_ones() == 0 {
            return Err(LhfError::Config(
                "the lower determinant needs at least one particle".into(),
            ));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(LhfError::Domain(format!("alpha={alpha} outside [0, 1]")));
        }
        let model = Self {
            orbitals,
            interaction,
            lower_mask,
            added,
            alpha,
        };
        model.ensemble(0.0)?;
        Ok(model)
    }

    pub fn sites(&self) -> usize {
        self.orbitals.nrows()
    }

    pub fn particles(&self) -> usize {
        self.lower_mask.count_ones() as usize
    }

    pub fn beta(&self) -> f64 {
        beta_from_alpha(self.particles(), self.alpha).expect("alpha validated on construction")
    }

    pub fn ensemble(&self, gamma: f64) -> Result<FractionalEnsemble> {
        FractionalEnsemble::new(self.orbitals.clone(), self.lower_mask, self.added, gamma)
    }

    fn interaction_energy(&self, config: usize) -> f64 {
        let m = self.sites();
        let mut u = 0.0;
        for y in 0..m {
            for z in (y + 1)..m {
                if config & (1 << y) != 0 && config & (1 << z) != 0 {
                    u += self.interaction[(y, z)];
                }
            }
        }
        u
    }

    /// `⟨Φ| n̂_x (V̂ - Û) |Φ⟩` per site; both operators are diagonal in site
    /// occupations.
    fn determinant_term(&self, state: &FockVector, v: &[f64]) -> Vec<f64> {
        let m = self.sites();
        let mut out = vec![0.0; m];
        for (config, amp) in state.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let vv: f64 = (0..m).filter(|y| config & (1 << y) != 0).map(|y| v[y]).sum();
            let e = vv - self.interaction_energy(config);
            for (x, o) in out.iter_mut().enumerate() {
                if config & (1 << x) != 0 {
                    *o += p * e;
                }
            }
        }
        out
    }

    /// `A v = b` with `A_xy = n_x δ_xy + ρ₂(x,y)` in the renormalized ensemble.
    fn linear_system(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let m = self.sites();
        let ens = self.ensemble(self.beta())?;
        let g = rdm_bruteforce(&ens, 1)?.one_body()?;
        let p2 = pair_density(&g);
        let p3 = triple_density(&g);
        let a = DMatrix::from_fn(m, m, |x, y| {
            p2[(x, y)] + if x == y { g[(x, x)].re } else { 0.0 }
        });
        let b = DVector::from_fn(m, |x, _| {
            let mut s = 0.0;
            for y in 0..m {
                if y != x {
                    s += self.interaction[(x, y)] * p2[(x, y)];
                }
                for z in 0..m {
                    if z != y {
                        s += 0.5 * self.interaction[(y, z)] * p3[(x * m + y) * m + z];
                    }
                }
            }
            s
        });
        Ok((a, b))
    }

    /// Potential satisfying the factorized condition for the model orbitals.
    pub fn solve_potential(&self) -> Result<Vec<f64>> {
        let (a, b) = self.linear_system()?;
        let svd = a.svd(true, true);
        let v = svd
            .solve(&b, 1e-12 * svd.singular_values.max())
            .map_err(|e| LhfError::Singular(e.to_string()))?;
        Ok(v.iter().copied().collect())
    }
}

/// Residual of the local exchange condition at a trial potential.
pub fn lhf_condition_discrete(model: &LatticeModel, v: &[f64]) -> Result<DiscreteResidual> {
    let m = model.sites();
    if v.len() != m {
        return Err(LhfError::GridMismatch {
            expected: m,
            found: v.len(),
        });
    }
    let n = model.particles() as f64;
    let alpha = model.alpha;
    let ens = model.ensemble(alpha)?;
    let [lower, upper] = ens.vectors();
    let rl = model.determinant_term(lower, v);
    let ru = model.determinant_term(upper, v);
    let exact: Vec<f64> = rl
        .iter()
        .zip(&ru)
        .map(|(l, u)| (1.0 - alpha) / n * l + alpha / (n + 1.0) * u)
        .collect();

    let scale = n * (n + 1.0) / ((1.0 - alpha) * (n + 1.0) + alpha * n);
    let (a, b) = model.linear_system()?;
    let av = &a * DVector::from_column_slice(v);
    let factorized = (0..m).map(|x| (av[x] - b[x]) / scale).collect();

    let total = |state: &FockVector| -> f64 {
        state
            .iter()
            .enumerate()
            .map(|(config, amp)| {
                let vv: f64 = (0..m).filter(|y| config & (1 << y) != 0).map(|y| v[y]).sum();
                amp.norm_sqr() * (vv - model.interaction_energy(config))
            })
            .sum()
    };
    let integrated = (1.0 - alpha) * total(lower) + alpha * total(upper);
    Ok(DiscreteResidual {
        exact,
        factorized,
        scale,
        integrated,
    })
}
