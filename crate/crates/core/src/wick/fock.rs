//! Fermionic Fock space over `M` modes with bitmask basis states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LhfError, Result};

pub const MAX_MODES: usize = 8;

pub type FockVector = Vec<Complex64>;

/// Creation or annihilation operator on a site (`c†_x`, `c_x`) or on an
/// orbital of a determinant basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Create(usize),
    Annihilate(usize),
}

impl Op {
    pub fn site(self) -> usize {
        match self {
            Op::Create(x) | Op::Annihilate(x) => x,
        }
    }

    pub fn is_creation(self) -> bool {
        matches!(self, Op::Create(_))
    }
}

/// Apply a site operator with Jordan-Wigner signs (modes ordered by index).
pub fn apply_site(op: Op, state: &[Complex64]) -> FockVector {
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    let x = op.site();
    let bit = 1usize << x;
    for (mask, amp) in state.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let occupied = mask & bit != 0;
        let target = match op {
            Op::Create(_) if !occupied => mask | bit,
            Op::Annihilate(_) if occupied => mask & !bit,
            _ => continue,
        };
        let sign = if (mask & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out[target] += amp * sign;
    }
    out
}

/// Apply `A_1 A_2 … A_n` to `state` (rightmost operator first).
pub fn apply_string(ops: &[Op], state: &[Complex64]) -> FockVector {
    ops.iter()
        .rev()
        .fold(state.to_vec(), |acc, op| apply_site(*op, &acc))
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vacuum(m: usize) -> FockVector {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << m];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(m, m, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Slater determinant of the orbitals selected by `mask`, orbital `k` being
/// column `k` of `orbitals` in the site basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantState {
    pub mask: u32,
    pub orbitals: DMatrix<Complex64>,
}

impl DeterminantState {
    pub fn new(mask: u32, orbitals: DMatrix<Complex64>) -> Result<Self> {
        let m = orbitals.nrows();
        if m == 0 || m > MAX_MODES || orbitals.ncols() != m {
            return Err(LhfError::Config(format!(
                "orbital matrix must be square with 1..={MAX_MODES} modes, got {}x{}",
                orbitals.nrows(),
                orbitals.ncols()
            )));
        }
        if mask >> m != 0 {
            return Err(LhfError::Config(format!("mask {mask:#b} exceeds {m} modes")));
        }
        let gram = orbitals.adjoint() * &orbitals;
        let dev = (gram - DMatrix::identity(m, m)).norm();
        if dev > 1e-12 {
            return Err(LhfError::Consistency(format!(
                "orbital matrix is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self { mask, orbitals })
    }

    pub fn modes(&self) -> usize {
        self.orbitals.nrows()
    }

    pub fn particles(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// `b†_k = Σ_x U_{xk} c†_x` applied to `state`.
    pub fn create_orbital(&self, k: usize, state: &[Complex64]) -> FockVector {
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        for x in 0..self.modes() {
            let c = self.orbitals[(x, k)];
            if c.norm() == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(apply_site(Op::Create(x), state)) {
                *o += c * v;
            }
        }
        out
    }

    /// Fock-space vector `b†_{k_1} b†_{k_2} … |0⟩` with `k_1 < k_2 < …`.
    pub fn vector(&self) -> FockVector {
        let m = self.modes();
        (0..m)
            .rev()
            .filter(|k| self.mask & (1 << k) != 0)
            .fold(vacuum(m), |acc, k| self.create_orbital(k, &acc))
    }
}

/// `(1-γ)|Φ_N⟩⟨Φ_N| + γ|Φ_{N+1}⟩⟨Φ_{N+1}|` with the two determinants
/// differing by one orbital.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalEnsemble {
    pub lower: DeterminantState,
    pub upper: DeterminantState,
    pub gamma: f64,
    vectors: [FockVector; 2],
}

impl FractionalEnsemble {
    pub fn new(orbitals: DMatrix<Complex64>, lower_mask: u32, added: usize, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(LhfError::Domain(format!("gamma={gamma} outside [0, 1]")));
        }
        if lower_mask & (1 << added) != 0 {
            return Err(LhfError::Config(format!(
                "orbital {added} is already occupied in the lower determinant"
            )));
        }
        let lower = DeterminantState::new(lower_mask, orbitals.clone())?;
        let upper = DeterminantState::new(lower_mask | (1 << added), orbitals)?;
        let vectors = [lower.vector(), upper.vector()];
        Ok(Self {
            lower,
            upper,
            gamma,
            vectors,
        })
    }

    /// Same determinants with a different weight.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(LhfError::Domain(format!("gamma={gamma} outside [0, 1]")));
        }
        Ok(Self {
            gamma,
            ..self.clone()
        })
    }

    pub fn modes(&self) -> usize {
        self.lower.modes()
    }

    pub fn vectors(&self) -> &[FockVector; 2] {
        &self.vectors
    }

    pub fn weights(&self) -> [f64; 2] {
        [1.0 - self.gamma, self.gamma]
    }

    /// Ensemble expectation of the operator string `A_1 … A_n`.
    pub fn expectation(&self, ops: &[Op]) -> Complex64 {
        if ops.len() % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        self.vectors
            .iter()
            .zip(self.weights())
            .filter(|(_, w)| *w != 0.0)
            .map(|(v, w)| inner(v, &apply_string(ops, v)) * w)
            .sum()
    }
}
