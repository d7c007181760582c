//! Expectation of operator strings as a signed sum over complete pairings.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fock::{FractionalEnsemble, Op};
use crate::error::{LhfError, Result};

pub const MAX_STRING: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WickCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// `Σ_pairings sign · Π ⟨A_i A_j⟩`, pairing the first operator with each later
/// one in turn.
pub fn pairing_sum<F>(ops: &[Op], contraction: &F) -> Complex64
where
    F: Fn(Op, Op) -> Complex64,
{
    if ops.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    if ops.len() % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for j in 1..ops.len() {
        let pair = contraction(ops[0], ops[j]);
        if pair == Complex64::new(0.0, 0.0) {
            continue;
        }
        let rest: Vec<Op> = ops[1..]
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != j)
            .map(|(_, op)| *op)
            .collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += pair * sign * pairing_sum(&rest, contraction);
    }
    total
}

/// Compares the ensemble expectation of `ops` with its pairing expansion in
/// ensemble pair averages.
pub fn generalized_wick_check(ens: &FractionalEnsemble, ops: &[Op]) -> Result<WickCheck> {
    if ops.len() > MAX_STRING {
        return Err(LhfError::Config(format!(
            "operator strings are limited to {MAX_STRING} factors, got {}",
            ops.len()
        )));
    }
    if let Some(op) = ops.iter().find(|op| op.site() >= ens.modes()) {
        return Err(LhfError::Config(format!(
            "operator on site {} outside a {}-mode basis",
            op.site(),
            ens.modes()
        )));
    }
    let lhs = ens.expectation(ops);
    let rhs = pairing_sum(ops, &|a, b| ens.expectation(&[a, b]));
    Ok(WickCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).norm(),
    })
}

/// Random string with `len/2` creators and `len/2` annihilators in random order.
pub fn random_balanced_string<R: Rng + ?Sized>(rng: &mut R, modes: usize, len: usize) -> Vec<Op> {
    let mut kinds: Vec<bool> = (0..len).map(|i| i < len / 2).collect();
    for i in (1..kinds.len()).rev() {
        kinds.swap(i, rng.gen_range(0..=i));
    }
    kinds
        .into_iter()
        .map(|create| {
            let site = rng.gen_range(0..modes);
            if create {
                Op::Create(site)
            } else {
                Op::Annihilate(site)
            }
        })
        .collect()
}

/// Largest deviation of `values` from their least-squares line in `gammas`.
pub fn affine_residual(gammas: &[f64], values: &[Complex64]) -> f64 {
    let n = gammas.len() as f64;
    let gm = gammas.iter().sum::<f64>() / n;
    let vm = values.iter().sum::<Complex64>() / n;
    let sxx: f64 = gammas.iter().map(|g| (g - gm).powi(2)).sum();
    let sxy: Complex64 = gammas
        .iter()
        .zip(values)
        .map(|(g, v)| (v - vm) * (g - gm))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { Complex64::new(0.0, 0.0) };
    gammas
        .iter()
        .zip(values)
        .map(|(g, v)| (v - vm - slope * (g - gm)).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wick::fock::random_unitary;
    use nalgebra::DMatrix;
    use proptest::prelude::{any, prop, prop_assert, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_level_number_product() {
        let gamma = 0.3;
        let ens = FractionalEnsemble::new(DMatrix::identity(2, 2), 0b01, 1, gamma).unwrap();
        let ops = [Op::Create(1), Op::Annihilate(1), Op::Create(0), Op::Annihilate(0)];
        let c = generalized_wick_check(&ens, &ops).unwrap();
        assert!((c.lhs.re - gamma).abs() < 1e-15);
        assert!(c.gap < 1e-15);
    }

    #[test]
    fn odd_strings_vanish() {
        let ens = FractionalEnsemble::new(DMatrix::identity(3, 3), 0b001, 2, 0.5).unwrap();
        let c = generalized_wick_check(&ens, &[Op::Create(0)]).unwrap();
        assert_eq!(c.lhs, Complex64::new(0.0, 0.0));
        assert_eq!(c.rhs, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn affine_residual_of_line_is_zero() {
        let g = [0.0, 0.5, 1.0];
        let v: Vec<Complex64> = g.iter().map(|x| Complex64::new(2.0 - x, 3.0 * x)).collect();
        assert!(affine_residual(&g, &v) < 1e-15);
        let q: Vec<Complex64> = g.iter().map(|x| Complex64::new(x * x, 0.0)).collect();
        assert!(affine_residual(&g, &q) > 0.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pairing_expansion_is_exact(seed in any::<u64>(), m in 2usize..=5, gamma in 0.0f64..=1.0, len in prop::sample::select(vec![2usize, 4, 6])) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lower = rng.gen_range(0..m);
            let mask = (0..m).filter(|k| *k != lower && rng.gen_bool(0.5)).fold(0u32, |acc, k| acc | (1 << k));
            let ens = FractionalEnsemble::new(random_unitary(m, &mut rng), mask, lower, gamma).unwrap();
            let ops = random_balanced_string(&mut rng, m, len);
            let c = generalized_wick_check(&ens, &ops).unwrap();
            prop_assert!(c.gap < 1e-12, "gap {}", c.gap);
        }
    }
}
