//! Radial reduction of the exchange kernels of a spin channel.

use crate::occupations::WeightedOrbital;
use crate::radial::{multipole_of_product, RadialFunction, RadialGrid};

/// Squared Wigner 3j symbol `(la k lb; 0 0 0)²`.
pub fn angular_factor(la: usize, k: usize, lb: usize) -> f64 {
    let sum = la + k + lb;
    if sum % 2 == 1 || k > la + lb || k < la.abs_diff(lb) {
        return 0.0;
    }
    let g = sum / 2;
    let fact = |n: usize| (1..=n).fold(1.0f64, |acc, i| acc * i as f64);
    let ratio = fact(2 * g - 2 * la) * fact(2 * g - 2 * k) * fact(2 * g - 2 * lb) / fact(2 * g + 1);
    let tail = fact(g) / (fact(g - la) * fact(g - k) * fact(g - lb));
    ratio * tail * tail
}

/// Multipole orders coupling `la` and `lb`.
pub fn multipoles(la: usize, lb: usize) -> impl Iterator<Item = usize> {
    (la.abs_diff(lb)..=la + lb).step_by(2)
}

/// Orbital-independent pieces of the exchange condition for one spin.
///
/// All radial quantities are angularly integrated, i.e. multiplied by
/// `4π r²`.
#[derive(Debug, Clone)]
pub struct ChannelKernels {
    /// `Σ_a w_a (2l_a+1) u_a²`.
    pub density: RadialFunction,
    /// Exchange-hole term `∫|ρ(r,r')|²/|r-r'| dr'`.
    pub hole: RadialFunction,
    /// Triple-product term `∫∫ρ(r,r₁)ρ(r₁,r₂)ρ(r₂,r)/|r₁-r₂|`.
    pub triple: RadialFunction,
    /// `∫∫|ρ(r,r')|²/|r-r'|`.
    pub exchange_integral: f64,
    /// Same-`l` orbital pairs `(a, b)` with `a <= b`.
    pub pairs: Vec<(usize, usize)>,
}

impl ChannelKernels {
    pub fn new(grid: &RadialGrid, orbs: &[WeightedOrbital]) -> Self {
        let n = grid.len();
        let mut density = vec![0.0; n];
        for o in orbs {
            let c = o.weight * o.multiplicity();
            for (d, u) in density.iter_mut().zip(&o.orbital.u) {
                *d += c * u * u;
            }
        }

        let occupied: Vec<usize> = (0..orbs.len()).filter(|&i| orbs[i].weight != 0.0).collect();
        let product = |a: usize, b: usize| -> Vec<f64> {
            orbs[a].orbital.u.iter().zip(&orbs[b].orbital.u).map(|(x, y)| x * y).collect()
        };

        let mut hole = vec![0.0; n];
        // s[a][c] = Σ_b w_b g_b Σ_k c(la,k,lb) R^k(ab, bc)
        let m = orbs.len();
        let mut s = vec![vec![0.0; m]; m];
        for &a in &occupied {
            for &b in &occupied {
                let (la, lb) = (orbs[a].l(), orbs[b].l());
                let pab = product(a, b);
                for k in multipoles(la, lb) {
                    let ang = angular_factor(la, k, lb);
                    if ang == 0.0 {
                        continue;
                    }
                    let y = multipole_of_product(grid, &pab, k);
                    let coef = orbs[a].weight * orbs[b].weight * orbs[a].multiplicity()
                        * orbs[b].multiplicity() * ang;
                    for i in 0..n {
                        hole[i] += coef * pab[i] * y[i];
                    }
                    let wb = orbs[b].weight * orbs[b].multiplicity() * ang;
                    for &c in occupied.iter().filter(|&&c| orbs[c].l() == la) {
                        s[a][c] += wb * grid.inner3(&orbs[c].orbital.u, &orbs[b].orbital.u, &y);
                    }
                }
            }
        }

        let mut triple = vec![0.0; n];
        for &a in &occupied {
            for &c in occupied.iter().filter(|&&c| orbs[c].l() == orbs[a].l()) {
                let coef = orbs[a].weight * orbs[c].weight * orbs[a].multiplicity() * s[a][c];
                if coef == 0.0 {
                    continue;
                }
                for i in 0..n {
                    triple[i] += coef * orbs[a].orbital.u[i] * orbs[c].orbital.u[i];
                }
            }
        }

        let mut pairs = Vec::new();
        for a in 0..m {
            for b in a..m {
                if orbs[a].l() == orbs[b].l() {
                    pairs.push((a, b));
                }
            }
        }
        let exchange_integral = grid.integrate(&hole);
        Self {
            density,
            hole,
            triple,
            exchange_integral,
            pairs,
        }
    }

    /// Coefficient of `V_ab = ∫v u_a u_b` in the kinetic-like term
    /// `∫ρ(r,r₁)v(r₁)ρ(r₁,r)dr₁`.
    pub fn pair_term(&self, orbs: &[WeightedOrbital], pair: usize) -> RadialFunction {
        let (a, b) = self.pairs[pair];
        let sym = if a == b { 1.0 } else { 2.0 };
        let c = sym * orbs[a].weight * orbs[b].weight * orbs[a].multiplicity();
        orbs[a]
            .orbital
            .u
            .iter()
            .zip(&orbs[b].orbital.u)
            .map(|(x, y)| c * x * y)
            .collect()
    }
}

/// `Σ_b w_b R^{l_b}(hb, bh)`: the exchange of the s orbital `h` with the
/// channel, including `h` itself when it carries weight.
pub fn homo_exchange(grid: &RadialGrid, orbs: &[WeightedOrbital], h: usize) -> f64 {
    let uh = &orbs[h].orbital.u;
    orbs.iter()
        .filter(|o| o.weight != 0.0)
        .map(|o| {
            let p: Vec<f64> = uh.iter().zip(&o.orbital.u).map(|(x, y)| x * y).collect();
            let y = multipole_of_product(grid, &p, o.l());
            o.weight * grid.inner(&p, &y)
        })
        .sum()
}
