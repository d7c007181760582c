//! Shell configurations, the physical and renormalized HOMO fractions, and
//! low-rank ensemble density matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LhfError, Result};
use crate::radial::{RadialFunction, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "up",
            Spin::Down => "down",
        })
    }
}

impl FromStr for Spin {
    type Err = LhfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "up" | "u" | "+" => Ok(Spin::Up),
            "down" | "dn" | "d" | "-" => Ok(Spin::Down),
            other => Err(LhfError::Config(format!("unknown spin '{other}'"))),
        }
    }
}

/// Atomic subshell `(n, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shell {
    pub n: usize,
    pub l: usize,
}

const L_LETTERS: [char; 4] = ['s', 'p', 'd', 'f'];

impl Shell {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 || l >= n || l >= L_LETTERS.len() {
            return Err(LhfError::Config(format!("invalid shell n={n}, l={l}")));
        }
        Ok(Self { n, l })
    }

    /// Spatial degeneracy `2l + 1` of the subshell for one spin.
    pub fn multiplicity(self) -> usize {
        2 * self.l + 1
    }

    /// Radial node count of the subshell, i.e. its index among states of
    /// the same `l`.
    pub fn radial_index(self) -> usize {
        self.n - self.l - 1
    }
}

impl fmt::Display for Shell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.n, L_LETTERS[self.l])
    }
}

impl FromStr for Shell {
    type Err = LhfError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let letter = s
            .chars()
            .last()
            .ok_or_else(|| LhfError::Config("empty shell label".into()))?;
        let l = L_LETTERS
            .iter()
            .position(|c| *c == letter.to_ascii_lowercase())
            .ok_or_else(|| LhfError::Config(format!("bad shell label '{s}'")))?;
        let n: usize = s[..s.len() - letter.len_utf8()]
            .parse()
            .map_err(|_| LhfError::Config(format!("bad shell label '{s}'")))?;
        Shell::new(n, l)
    }
}

/// Renormalized HOMO fraction `β = αN / ((1-α)(1+N) + αN)`.
///
/// For `N = 0` this is zero; the sub-one-particle case uses a single
/// determinant in the potential equations instead (see
/// [`OccupationSpec::potential_fraction`]).
pub fn beta_from_alpha(n: usize, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LhfError::Domain(format!("alpha={alpha} outside [0, 1]")));
    }
    if alpha == 0.0 || n == 0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    let n = n as f64;
    Ok(alpha * n / ((1.0 - alpha) * (1.0 + n) + alpha * n))
}

/// Which one-sided limit fixes the gauge at integer particle number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Side {
    #[default]
    Below,
    Above,
}

impl FromStr for Side {
    type Err = LhfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "below" => Ok(Side::Below),
            "above" => Ok(Side::Above),
            other => Err(LhfError::Config(format!(
                "side must be 'below' or 'above', got '{other}'"
            ))),
        }
    }
}

/// Closed subshells per spin plus one fractionally occupied s subshell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationSpec {
    pub z: f64,
    /// Fully occupied subshells, indexed by [`Spin::index`].
    pub closed: [Vec<Shell>; 2],
    pub homo: Shell,
    pub homo_spin: Spin,
    pub alpha: f64,
}

impl OccupationSpec {
    pub fn new(
        z: f64,
        closed_up: Vec<Shell>,
        closed_down: Vec<Shell>,
        homo: Shell,
        homo_spin: Spin,
        alpha: f64,
    ) -> Result<Self> {
        let spec = Self {
            z,
            closed: [closed_up, closed_down],
            homo,
            homo_spin,
            alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.z > 0.0) {
            return Err(LhfError::Config(format!("Z must be positive, got {}", self.z)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(LhfError::Domain(format!(
                "alpha={} outside [0, 1]",
                self.alpha
            )));
        }
        if self.homo.l != 0 {
            return Err(LhfError::Config(format!(
                "fractional HOMO must be an s subshell, got {}",
                self.homo
            )));
        }
        for spin in Spin::BOTH {
            let shells = &self.closed[spin.index()];
            for (i, s) in shells.iter().enumerate() {
                if shells[..i].contains(s) {
                    return Err(LhfError::Config(format!("shell {s} {spin} listed twice")));
                }
            }
        }
        if self.closed[self.homo_spin.index()].contains(&self.homo) {
            return Err(LhfError::Config(format!(
                "HOMO {} {} is also listed as closed",
                self.homo, self.homo_spin
            )));
        }
        Ok(())
    }

    /// Build the configuration at total electron number `n_total` from a fill
    /// order of (subshell, spin) entries. At integer `n_total` the `side`
    /// picks whether the HOMO is the last filled s entry (weight 1) or the
    /// next empty one (weight 0); the other is used when the preferred one is
    /// not an s subshell.
    pub fn from_fill(z: f64, order: &[(Shell, Spin)], n_total: f64, side: Side) -> Result<Self> {
        const EPS: f64 = 1e-12;
        if order.is_empty() {
            return Err(LhfError::Config("empty fill order".into()));
        }
        if !(n_total >= 0.0) {
            return Err(LhfError::Config(format!("N must be non-negative, got {n_total}")));
        }
        let mut starts = Vec::with_capacity(order.len());
        let mut acc = 0.0;
        for (shell, _) in order {
            starts.push(acc);
            acc += shell.multiplicity() as f64;
        }
        if n_total > acc + EPS {
            return Err(LhfError::Config(format!(
                "N={n_total} exceeds the capacity of the fill order ({acc})"
            )));
        }
        let s_entry = |pred: &dyn Fn(f64) -> bool| {
            order
                .iter()
                .zip(&starts)
                .position(|((shell, _), &c)| shell.l == 0 && pred(c))
        };
        let fractional = s_entry(&|c| n_total > c + EPS && n_total < c + 1.0 - EPS);
        let below = s_entry(&|c| (c + 1.0 - n_total).abs() < EPS);
        let above = s_entry(&|c| (c - n_total).abs() < EPS);
        let (homo_at, alpha) = match (fractional, side, below, above) {
            (Some(i), ..) => (i, n_total - starts[i]),
            (None, Side::Below, Some(i), _) | (None, Side::Above, Some(i), None) => (i, 1.0),
            (None, _, _, Some(i)) => (i, 0.0),
            _ => {
                return Err(LhfError::Config(format!(
                    "N={n_total} does not leave an s subshell at the frontier of the fill order"
                )))
            }
        };
        let mut closed: [Vec<Shell>; 2] = [Vec::new(), Vec::new()];
        for (j, (&(shell, spin), &c)) in order.iter().zip(&starts).enumerate() {
            if j == homo_at {
                continue;
            }
            let end = c + shell.multiplicity() as f64;
            if end <= n_total + EPS {
                closed[spin.index()].push(shell);
            } else if c < n_total - EPS {
                return Err(LhfError::Config(format!(
                    "N={n_total} would partially fill {shell} {spin}; only s subshells may be fractional"
                )));
            }
        }
        let (homo, homo_spin) = order[homo_at];
        Self::new(z, closed[0].clone(), closed[1].clone(), homo, homo_spin, alpha)
    }

    /// Integer baseline particle count `N` (closed subshells of both spins).
    pub fn baseline(&self) -> usize {
        self.closed
            .iter()
            .flatten()
            .map(|s| s.multiplicity())
            .sum()
    }

    pub fn total_electrons(&self) -> f64 {
        self.baseline() as f64 + self.alpha
    }

    pub fn beta(&self) -> f64 {
        beta_from_alpha(self.baseline(), self.alpha).expect("validated alpha")
    }

    /// HOMO weight of the ensemble entering the potential equations: `β`,
    /// except below one electron where only the one-particle determinant
    /// contributes.
    pub fn potential_fraction(&self) -> f64 {
        if self.baseline() == 0 {
            1.0
        } else {
            self.beta()
        }
    }

    /// Electrons of `spin` with the HOMO weighted by `gamma`.
    pub fn count(&self, spin: Spin, gamma: f64) -> f64 {
        let closed: usize = self.closed[spin.index()]
            .iter()
            .map(|s| s.multiplicity())
            .sum();
        let extra = if spin == self.homo_spin { gamma } else { 0.0 };
        closed as f64 + extra
    }

    pub fn counts(&self, gamma: f64) -> [f64; 2] {
        [self.count(Spin::Up, gamma), self.count(Spin::Down, gamma)]
    }

    /// Subshells whose orbitals are needed per spin, HOMO included.
    pub fn shells(&self, spin: Spin) -> Vec<Shell> {
        let mut shells = self.closed[spin.index()].clone();
        if spin == self.homo_spin {
            shells.push(self.homo);
        }
        shells
    }

    pub fn is_integer(&self) -> bool {
        self.alpha == 0.0 || self.alpha == 1.0
    }
}

/// Radial orbital with its quantum numbers and eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinOrbital {
    pub shell: Shell,
    pub spin: Spin,
    pub energy: f64,
    pub u: RadialFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedOrbital {
    pub orbital: SpinOrbital,
    pub weight: f64,
}

impl WeightedOrbital {
    pub fn l(&self) -> usize {
        self.orbital.shell.l
    }

    pub fn multiplicity(&self) -> f64 {
        self.orbital.shell.multiplicity() as f64
    }
}

/// Spin-resolved one-particle density matrix of the ensemble
/// `(1-γ)|Φ_N⟩⟨Φ_N| + γ|Φ_{N+1}⟩⟨Φ_{N+1}|`, stored as weighted orbitals.
///
/// Closed subshells carry weight 1 over all `2l+1` spatial components, the
/// HOMO carries weight `γ`. A HOMO of weight 0 is kept so that quantities
/// defined through it stay available at integer particle number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDensityMatrix {
    pub channels: [Vec<WeightedOrbital>; 2],
    pub homo_spin: Spin,
    pub gamma: f64,
}

impl EnsembleDensityMatrix {
    pub fn channel(&self, spin: Spin) -> &[WeightedOrbital] {
        &self.channels[spin.index()]
    }

    /// Position of the HOMO within its channel (always the last entry).
    pub fn homo_index(&self) -> usize {
        self.channels[self.homo_spin.index()].len() - 1
    }

    pub fn homo(&self) -> &WeightedOrbital {
        &self.channels[self.homo_spin.index()][self.homo_index()]
    }

    /// `Σ weight × (2l+1)` for one spin.
    pub fn trace(&self, spin: Spin) -> f64 {
        self.channel(spin)
            .iter()
            .map(|o| o.weight * o.multiplicity())
            .sum()
    }

    /// Eigenvalues of the kernel: each weight repeated `2l+1` times, zeros
    /// dropped.
    pub fn occupations(&self, spin: Spin) -> Vec<f64> {
        let mut occ: Vec<f64> = self
            .channel(spin)
            .iter()
            .filter(|o| o.weight > 0.0)
            .flat_map(|o| std::iter::repeat(o.weight).take(o.orbital.shell.multiplicity()))
            .collect();
        occ.sort_by(|a, b| b.total_cmp(a));
        occ
    }

    /// Frobenius norm of `ρ² - ρ` for one spin.
    ///
    /// With `ρ = Σ w_a |a⟩⟨a|` the coefficients of `ρ² - ρ` in the `|a⟩⟨b|`
    /// basis are `M = WSW - W`, and the norm is `√tr(MSMS)` per spatial
    /// component, computed block by block in `l`.
    pub fn idempotency_deviation(&self, grid: &RadialGrid, spin: Spin) -> f64 {
        let orbs = self.channel(spin);
        let mut ls: Vec<usize> = orbs.iter().map(|o| o.l()).collect();
        ls.sort_unstable();
        ls.dedup();
        let mut total = 0.0;
        for l in ls {
            let block: Vec<&WeightedOrbital> = orbs.iter().filter(|o| o.l() == l).collect();
            let m = block.len();
            let s = DMatrix::from_fn(m, m, |i, j| {
                grid.inner(&block[i].orbital.u, &block[j].orbital.u)
            });
            let w = DMatrix::from_diagonal(&DVector::from_iterator(
                m,
                block.iter().map(|o| o.weight),
            ));
            let d = &w * &s * &w - &w;
            let ds = &d * &s;
            total += (2 * l + 1) as f64 * (&ds * &ds).trace();
        }
        total.max(0.0).sqrt()
    }
}

/// Assemble the ensemble density matrix at HOMO weight `gamma`.
pub fn build_density_matrix(
    orbitals: &[SpinOrbital],
    spec: &OccupationSpec,
    gamma: f64,
) -> Result<EnsembleDensityMatrix> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(LhfError::Domain(format!("gamma={gamma} outside [0, 1]")));
    }
    let find = |shell: Shell, spin: Spin| -> Result<SpinOrbital> {
        orbitals
            .iter()
            .find(|o| o.shell == shell && o.spin == spin)
            .cloned()
            .ok_or_else(|| {
                LhfError::Consistency(format!("no orbital supplied for {shell} {spin}"))
            })
    };
    let mut channels: [Vec<WeightedOrbital>; 2] = [Vec::new(), Vec::new()];
    for spin in Spin::BOTH {
        for &shell in &spec.closed[spin.index()] {
            channels[spin.index()].push(WeightedOrbital {
                orbital: find(shell, spin)?,
                weight: 1.0,
            });
        }
    }
    channels[spec.homo_spin.index()].push(WeightedOrbital {
        orbital: find(spec.homo, spec.homo_spin)?,
        weight: gamma,
    });
    Ok(EnsembleDensityMatrix {
        channels,
        homo_spin: spec.homo_spin,
        gamma,
    })
}

/// Angularly integrated spin densities `4π r² n_σ(r)`.
pub fn spin_density(dm: &EnsembleDensityMatrix) -> [RadialFunction; 2] {
    let len = dm
        .channels
        .iter()
        .flatten()
        .map(|o| o.orbital.u.len())
        .next()
        .unwrap_or(0);
    let mut out = [vec![0.0; len], vec![0.0; len]];
    for spin in Spin::BOTH {
        let n = &mut out[spin.index()];
        for o in dm.channel(spin) {
            let c = o.weight * o.multiplicity();
            if c == 0.0 {
                continue;
            }
            for (ni, ui) in n.iter_mut().zip(&o.orbital.u) {
                *ni += c * ui * ui;
            }
        }
    }
    out
}

/// Total angularly integrated density.
pub fn total_density(dm: &EnsembleDensityMatrix) -> RadialFunction {
    let [up, down] = spin_density(dm);
    up.iter().zip(&down).map(|(a, b)| a + b).collect()
}

/// Parse a fill order such as `1s:up, 1s:down, 2s:up`.
pub fn parse_fill_order(text: &str) -> Result<Vec<(Shell, Spin)>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|entry| {
            let (shell, spin) = entry.split_once(':').ok_or_else(|| {
                LhfError::Config(format!("fill entry '{}' must look like 1s:up", entry.trim()))
            })?;
            Ok((shell.parse()?, spin.parse()?))
        })
        .collect()
}

/// Spin-alternating aufbau order `1s↑ 1s↓ 2s↑ 2s↓ 2p↑ 2p↓ 3s↑ 3s↓ 3p↑ 3p↓`.
pub fn default_fill_order() -> Vec<(Shell, Spin)> {
    [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1)]
        .iter()
        .flat_map(|&(n, l)| {
            let shell = Shell { n, l };
            [(shell, Spin::Up), (shell, Spin::Down)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::build_grid;
    use proptest::prelude::*;

    fn sh(s: &str) -> Shell {
        s.parse().unwrap()
    }

    fn hydrogenic(grid: &RadialGrid, z: f64, shell: Shell) -> Vec<f64> {
        grid.r()
            .iter()
            .map(|&r| match (shell.n, shell.l) {
                (1, 0) => 2.0 * z.powf(1.5) * r * (-z * r).exp(),
                (2, 0) => z.powf(1.5) / 2f64.sqrt() * r * (1.0 - z * r / 2.0) * (-z * r / 2.0).exp(),
                (2, 1) => z.powf(2.5) / 24f64.sqrt() * r * r * (-z * r / 2.0).exp(),
                _ => unreachable!(),
            })
            .collect()
    }

    fn orbitals(grid: &RadialGrid, spec: &OccupationSpec) -> Vec<SpinOrbital> {
        let mut out = Vec::new();
        for spin in Spin::BOTH {
            for shell in spec.shells(spin) {
                out.push(SpinOrbital {
                    shell,
                    spin,
                    energy: -spec.z * spec.z / (2.0 * (shell.n * shell.n) as f64),
                    u: hydrogenic(grid, spec.z, shell),
                });
            }
        }
        out
    }

    #[test]
    fn beta_examples() {
        assert!((beta_from_alpha(1, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((beta_from_alpha(2, 0.5).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(beta_from_alpha(3, 0.0).unwrap(), 0.0);
        assert_eq!(beta_from_alpha(3, 1.0).unwrap(), 1.0);
        assert_eq!(beta_from_alpha(0, 0.7).unwrap(), 0.0);
        assert!(beta_from_alpha(2, 1.5).is_err());
        assert!(beta_from_alpha(2, -0.1).is_err());
    }

    #[test]
    fn shell_labels_round_trip() {
        for label in ["1s", "2s", "2p", "3d"] {
            assert_eq!(sh(label).to_string(), label);
        }
        assert!("1p".parse::<Shell>().is_err());
        assert!("xs".parse::<Shell>().is_err());
        assert_eq!(sh("2p").multiplicity(), 3);
        assert_eq!(sh("3s").radial_index(), 2);
        assert_eq!(sh("3p").radial_index(), 1);
    }

    #[test]
    fn spec_validation() {
        let ok = OccupationSpec::new(2.0, vec![sh("1s")], vec![], sh("1s"), Spin::Down, 0.5);
        assert!(ok.is_ok());
        assert!(OccupationSpec::new(2.0, vec![], vec![], sh("2p"), Spin::Up, 0.5).is_err());
        assert!(OccupationSpec::new(2.0, vec![sh("1s")], vec![], sh("1s"), Spin::Up, 0.5).is_err());
        assert!(OccupationSpec::new(2.0, vec![sh("1s"), sh("1s")], vec![], sh("2s"), Spin::Up, 0.5)
            .is_err());
        assert!(OccupationSpec::new(2.0, vec![], vec![], sh("1s"), Spin::Up, 1.2).is_err());
        assert!(OccupationSpec::new(0.0, vec![], vec![], sh("1s"), Spin::Up, 0.2).is_err());
    }

    #[test]
    fn fill_fractional_and_integer_sides() {
        let order = default_fill_order();
        let be = OccupationSpec::from_fill(4.0, &order, 2.9, Side::Below).unwrap();
        assert_eq!(be.homo, sh("2s"));
        assert_eq!(be.homo_spin, Spin::Up);
        assert!((be.alpha - 0.9).abs() < 1e-12);
        assert_eq!(be.baseline(), 2);

        let below = OccupationSpec::from_fill(2.0, &order, 1.0, Side::Below).unwrap();
        assert_eq!((below.homo, below.homo_spin, below.alpha), (sh("1s"), Spin::Up, 1.0));
        assert_eq!(below.baseline(), 0);
        let above = OccupationSpec::from_fill(2.0, &order, 1.0, Side::Above).unwrap();
        assert_eq!((above.homo, above.homo_spin, above.alpha), (sh("1s"), Spin::Down, 0.0));
        assert_eq!(above.baseline(), 1);

        let empty = OccupationSpec::from_fill(1.0, &order, 0.0, Side::Below).unwrap();
        assert_eq!((empty.homo_spin, empty.alpha, empty.baseline()), (Spin::Up, 0.0, 0));

        // Ne: the last filled entry is 2p, so the HOMO is the empty 3s.
        let ne = OccupationSpec::from_fill(10.0, &order, 10.0, Side::Below).unwrap();
        assert_eq!((ne.homo, ne.alpha, ne.baseline()), (sh("3s"), 0.0, 10));

        let mg = OccupationSpec::from_fill(12.0, &order, 11.5, Side::Below).unwrap();
        assert_eq!((mg.homo, mg.homo_spin), (sh("3s"), Spin::Down));
        assert!((mg.total_electrons() - 11.5).abs() < 1e-12);

        assert!(OccupationSpec::from_fill(8.0, &order, 5.5, Side::Below).is_err());
        assert!(OccupationSpec::from_fill(8.0, &order, 100.0, Side::Below).is_err());
        assert!(OccupationSpec::from_fill(8.0, &[], 1.0, Side::Below).is_err());
    }

    #[test]
    fn fill_order_parsing() {
        let order = parse_fill_order("1s:up, 1s:down,2s:up").unwrap();
        assert_eq!(order.len(), 3);
        assert_eq!(order[1], (sh("1s"), Spin::Down));
        assert!(parse_fill_order("1s").is_err());
        assert!(parse_fill_order("1s:sideways").is_err());
    }

    #[test]
    fn potential_fraction_below_one_electron() {
        let h = OccupationSpec::new(1.0, vec![], vec![], sh("1s"), Spin::Up, 0.3).unwrap();
        assert_eq!(h.beta(), 0.0);
        assert_eq!(h.potential_fraction(), 1.0);
        let he = OccupationSpec::new(2.0, vec![sh("1s")], vec![], sh("1s"), Spin::Down, 0.3).unwrap();
        assert!((he.potential_fraction() - 0.3 / 1.7).abs() < 1e-15);
    }

    #[test]
    fn beryllium_trace_and_occupations() {
        let grid = build_grid(4.0, 400, 40.0).unwrap();
        let spec =
            OccupationSpec::new(4.0, vec![sh("1s")], vec![sh("1s")], sh("2s"), Spin::Up, 0.9).unwrap();
        let beta = spec.beta();
        let orbs = orbitals(&grid, &spec);
        let dm = build_density_matrix(&orbs, &spec, beta).unwrap();
        assert!((dm.trace(Spin::Up) - (1.0 + beta)).abs() < 1e-14);
        assert!((dm.trace(Spin::Down) - 1.0).abs() < 1e-14);
        assert_eq!(dm.occupations(Spin::Up), vec![1.0, beta]);
        assert_eq!(dm.homo().orbital.shell, sh("2s"));

        let [up, down] = spin_density(&dm);
        assert!((grid.integrate(&up) - (1.0 + beta)).abs() < 1e-8);
        assert!((grid.integrate(&down) - 1.0).abs() < 1e-8);
        let total = total_density(&dm);
        assert!((grid.integrate(&total) - (2.0 + beta)).abs() < 1e-8);
    }

    #[test]
    fn singlet_occupations() {
        let grid = build_grid(2.0, 400, 40.0).unwrap();
        let spec =
            OccupationSpec::new(2.0, vec![sh("1s")], vec![], sh("1s"), Spin::Down, 0.6).unwrap();
        let dm = build_density_matrix(&orbitals(&grid, &spec), &spec, 0.6).unwrap();
        assert_eq!(dm.occupations(Spin::Up), vec![1.0]);
        assert_eq!(dm.occupations(Spin::Down), vec![0.6]);
    }

    #[test]
    fn idempotent_only_at_integer_weight() {
        let grid = build_grid(3.0, 600, 40.0).unwrap();
        let spec = OccupationSpec::new(
            3.0,
            vec![sh("1s"), sh("2p")],
            vec![sh("1s")],
            sh("2s"),
            Spin::Up,
            0.5,
        )
        .unwrap();
        let orbs = orbitals(&grid, &spec);
        for gamma in [0.0, 1.0] {
            let dm = build_density_matrix(&orbs, &spec, gamma).unwrap();
            assert!(dm.idempotency_deviation(&grid, Spin::Up) < 1e-7);
            assert!(dm.idempotency_deviation(&grid, Spin::Down) < 1e-7);
        }
        let dm = build_density_matrix(&orbs, &spec, 0.5).unwrap();
        assert!((dm.idempotency_deviation(&grid, Spin::Up) - 0.25).abs() < 1e-7);
        assert!(dm.idempotency_deviation(&grid, Spin::Down) < 1e-7);
    }

    #[test]
    fn missing_orbital_is_reported() {
        let spec =
            OccupationSpec::new(2.0, vec![sh("1s")], vec![], sh("1s"), Spin::Down, 0.5).unwrap();
        assert!(matches!(
            build_density_matrix(&[], &spec, 0.5),
            Err(LhfError::Consistency(_))
        ));
        let grid = build_grid(2.0, 300, 40.0).unwrap();
        assert!(build_density_matrix(&orbitals(&grid, &spec), &spec, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn beta_is_monotone_and_bounded(n in 1usize..40, a in 0.0f64..1.0, d in 0.0f64..0.5) {
            let b = beta_from_alpha(n, a).unwrap();
            let b2 = beta_from_alpha(n, (a + d).min(1.0)).unwrap();
            prop_assert!(b <= a + 1e-15);
            prop_assert!(b >= 0.0);
            prop_assert!(b2 >= b - 1e-15);
        }

        #[test]
        fn fill_reproduces_particle_number(n in 0.0f64..4.0, above in any::<bool>()) {
            let side = if above { Side::Above } else { Side::Below };
            let spec = OccupationSpec::from_fill(4.0, &default_fill_order(), n, side).unwrap();
            prop_assert!((spec.total_electrons() - n).abs() < 1e-12);
        }
    }
}
