//! Localized Hartree-Fock exchange for fractional-number ensembles.

pub mod analysis;
pub mod kernels;
pub mod scf;
pub mod solve;

pub use analysis::{asymptotic_fit, default_window, potential_jump, PotentialJump};
pub use kernels::{angular_factor, ChannelKernels};
pub use scf::{
    external_potential, orthonormalize, scf, solve_orbitals, total_energy_dft,
    total_energy_direct, DftEnergy, PotentialSet, ScfParams, ScfResult,
};
pub use solve::{compute_g, fix_constants, solve_exchange, vx_update, ExchangeSolution};
