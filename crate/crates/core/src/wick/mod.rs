//! Exact Fock-space checks of the density-matrix factorization used by the
//! exchange condition.

pub mod fock;
pub mod lattice;
pub mod pairing;
pub mod rdm;
pub mod suite;

pub use fock::{random_unitary, DeterminantState, FractionalEnsemble, Op};
pub use lattice::{lhf_condition_discrete, DiscreteResidual, LatticeModel};
pub use pairing::{generalized_wick_check, WickCheck};
pub use rdm::{
    idempotency_check, pair_density, rdm_bruteforce, triple_density, wick_factorization,
    IdempotencyReport, ReducedDensityMatrix,
};
pub use suite::{run_trial, run_wick_suite, TrialOutcome, WickSuiteReport};
