//! Numerical substrate for spherically symmetric quantities.

pub mod eigen;
pub mod grid;
pub mod poisson;

pub use eigen::{count_nodes, solve_bound_states, BoundState};
pub use grid::{build_grid, RadialFunction, RadialGrid, DEFAULT_POINTS, DEFAULT_RMAX};
pub use poisson::{hartree_potential, multipole_integral_k, multipole_of_product};
