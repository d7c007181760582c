pub mod analytic;
pub mod cli;
pub mod error;
pub mod lhf;
pub mod occupations;
pub mod radial;
pub mod wick;

pub use error::{LhfError, Result};
