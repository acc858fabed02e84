//! Inverse-subordinator densities, subordinated heat kernels and their
//! Cesaro means, with numerical Laplace inversion, Monte Carlo path
//! sampling and a nonlocal (jump) heat-kernel counterpart.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod asymptotics;
pub mod error;
pub mod kernel;
pub mod laplace;
pub mod montecarlo;
pub mod nonlocal;
pub mod quad;
pub mod specfun;
pub mod subordinator;

pub use error::{Error, Result};
pub use subordinator::{KernelClass, SubordinatorSpec};
