//! Unified Lagrangian-Hamiltonian (Skinner-Rusk) formalism for first-order
//! field theories on trivial bundles `R^m x R^N -> R^m`.
//!
//! From a Lagrangian `L(x, y, v)` the crate builds the coupling function,
//! the constraint submanifolds `W0` and `W1`, the forms `Theta_0`/`Omega_0`,
//! the Legendre maps and the Hamiltonian, evaluates the Euler-Lagrange and
//! Hamilton-De Donder-Weyl equations, and solves the Euler-Lagrange Dirichlet
//! problem on rectangles for `m = 2, N = 1`.

pub mod bundles;
pub mod checks;
pub mod error;
pub mod exterior;
pub mod field_eqs;
pub mod sample;
pub mod solver;
pub mod symbolic;

pub use error::{Error, Result};
