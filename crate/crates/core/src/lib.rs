//! Energy-capacity wave-particle duality for single-qubit batteries.
//!
//! A qubit state `rho` is charged against a rank-one Hamiltonian `E|psi><psi|`.
//! Three work capacities are defined by the unitaries allowed on it, and they
//! obey `C_p^2 = C_d^2 + C_v^2` together with
//! `max(C_d, C_v) <= C_p <= C_d + C_v`. The crate computes the capacities in
//! closed form, checks them against brute-force oracles, simulates the
//! photon-counting experiment that measures them, and reconstructs states by
//! maximum-likelihood tomography.

pub mod capacity;
pub mod counts;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod optics;
pub mod qstate;
pub mod simplex;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{Matrix2, C64};
