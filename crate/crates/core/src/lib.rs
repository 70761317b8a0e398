//! Statevector simulation and landscape-aware optimisers for variational
//! eigensolvers built from excitation operators.

pub mod adaptive;
pub mod ansatz;
pub mod cli;
pub mod dense;
pub mod error;
pub mod exact;
pub mod excitations;
pub mod fixture;
pub mod fourier;
pub mod hamiltonian;
pub mod noise;
pub mod optimizers;
pub mod pauli;
pub mod state;
pub mod trig_min;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
