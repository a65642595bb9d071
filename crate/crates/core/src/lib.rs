//! Quantum-circuit matrix product states optimized by variational imaginary
//! time evolution.

pub mod baselines;
pub mod channel;
pub mod circuit;
pub mod error;
pub mod guard;
pub mod harness;
pub mod mps;
pub mod pauli;
pub mod statevec;
pub mod varqite;

pub use error::{Error, Result};
