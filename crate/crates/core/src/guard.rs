//! Size guards for dense (exponential-memory) code paths.
//!
//! Both limits can be raised or lowered at run time with the
//! `QCMPS_GUARD_QUBITS` environment variable, which overrides every guard.

use crate::error::{Error, Result};

/// Default qubit limit for dense Hamiltonian matrices and exact diagonalization.
pub const DENSE_MATRIX_QUBITS: usize = 14;
/// Default qubit limit for the channel-level reference simulator.
pub const CHANNEL_SIM_QUBITS: usize = 12;

pub const GUARD_ENV: &str = "QCMPS_GUARD_QUBITS";

fn env_override() -> Option<usize> {
    std::env::var(GUARD_ENV).ok()?.trim().parse().ok()
}

pub fn dense_limit() -> usize {
    env_override().unwrap_or(DENSE_MATRIX_QUBITS)
}

pub fn channel_limit() -> usize {
    env_override().unwrap_or(CHANNEL_SIM_QUBITS)
}

pub(crate) fn check(requested: usize, limit: usize) -> Result<()> {
    if requested > limit {
        Err(Error::GuardExceeded { requested, limit })
    } else {
        Ok(())
    }
}
