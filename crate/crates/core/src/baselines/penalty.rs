use crate::circuit::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::pauli::{number_operator, PauliSum};
use crate::varqite::{energy, Evaluator};

/// Spin and particle-number penalties added to the BFGS cost.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySpec {
    pub s2_operator: PauliSum,
    pub number_operator: PauliSum,
    pub n_electrons: usize,
}

impl PenaltySpec {
    /// Builds the number operator for `s2_operator`'s qubit count.
    pub fn new(s2_operator: PauliSum, n_electrons: usize) -> Result<Self> {
        if !s2_operator.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        let number_operator = number_operator(s2_operator.n_qubits())?;
        if n_electrons > s2_operator.n_qubits() {
            return Err(Error::invalid(format!(
                "{n_electrons} electrons do not fit in {} spin orbitals",
                s2_operator.n_qubits()
            )));
        }
        Ok(PenaltySpec {
            s2_operator,
            number_operator,
            n_electrons,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.s2_operator.n_qubits()
    }
}

/// `Re<H> + |<S^2>|^2 + |<N> - N_ele|^2`.
pub fn penalty_cost(
    spec: &AnsatzSpec,
    params: &ParamVector,
    h: &PauliSum,
    penalty: &PenaltySpec,
    evaluator: &Evaluator,
) -> Result<f64> {
    if !h.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    if penalty.n_qubits() != h.n_qubits() || penalty.number_operator.n_qubits() != h.n_qubits() {
        return Err(Error::dims(
            "penalty operators and Hamiltonian differ in qubit count",
        ));
    }
    let e = energy(spec, params, h, evaluator, false)?;
    let s2 = energy(spec, params, &penalty.s2_operator, evaluator, false)?;
    let n = energy(spec, params, &penalty.number_operator, evaluator, false)?;
    let n_shift = n - crate::pauli::C64::new(penalty.n_electrons as f64, 0.0);
    Ok(e.re + s2.norm_sqr() + n_shift.norm_sqr())
}
