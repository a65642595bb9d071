//! In-place gate kernels on dense state vectors.
//!
//! Register convention matches [`crate::pauli`]: qubit 0 is the most
//! significant bit of the basis index.

use crate::pauli::C64;

pub type Gate1 = [[C64; 2]; 2];

#[inline]
fn bit(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - 1 - q)
}

pub fn apply_1q(state: &mut [C64], n_qubits: usize, q: usize, g: &Gate1) {
    let b = bit(n_qubits, q);
    for i in 0..state.len() {
        if i & b == 0 {
            let (a0, a1) = (state[i], state[i | b]);
            state[i] = g[0][0] * a0 + g[0][1] * a1;
            state[i | b] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
}

/// Applies `g` on `target` where `control` holds `control_value`.
pub fn apply_controlled_1q(
    state: &mut [C64],
    n_qubits: usize,
    control: usize,
    control_value: bool,
    target: usize,
    g: &Gate1,
) {
    let c = bit(n_qubits, control);
    let b = bit(n_qubits, target);
    for i in 0..state.len() {
        if i & b == 0 && ((i & c) != 0) == control_value {
            let (a0, a1) = (state[i], state[i | b]);
            state[i] = g[0][0] * a0 + g[0][1] * a1;
            state[i | b] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
}

pub fn apply_cnot(state: &mut [C64], n_qubits: usize, control: usize, target: usize) {
    let c = bit(n_qubits, control);
    let t = bit(n_qubits, target);
    for i in 0..state.len() {
        if i & c != 0 && i & t == 0 {
            state.swap(i, i | t);
        }
    }
}

pub fn apply_swap(state: &mut [C64], n_qubits: usize, a: usize, b: usize) {
    let (ba, bb) = (bit(n_qubits, a), bit(n_qubits, b));
    for i in 0..state.len() {
        if i & ba != 0 && i & bb == 0 {
            state.swap(i, (i & !ba) | bb);
        }
    }
}

pub fn conj_gate(g: &Gate1) -> Gate1 {
    [
        [g[0][0].conj(), g[0][1].conj()],
        [g[1][0].conj(), g[1][1].conj()],
    ]
}

pub fn hadamard() -> Gate1 {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

/// `S^dagger = diag(1, -i)`.
pub fn s_dagger() -> Gate1 {
    let z = C64::new(0.0, 0.0);
    [[C64::new(1.0, 0.0), z], [z, C64::new(0.0, -1.0)]]
}

pub fn norm_sqr(state: &[C64]) -> f64 {
    state.iter().map(|a| a.norm_sqr()).sum()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
