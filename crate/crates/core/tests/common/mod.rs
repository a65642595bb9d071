#![allow(dead_code)]

use qcmps::channel::pure_ansatz_state;
use qcmps::circuit::{AnsatzSpec, ParamVector};
use qcmps::pauli::{PauliAxis, PauliString, PauliSum, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_string(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    let ops: Vec<(usize, PauliAxis)> = (0..n)
        .filter_map(|q| match rng.gen_range(0..4) {
            0 => None,
            1 => Some((q, PauliAxis::X)),
            2 => Some((q, PauliAxis::Y)),
            _ => Some((q, PauliAxis::Z)),
        })
        .collect();
    PauliString::new(n, ops).unwrap()
}

/// Random sum with real (Hermitian) or complex coefficients.
pub fn random_sum(n: usize, n_terms: usize, complex: bool, rng: &mut ChaCha8Rng) -> PauliSum {
    let terms: Vec<(C64, PauliString)> = (0..n_terms)
        .map(|_| {
            let im = if complex {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            (c(rng.gen_range(-1.0..1.0), im), random_string(n, rng))
        })
        .collect();
    PauliSum::new(n, terms).unwrap()
}

pub fn tfim(n: usize) -> PauliSum {
    let mut terms = Vec::new();
    for i in 0..n {
        terms.push((
            c(-1.0, 0.0),
            PauliString::parse(n, &format!("X{i}")).unwrap(),
        ));
    }
    for i in 0..n - 1 {
        terms.push((
            c(-1.0, 0.0),
            PauliString::parse(n, &format!("Z{i} Z{}", i + 1)).unwrap(),
        ));
    }
    PauliSum::new(n, terms).unwrap()
}

/// `(H (x) I_bond) v` for a vector over physical then bond qubits, from the
/// dense matrix of `h`.
pub fn apply_on_physical(h: &PauliSum, v: &[C64], n_bond: usize) -> Vec<C64> {
    let m = h.dense_matrix().unwrap();
    let nb = 1usize << n_bond;
    let dim = m.nrows();
    let mut out = vec![c(0.0, 0.0); v.len()];
    for x in 0..dim {
        for y in 0..dim {
            let hxy = m[(x, y)];
            if hxy == c(0.0, 0.0) {
                continue;
            }
            for b in 0..nb {
                out[x * nb + b] += hxy * v[y * nb + b];
            }
        }
    }
    out
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `<psi|H|psi>` from the gate-by-gate state and the dense Hamiltonian.
pub fn dense_energy(spec: &AnsatzSpec, params: &ParamVector, h: &PauliSum) -> C64 {
    let psi = pure_ansatz_state(spec, params).unwrap();
    inner(&psi, &apply_on_physical(h, &psi, spec.n_virtual()))
}

pub fn fd_gradient(spec: &AnsatzSpec, params: &ParamVector, h: &PauliSum, step: f64) -> Vec<f64> {
    (0..params.len())
        .map(|i| {
            let up = dense_energy(spec, &params.with_entry(i, params[i] + step), h).re;
            let down = dense_energy(spec, &params.with_entry(i, params[i] - step), h).re;
            (up - down) / (2.0 * step)
        })
        .collect()
}

pub fn fd_derivatives(spec: &AnsatzSpec, params: &ParamVector, step: f64) -> Vec<Vec<C64>> {
    (0..params.len())
        .map(|i| {
            let up = pure_ansatz_state(spec, &params.with_entry(i, params[i] + step)).unwrap();
            let down = pure_ansatz_state(spec, &params.with_entry(i, params[i] - step)).unwrap();
            up.iter()
                .zip(&down)
                .map(|(u, d)| (u - d) / (2.0 * step))
                .collect()
        })
        .collect()
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}
