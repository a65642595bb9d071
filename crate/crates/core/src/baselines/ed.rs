use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliSum, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Sorted by real part, ties by `|Im|`.
    pub eigenvalues: Vec<C64>,
    pub ground_energy: C64,
    pub hermitian_input: bool,
}

fn order(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re)
        .then(a.im.abs().total_cmp(&b.im.abs()))
}

/// Full dense spectrum. Hermitian sums go through a symmetric solver, all
/// others through a complex Schur decomposition.
pub fn exact_diagonalize(h: &PauliSum) -> Result<SpectrumResult> {
    let m = h.dense_matrix()?;
    let mut eigenvalues: Vec<C64> = if h.is_hermitian() {
        let eig = m
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or_else(|| non_convergence("symmetric"))?;
        eig.eigenvalues.iter().map(|&e| C64::new(e, 0.0)).collect()
    } else {
        let schur = m
            .try_schur(f64::EPSILON, 0)
            .ok_or_else(|| non_convergence("Schur"))?;
        schur.unpack().1.diagonal().iter().copied().collect()
    };
    eigenvalues.sort_by(order);
    let ground_energy = eigenvalues[0];
    Ok(SpectrumResult {
        eigenvalues,
        ground_energy,
        hermitian_input: h.is_hermitian(),
    })
}

fn non_convergence(solver: &str) -> Error {
    Error::NumericalFailure {
        message: format!("{solver} eigensolver did not converge"),
        condition_estimate: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn one(c: C64, text: &str, n: usize) -> (C64, PauliString) {
        (c, PauliString::parse(n, text).unwrap())
    }

    #[test]
    fn single_z() {
        let h = PauliSum::new(1, [one(C64::new(1.0, 0.0), "Z0", 1)]).unwrap();
        let s = exact_diagonalize(&h).unwrap();
        assert_eq!(s.ground_energy, C64::new(-1.0, 0.0));
        assert!((s.eigenvalues[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(s.hermitian_input);
    }

    #[test]
    fn nilpotent_raising_operator() {
        let h = PauliSum::new(
            1,
            [
                one(C64::new(0.5, 0.0), "X0", 1),
                one(C64::new(0.0, 0.5), "Y0", 1),
            ],
        )
        .unwrap();
        let s = exact_diagonalize(&h).unwrap();
        assert!(!s.hermitian_input);
        assert!(s.eigenvalues.iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn hermitian_paths_agree() {
        let h = PauliSum::new(
            3,
            [
                one(C64::new(0.4, 0.0), "X0 Y1", 3),
                one(C64::new(-1.1, 0.0), "Z2", 3),
                one(C64::new(0.3, 0.0), "Y0 Y1 X2", 3),
                one(C64::new(0.2, 0.0), "Z0 Z1", 3),
            ],
        )
        .unwrap();
        let s = exact_diagonalize(&h).unwrap();
        let mut general: Vec<C64> = h
            .dense_matrix()
            .unwrap()
            .schur()
            .unpack()
            .1
            .diagonal()
            .iter()
            .copied()
            .collect();
        general.sort_by(order);
        for (a, b) in s.eigenvalues.iter().zip(&general) {
            assert!((a - b).norm() < 1e-10);
            assert!(b.im.abs() < 1e-10);
        }
    }
}
