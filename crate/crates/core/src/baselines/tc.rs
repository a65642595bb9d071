use crate::error::Result;
use crate::guard;
use crate::pauli::{PauliSum, C64};

/// Coefficients with `|Im| <= 1e-12` are treated as real.
pub const IMAG_CLEAN_TOL: f64 = 1e-12;

/// `e^{-J} H e^{J}` with `J = sum_i g_i Z_i`, projected back onto Pauli
/// strings.
pub fn synthesize_tc(h: &PauliSum, g: &[f64]) -> Result<PauliSum> {
    let n = h.n_qubits();
    if g.len() != n {
        return Err(crate::Error::dims(format!(
            "{} Jastrow coefficients for {n} qubits",
            g.len()
        )));
    }
    guard::check(n, guard::channel_limit())?;
    let mut m = h.dense_matrix()?;
    // J is diagonal: J|x> = j(x)|x>, with Z_i = +1 on bit 0
    let j: Vec<f64> = (0..1usize << n)
        .map(|x| {
            g.iter()
                .enumerate()
                .map(|(i, gi)| if x >> (n - 1 - i) & 1 == 0 { *gi } else { -gi })
                .sum()
        })
        .collect();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            m[(r, c)] *= C64::new((j[c] - j[r]).exp(), 0.0);
        }
    }
    Ok(PauliSum::from_dense(&m)?.clean_imaginary(IMAG_CLEAN_TOL))
}
