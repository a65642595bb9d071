//! Load a qubit Hamiltonian, inspect it, and diagonalize it exactly.
//!
//! ```text
//! cargo run --example hamiltonian_ed
//! ```

use qcmps::baselines::exact_diagonalize;
use qcmps::pauli::{number_operator, PauliSum};

fn main() -> qcmps::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tfim3.toml");
    let h = PauliSum::read_file(path)?;
    println!(
        "{} qubits, {} terms, hermitian = {}",
        h.n_qubits(),
        h.len(),
        h.is_hermitian()
    );
    for (c, s) in h.terms() {
        println!(
            "  {:+.3} {}",
            c.re,
            if s.is_identity() {
                "I".to_string()
            } else {
                s.to_string()
            }
        );
    }

    let spectrum = exact_diagonalize(&h)?;
    println!("ground energy {:.12}", spectrum.ground_energy.re);
    let levels: Vec<String> = spectrum
        .eigenvalues
        .iter()
        .map(|e| format!("{:.4}", e.re))
        .collect();
    println!("spectrum [{}]", levels.join(", "));

    // Sums compose: H + 0.5 N shifts every level by half its particle number.
    let shifted = h.add(&number_operator(h.n_qubits())?.scale(0.5.into())?)?;
    println!(
        "ground energy of H + N/2: {:.12}",
        exact_diagonalize(&shifted)?.ground_energy.re
    );

    println!("\ncanonical file form:\n{}", h.to_toml_string());
    Ok(())
}
