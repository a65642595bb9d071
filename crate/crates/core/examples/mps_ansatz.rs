//! Build a QCMPS ansatz, contract it as an MPS and check its tensors.
//!
//! ```text
//! cargo run --example mps_ansatz
//! ```

use qcmps::circuit::{block_unitary, build_ansatz, ParamVector};
use qcmps::mps::{expectation, tensors_from_params};
use qcmps::pauli::PauliSum;

fn main() -> qcmps::Result<()> {
    let h = PauliSum::read_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tfim3.toml"))?;

    // Two bond qubits (D = 4), one block per physical qubit, two layers.
    let spec = build_ansatz(2, h.n_qubits(), 2)?;
    println!(
        "D = {}, {} blocks of width {}, {} parameters",
        spec.bond_dim(),
        spec.n_blocks(),
        spec.block_width(),
        spec.n_params()
    );

    let params = ParamVector::random(spec.n_params(), 7);
    let u = block_unitary(&spec, 0, &params)?;
    println!("block 0 unitary is {}x{}", u.nrows(), u.ncols());

    let state = tensors_from_params(&spec, &params)?;
    for (k, t) in state.tensors().iter().enumerate() {
        println!(
            "tensor {k}: bond {}, isometry residual {:.1e}",
            t.bond_dim(),
            t.isometry_residual()
        );
    }
    let psi = state.to_statevector();
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    println!("statevector length {}, norm {:.15}", psi.len(), norm);
    println!("<H> = {:.10}", expectation(&state, &h)?);

    // Zero angles leave only the CNOT skeleton: a permutation of basis states.
    let skeleton = block_unitary(&spec, 0, &ParamVector::zeros(spec.n_params()))?;
    let perm: Vec<usize> = (0..skeleton.ncols())
        .map(|c| {
            (0..skeleton.nrows())
                .find(|&r| skeleton[(r, c)].norm() > 0.5)
                .unwrap()
        })
        .collect();
    println!("zero-angle block permutes basis states as {perm:?}");
    Ok(())
}
