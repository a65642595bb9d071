//! Assemble the VarQITE linear system and take one imaginary-time step.
//!
//! ```text
//! cargo run --example natural_gradient
//! ```

use qcmps::circuit::{build_ansatz, ParamVector};
use qcmps::pauli::PauliSum;
use qcmps::varqite::{assemble_system, energy, solve_direction, Evaluator, DEFAULT_REGULARIZATION};

fn main() -> qcmps::Result<()> {
    let h = PauliSum::read_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tfim3.toml"))?;
    let spec = build_ansatz(1, h.n_qubits(), 1)?;
    let params = ParamVector::random(spec.n_params(), 3);

    let sys = assemble_system(&spec, &params, &h, &Evaluator::Mps, true)?;
    println!("{} parameters, E = {:.10}", sys.n_params(), sys.energy.re);
    println!(
        "max |A_ii - 1/4| = {:.1e}, symmetry residual {:.1e}",
        sys.max_diagonal_deviation(),
        sys.symmetry_residual()
    );
    let eig = sys.a_matrix.clone().symmetric_eigen().eigenvalues;
    println!("A eigenvalues in [{:.2e}, {:.3}]", eig.min(), eig.max());

    // C is minus half the energy gradient; check one entry by central differences.
    let (j, h_fd) = (5, 1e-5);
    let e = |p: &ParamVector| energy(&spec, p, &h, &Evaluator::Mps, true).map(|e| e.re);
    let fd = (e(&params.with_entry(j, params[j] + h_fd))?
        - e(&params.with_entry(j, params[j] - h_fd))?)
        / (2.0 * h_fd);
    println!(
        "C[{j}] = {:.10}, -dE/2 = {:.10}",
        sys.c_vector[j],
        -0.5 * fd
    );

    let sol = solve_direction(&sys, DEFAULT_REGULARIZATION)?;
    println!(
        "direction norm {:.4}, relative residual {:.1e}",
        sol.direction.norm(),
        sol.residual
    );
    for step in [0.02, 0.1, 0.3] {
        let next = params.displaced(sol.direction.as_slice(), step);
        println!("step {step}: E = {:.10}", e(&next)?);
    }
    Ok(())
}
