//! Hadamard-test circuits with mid-circuit reset, simulated as a channel and
//! as an equivalent pure circuit, checked against the MPS engine.
//!
//! ```text
//! cargo run --example channel_validation
//! ```

use qcmps::channel::{hadamard_test_expectation, simulate_equivalent_pure, Part, ShotPlan};
use qcmps::circuit::{build_ansatz, ParamVector};
use qcmps::mps::{overlap, tensors_from_params};
use qcmps::pauli::PauliString;

fn main() -> qcmps::Result<()> {
    let spec = build_ansatz(1, 3, 1)?;
    let params = ParamVector::random(spec.n_params(), 11);
    let state = tensors_from_params(&spec, &params)?;

    for text in ["Z0", "X0 X1", "Y1 Z2", "X0 Y1 Z2"] {
        let p = PauliString::parse(3, text)?;
        let exact = overlap(&state, &state, Some(&p))?;
        let re = hadamard_test_expectation(&spec, &params, &p, Part::Real, None)?;
        let im = hadamard_test_expectation(&spec, &params, &p, Part::Imaginary, None)?;
        println!(
            "{text:>9}: mps {:+.12} channel {re:+.12} (Im {im:+.1e})",
            exact.re
        );
    }

    let p = PauliString::parse(3, "X0 X1")?;
    let table = simulate_equivalent_pure(&spec, &params, &p, Part::Real)?;
    println!(
        "\npure circuit with {} redundant qubits: total probability {:.12}",
        table.n_redundant,
        table.total()
    );
    println!(
        "  marginal P(0) - P(1)        = {:+.12}",
        table.marginal_value()
    );
    println!(
        "  post-selected on |0...0>    = {:+.12}",
        table.conditioned_value()
    );

    println!("\nfinite-shot estimates of <X0 X1>:");
    for shots in [100, 10_000, 1_000_000] {
        let plan = ShotPlan::new(shots, 5)?;
        let v = hadamard_test_expectation(&spec, &params, &p, Part::Real, Some(&plan))?;
        println!("  {shots:>9} shots: {v:+.6}");
    }
    Ok(())
}
