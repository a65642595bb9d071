//! VarQITE with adaptive steps on a single-qubit Z Hamiltonian.
//!
//! ```text
//! cargo run --example varqite_toy
//! ```

use qcmps::circuit::{build_ansatz, ParamVector};
use qcmps::pauli::PauliSum;
use qcmps::varqite::{run, VarqiteConfig};

fn main() -> qcmps::Result<()> {
    let h = PauliSum::read_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy_z.toml"))?;
    let spec = build_ansatz(1, 1, 1)?;
    let config = VarqiteConfig::default();

    for seed in 0..3 {
        let trace = run(
            &spec,
            &ParamVector::random(spec.n_params(), seed),
            &h,
            &config,
        )?;
        println!(
            "seed {seed}: {:?} after {} iterations",
            trace.status,
            trace.iterations()
        );
        for r in trace.records.iter().take(6) {
            println!(
                "  iter {:>2}  E = {:+.10}  step {:.2}  |dir| {:.3e}",
                r.iter, r.energy.re, r.step, r.dir_norm
            );
        }
        println!(
            "  final E = {:+.12}, argmin held: {}",
            trace.final_energy().re,
            trace.argmin_holds()
        );
    }
    Ok(())
}
