//! BFGS on a penalized cost that pins the particle number and total spin.
//!
//! ```text
//! cargo run --example penalty_bfgs
//! ```

use qcmps::baselines::{bfgs_minimize, exact_diagonalize, penalty_cost, BfgsConfig, PenaltySpec};
use qcmps::circuit::{build_ansatz, ParamVector};
use qcmps::pauli::{number_operator, PauliSum};
use qcmps::varqite::{energy, Evaluator};

fn main() -> qcmps::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let h = PauliSum::read_file(format!("{dir}/pair2.toml"))?;
    let s2 = PauliSum::read_file(format!("{dir}/s2_pair.toml"))?;
    let n_op = number_operator(h.n_qubits())?;
    println!(
        "ED ground energy {:.10}",
        exact_diagonalize(&h)?.ground_energy.re
    );

    let spec = build_ansatz(1, h.n_qubits(), 1)?;
    let theta0 = ParamVector::random(spec.n_params(), 4);
    let penalty = PenaltySpec::new(s2.clone(), 2)?;
    let mps = Evaluator::Mps;

    let plain = |p: &ParamVector| energy(&spec, p, &h, &mps, false).map(|e| e.re);
    let penalized = |p: &ParamVector| penalty_cost(&spec, p, &h, &penalty, &mps);
    let runs = [
        (
            "plain",
            bfgs_minimize(plain, &theta0, &BfgsConfig::default(), true)?,
        ),
        (
            "penalized",
            bfgs_minimize(penalized, &theta0, &BfgsConfig::default(), true)?,
        ),
    ];
    for (name, r) in runs {
        let e = |op: &PauliSum| energy(&spec, &r.params, op, &mps, false).map(|e| e.re);
        println!(
            "{name:>9}: {:?} after {} steps, cost {:.10}, E {:.10}, <N> {:.6}, <S^2> {:.2e}",
            r.status,
            r.iterations(),
            r.cost,
            e(&h)?,
            e(&n_op)?,
            e(&s2)?
        );
    }
    Ok(())
}
