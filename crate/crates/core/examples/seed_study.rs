//! Ten-seed comparison of VarQITE and BFGS on the 3-qubit Ising chain.
//!
//! ```text
//! cargo run --release --example seed_study
//! ```

use qcmps::baselines::{
    exact_diagonalize, run_seed_study, BfgsConfig, Optimizer, StudySpec, CHEMICAL_ACCURACY,
};
use qcmps::circuit::build_ansatz;
use qcmps::pauli::PauliSum;
use qcmps::varqite::{Evaluator, VarqiteConfig};

fn main() -> qcmps::Result<()> {
    let h = PauliSum::read_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tfim3.toml"))?;
    let ground = exact_diagonalize(&h)?.ground_energy.re;
    let seeds: Vec<u64> = (0..10).collect();

    let arms = [
        Optimizer::Varqite(VarqiteConfig::default()),
        Optimizer::Bfgs {
            config: BfgsConfig::default(),
            penalty: None,
            evaluator: Evaluator::Mps,
        },
    ];
    for optimizer in arms {
        let spec = StudySpec {
            ansatz: build_ansatz(1, 3, 1)?,
            hamiltonian: h.clone(),
            optimizer,
            ground_energy: Some(ground),
            threshold: CHEMICAL_ACCURACY,
            bin_edges: vec![0.0, 25.0, 50.0, 100.0, 200.0, 501.0],
            deterministic: false,
        };
        let study = run_seed_study(&spec, &seeds)?;
        println!(
            "{}: {}/{} within chemical accuracy",
            study.optimizer,
            study.success_count,
            seeds.len()
        );
        for o in &study.outcomes {
            println!(
                "  seed {}: {} iterations, error {:.1e}",
                o.seed,
                o.iterations,
                o.error.unwrap_or(f64::NAN)
            );
        }
        let hist = &study.iteration_histogram;
        for (k, count) in hist.counts.iter().enumerate() {
            println!(
                "  [{:>3}, {:>3}) {}",
                hist.edges[k],
                hist.edges[k + 1],
                "#".repeat(*count)
            );
        }
    }
    Ok(())
}
