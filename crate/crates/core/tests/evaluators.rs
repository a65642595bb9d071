mod common;

use common::*;
use proptest::prelude::*;
use qcmps::channel::{
    ansatz_density, hadamard_test_expectation, pure_ansatz_state, simulate_equivalent_pure,
    varqite_test_overlaps, OverlapTarget, Part, ShotPlan,
};
use qcmps::circuit::{build_ansatz, ParamVector};
use qcmps::mps::{overlap, tensors_from_params, xi_state};
use qcmps::pauli::{PauliString, PauliSum};
use qcmps::varqite::{assemble_system, energy, Evaluator};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn channel_expectations_match_mps(n_virtual in 1usize..=2, n_orb in 1usize..=4, seed in any::<u64>()) {
        let spec = build_ansatz(n_virtual, n_orb, 1).unwrap();
        let params = ParamVector::random(spec.n_params(), seed);
        let state = tensors_from_params(&spec, &params).unwrap();
        let p = random_string(n_orb, &mut rng(seed));
        let want = overlap(&state, &state, Some(&p)).unwrap();
        let re = hadamard_test_expectation(&spec, &params, &p, Part::Real, None).unwrap();
        let im = hadamard_test_expectation(&spec, &params, &p, Part::Imaginary, None).unwrap();
        prop_assert!((re - want.re).abs() < 1e-10);
        prop_assert!((im - want.im).abs() < 1e-10);
    }

    #[test]
    fn derivative_overlaps_match_mps(n_orb in 1usize..=3, seed in any::<u64>()) {
        let spec = build_ansatz(1, n_orb, 1).unwrap();
        let params = ParamVector::random(spec.n_params(), seed);
        let mut r = rng(seed);
        let i = rand::Rng::gen_range(&mut r, 0..spec.n_params());
        let j = rand::Rng::gen_range(&mut r, 0..spec.n_params());
        let want = overlap(&xi_state(&spec, &params, i).unwrap(), &xi_state(&spec, &params, j).unwrap(), None).unwrap();
        let re = varqite_test_overlaps(&spec, &params, i, OverlapTarget::Param(j), Part::Real, None).unwrap();
        let im = varqite_test_overlaps(&spec, &params, i, OverlapTarget::Param(j), Part::Imaginary, None).unwrap();
        prop_assert!((re - want.re).abs() < 1e-10);
        prop_assert!((im - want.im).abs() < 1e-10);
    }

    #[test]
    fn gate_by_gate_state_matches_contraction(n_virtual in 1usize..=2, n_orb in 1usize..=4, n_layers in 1usize..=2, seed in any::<u64>()) {
        let spec = build_ansatz(n_virtual, n_orb, n_layers).unwrap();
        let params = ParamVector::random(spec.n_params(), seed);
        let a = pure_ansatz_state(&spec, &params).unwrap();
        let b = tensors_from_params(&spec, &params).unwrap().to_statevector();
        prop_assert!(max_abs(a.iter().zip(&b).map(|(x, y)| (x - y).norm())) < 1e-12);
    }

    #[test]
    fn marginal_of_pure_circuit_is_channel_value(n_virtual in 1usize..=2, n_orb in 2usize..=4, seed in any::<u64>()) {
        let spec = build_ansatz(n_virtual, n_orb, 1).unwrap();
        let params = ParamVector::random(spec.n_params(), seed);
        let p = random_string(n_orb, &mut rng(!seed));
        for part in [Part::Real, Part::Imaginary] {
            let table = simulate_equivalent_pure(&spec, &params, &p, part).unwrap();
            prop_assert_eq!(table.n_redundant, n_orb - 1);
            prop_assert!((table.total() - 1.0).abs() < 1e-12);
            let channel = hadamard_test_expectation(&spec, &params, &p, part, None).unwrap();
            prop_assert!((table.marginal_value() - channel).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_state_is_physical(n_virtual in 1usize..=2, n_orb in 1usize..=4, seed in any::<u64>()) {
        let spec = build_ansatz(n_virtual, n_orb, 1).unwrap();
        let rho = ansatz_density(&spec, &ParamVector::random(spec.n_params(), seed)).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.trace().im.abs() < 1e-12);
        prop_assert!(rho.hermiticity_residual() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-10);
    }
}

#[test]
fn identity_hamiltonian_gives_one_on_both_evaluators() {
    let spec = build_ansatz(1, 3, 1).unwrap();
    let params = ParamVector::random(spec.n_params(), 3);
    let id = PauliSum::identity(3);
    let a = energy(&spec, &params, &id, &Evaluator::Mps, false).unwrap();
    let b = energy(
        &spec,
        &params,
        &id,
        &Evaluator::Channel { shots: None },
        false,
    )
    .unwrap();
    assert!((a - c(1.0, 0.0)).norm() < 1e-12);
    assert!((b - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn full_systems_agree_for_complex_hamiltonian() {
    let spec = build_ansatz(2, 2, 1).unwrap();
    let params = ParamVector::random(spec.n_params(), 8);
    let h = random_sum(2, 4, true, &mut rng(8));
    let a = assemble_system(&spec, &params, &h, &Evaluator::Mps, true).unwrap();
    let b = assemble_system(
        &spec,
        &params,
        &h,
        &Evaluator::Channel { shots: None },
        true,
    )
    .unwrap();
    assert!((&a.a_matrix - &b.a_matrix).amax() < 1e-10);
    assert!((&a.c_vector - &b.c_vector).amax() < 1e-10);
    assert!((a.energy - b.energy).norm() < 1e-10);
}

#[test]
fn shot_estimates_are_unbiased_and_reproducible() {
    let spec = build_ansatz(1, 2, 1).unwrap();
    let params = ParamVector::random(spec.n_params(), 1);
    let p = PauliString::parse(2, "X0 Z1").unwrap();
    let exact = hadamard_test_expectation(&spec, &params, &p, Part::Real, None).unwrap();
    let shots = 2000u64;
    let runs = 200;
    let mean: f64 = (0..runs)
        .map(|k| {
            hadamard_test_expectation(
                &spec,
                &params,
                &p,
                Part::Real,
                Some(&ShotPlan::new(shots, k).unwrap()),
            )
            .unwrap()
        })
        .sum::<f64>()
        / runs as f64;
    // variance of (2 n0 - M) / M is (1 - v^2) / M per run
    let sigma = ((1.0 - exact * exact) / (shots as f64 * runs as f64)).sqrt();
    assert!(
        (mean - exact).abs() < 5.0 * sigma + 1e-12,
        "{mean} vs {exact}"
    );
    let plan = ShotPlan::new(shots, 99).unwrap();
    let once = hadamard_test_expectation(&spec, &params, &p, Part::Real, Some(&plan)).unwrap();
    assert_eq!(
        once,
        hadamard_test_expectation(&spec, &params, &p, Part::Real, Some(&plan)).unwrap()
    );
}
