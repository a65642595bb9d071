//! Acceptance suite. Runs every criterion in sequence and prints one line per
//! criterion; exits non-zero if any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use common::*;
use nalgebra::SymmetricEigen;
use qcmps::baselines::{
    exact_diagonalize, run_seed_study, synthesize_tc, BfgsConfig, Optimizer, SeedStudy, StudySpec,
    CHEMICAL_ACCURACY,
};
use qcmps::channel::{hadamard_test_expectation, varqite_test_overlaps, OverlapTarget, Part};
use qcmps::circuit::{build_ansatz, AnsatzSpec, ParamVector};
use qcmps::mps::{overlap, tensors_from_params, xi_state};
use qcmps::pauli::{PauliSum, C64};
use qcmps::varqite::{
    self, assemble_system, ConvergenceTrace, Evaluator, StepPolicy, VarqiteConfig,
};
use rand::Rng;

const A_DIAG_TOL: f64 = 1e-12;
const GRADIENT_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;
const METRIC_TOL: f64 = 1e-6;
const PSD_FLOOR: f64 = -1e-10;
const EQUIVALENCE_TOL: f64 = 1e-10;
const ISOMETRY_TOL: f64 = 1e-12;
const TOY_TOL: f64 = 1e-6;
const TOY_MIN_SUCCESSES: usize = 4;
const TC_ENERGY_TOL: f64 = 1e-5;
const TC_IMAG_TOL: f64 = 1e-5;
const TC_FIXED_STEP: f64 = 0.05;
const TC_JASTROW: f64 = 0.2;
const ISOSPECTRAL_TOL: f64 = 1e-8;
const LIH_ED_TOL: f64 = 1e-6;
/// Reference values are quoted to five decimals.
const LIH_REFERENCE_TOL: f64 = 1e-5;

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, verdict: Verdict, detail: String, started: Instant) {
        let tag = match verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                self.failures += 1;
                "FAIL"
            }
            Verdict::Skip => "SKIP",
        };
        println!(
            "{tag} {name}: {detail} [{:.1} s]",
            started.elapsed().as_secs_f64()
        );
    }

    fn check(&mut self, name: &str, ok: bool, detail: String, started: Instant) {
        self.line(
            name,
            if ok { Verdict::Pass } else { Verdict::Fail },
            detail,
            started,
        );
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn random_instance(
    r: &mut rand_chacha::ChaCha8Rng,
    n_virtual: usize,
    n_orb: usize,
    n_layers: usize,
    complex: bool,
) -> (AnsatzSpec, ParamVector, PauliSum) {
    let spec = build_ansatz(n_virtual, n_orb, n_layers).unwrap();
    let params = ParamVector::random(spec.n_params(), r.gen());
    let h = random_sum(n_orb, 6, complex, r);
    (spec, params, h)
}

fn a_diagonal(report: &mut Report) {
    let t = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (nb, layers, n_orb) = (r.gen_range(1..=2), r.gen_range(1..=2), r.gen_range(1..=4));
        let complex = r.gen_bool(0.5);
        let (spec, params, h) = random_instance(&mut r, nb, n_orb, layers, complex);
        let sys = assemble_system(&spec, &params, &h, &Evaluator::Mps, true).unwrap();
        worst = worst.max(sys.max_diagonal_deviation());
    }
    report.check(
        "a_diagonal",
        worst < A_DIAG_TOL,
        format!("50 draws, max |A_ii - 1/4| = {worst:.2e} (tol {A_DIAG_TOL:e})"),
        t,
    );
}

fn gradient_identity(report: &mut Report) {
    let t = Instant::now();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (nb, layers, n_orb) = (r.gen_range(1..=2), r.gen_range(1..=2), r.gen_range(1..=3));
        let (spec, params, h) = random_instance(&mut r, nb, n_orb, layers, false);
        let sys = assemble_system(&spec, &params, &h, &Evaluator::Mps, true).unwrap();
        let grad = fd_gradient(&spec, &params, &h, FD_STEP);
        worst = worst.max(max_abs(
            sys.c_vector.iter().zip(&grad).map(|(c, g)| c + 0.5 * g),
        ));
    }
    report.check(
        "gradient_identity",
        worst < GRADIENT_TOL,
        format!("20 Hermitian instances, max |C + grad/2| = {worst:.2e} at h = {FD_STEP:e} (tol {GRADIENT_TOL:e})"),
        t,
    );
}

fn metric_identity(report: &mut Report) {
    let t = Instant::now();
    let mut r = rng(3);
    let (mut worst, mut min_eig) = (0.0f64, f64::INFINITY);
    for _ in 0..10 {
        let (nb, layers, n_orb) = (r.gen_range(1..=2), r.gen_range(1..=2), r.gen_range(1..=3));
        let (spec, params, h) = random_instance(&mut r, nb, n_orb, layers, false);
        let sys = assemble_system(&spec, &params, &h, &Evaluator::Mps, true).unwrap();
        let d = fd_derivatives(&spec, &params, FD_STEP);
        for i in 0..d.len() {
            for j in 0..d.len() {
                worst = worst.max((sys.a_matrix[(i, j)] - inner(&d[i], &d[j]).re).abs());
            }
        }
        let eig = SymmetricEigen::new(&sys.a_matrix * 4.0).eigenvalues;
        min_eig = min_eig.min(eig.min());
    }
    report.check(
        "metric_identity",
        worst < METRIC_TOL && min_eig > PSD_FLOOR,
        format!(
            "10 instances, max |A_ij - Re<d_i|d_j>| = {worst:.2e} (tol {METRIC_TOL:e}), min eig(4A) = {min_eig:.2e} (floor {PSD_FLOOR:e})"
        ),
        t,
    );
}

fn evaluator_equivalence(report: &mut Report) {
    let t = Instant::now();
    let mut r = rng(4);
    let (mut worst, mut checks) = (0.0f64, 0usize);
    let mut record = |want: C64, re: f64, im: f64| {
        worst = worst.max((re - want.re).abs()).max((im - want.im).abs());
        checks += 2;
    };
    for _ in 0..20 {
        let (nb, n_orb) = (r.gen_range(1..=2), r.gen_range(1..=4));
        let (spec, params, h) = random_instance(&mut r, nb, n_orb, 1, true);
        let state = tensors_from_params(&spec, &params).unwrap();
        for (_, p) in h.terms() {
            let want = overlap(&state, &state, Some(p)).unwrap();
            let re = hadamard_test_expectation(&spec, &params, p, Part::Real, None).unwrap();
            let im = hadamard_test_expectation(&spec, &params, p, Part::Imaginary, None).unwrap();
            record(want, re, im);
        }
        let n = spec.n_params();
        for _ in 0..3 {
            let (i, j) = (r.gen_range(0..n), r.gen_range(0..n));
            let (xi, xj) = (
                xi_state(&spec, &params, i).unwrap(),
                xi_state(&spec, &params, j).unwrap(),
            );
            let want = overlap(&xi, &xj, None).unwrap();
            let re =
                varqite_test_overlaps(&spec, &params, i, OverlapTarget::Param(j), Part::Real, None)
                    .unwrap();
            let im = varqite_test_overlaps(
                &spec,
                &params,
                i,
                OverlapTarget::Param(j),
                Part::Imaginary,
                None,
            )
            .unwrap();
            record(want, re, im);

            let p = &h.terms()[r.gen_range(0..h.len())].1;
            let want = overlap(&xi, &state, Some(p)).unwrap();
            let re = varqite_test_overlaps(
                &spec,
                &params,
                i,
                OverlapTarget::String(p),
                Part::Real,
                None,
            )
            .unwrap();
            let im = varqite_test_overlaps(
                &spec,
                &params,
                i,
                OverlapTarget::String(p),
                Part::Imaginary,
                None,
            )
            .unwrap();
            record(want, re, im);
        }
    }
    report.check(
        "evaluator_equivalence",
        worst < EQUIVALENCE_TOL,
        format!("20 draws, {checks} Re/Im Hadamard-test values, max deviation = {worst:.2e} (tol {EQUIVALENCE_TOL:e})"),
        t,
    );
}

fn right_orthogonality(report: &mut Report) {
    let t = Instant::now();
    let mut r = rng(5);
    let (mut worst, mut tensors) = (0.0f64, 0usize);
    for _ in 0..100 {
        let spec =
            build_ansatz(r.gen_range(1..=3), r.gen_range(1..=5), r.gen_range(1..=2)).unwrap();
        let state =
            tensors_from_params(&spec, &ParamVector::random(spec.n_params(), r.gen())).unwrap();
        for tensor in state.tensors() {
            worst = worst.max(tensor.isometry_residual());
            tensors += 1;
        }
    }
    report.check(
        "right_orthogonality",
        worst < ISOMETRY_TOL,
        format!("100 points, {tensors} tensors, max isometry residual = {worst:.2e} (tol {ISOMETRY_TOL:e})"),
        t,
    );
}

fn toy_convergence(report: &mut Report, adaptive_runs: &mut Vec<(String, ConvergenceTrace)>) {
    let t = Instant::now();
    let h = PauliSum::read_file(fixture("toy_z.toml")).unwrap();
    let spec = build_ansatz(1, 1, 1).unwrap();
    let config = VarqiteConfig::default();
    let mut errors = Vec::new();
    for seed in 0..5 {
        let trace = varqite::run(
            &spec,
            &ParamVector::random(spec.n_params(), seed),
            &h,
            &config,
        )
        .unwrap();
        errors.push((trace.final_energy().re + 1.0).abs());
        adaptive_runs.push((format!("toy seed {seed}"), trace));
    }
    let successes = errors.iter().filter(|e| **e < TOY_TOL).count();
    let shown: Vec<String> = errors.iter().map(|e| format!("{e:.1e}")).collect();
    report.check(
        "toy_convergence",
        successes >= TOY_MIN_SUCCESSES,
        format!(
            "{successes}/5 seeds within {TOY_TOL:e} of -1 (need {TOY_MIN_SUCCESSES}); errors [{}]",
            shown.join(", ")
        ),
        t,
    );
}

fn non_hermitian(report: &mut Report) {
    let t = Instant::now();
    let parent = PauliSum::read_file(fixture("tfim3.toml")).unwrap();
    let tc = synthesize_tc(&parent, &[TC_JASTROW; 3]).unwrap();
    let parent_ed = exact_diagonalize(&parent).unwrap();
    let tc_ed = exact_diagonalize(&tc).unwrap();
    let spectral_gap = parent_ed
        .eigenvalues
        .iter()
        .zip(&tc_ed.eigenvalues)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let ground = tc_ed.ground_energy.re;

    let spec = build_ansatz(2, 3, 1).unwrap();
    let config = VarqiteConfig {
        step: StepPolicy::Fixed {
            step: TC_FIXED_STEP,
        },
        ..VarqiteConfig::default()
    };
    let mut ok = !tc.is_hermitian() && spectral_gap < ISOSPECTRAL_TOL;
    let mut runs = Vec::new();
    for seed in 0..3 {
        let trace = varqite::run(
            &spec,
            &ParamVector::random(spec.n_params(), seed),
            &tc,
            &config,
        )
        .unwrap();
        let e = trace.final_energy();
        let peak_im = trace
            .records
            .iter()
            .map(|r| r.energy.im.abs())
            .fold(0.0, f64::max);
        ok &= (e.re - ground).abs() < TC_ENERGY_TOL && e.im.abs() < TC_IMAG_TOL;
        runs.push(format!(
            "seed {seed}: |Re E - E_ED| = {:.1e}, |Im E| = {:.1e} (peak {:.1e}), {} iters",
            (e.re - ground).abs(),
            e.im.abs(),
            peak_im,
            trace.iterations()
        ));
    }
    report.check(
        "non_hermitian",
        ok,
        format!(
            "isospectral to {spectral_gap:.1e} (tol {ISOSPECTRAL_TOL:e}); fixed step {TC_FIXED_STEP}, tol Re {TC_ENERGY_TOL:e} / Im {TC_IMAG_TOL:e}; {}",
            runs.join("; ")
        ),
        t,
    );
}

fn lih_conditional(report: &mut Report, var: &str, n_layers: usize, reference: f64) {
    let t = Instant::now();
    let name = format!(
        "lih_{}",
        var.trim_start_matches("QCMPS_LIH_").to_lowercase()
    );
    let Some(path) = std::env::var_os(var) else {
        report.line(
            &name,
            Verdict::Skip,
            format!("set {var} to a TC Hamiltonian file to run"),
            t,
        );
        return;
    };
    let h = match PauliSum::read_file(&path) {
        Ok(h) => h,
        Err(e) => {
            report.line(
                &name,
                Verdict::Fail,
                format!("cannot read {}: {e}", Path::new(&path).display()),
                t,
            );
            return;
        }
    };
    let ground = exact_diagonalize(&h).unwrap().ground_energy.re;
    let spec = build_ansatz(2, h.n_qubits(), n_layers).unwrap();
    let config = VarqiteConfig {
        step: StepPolicy::Fixed {
            step: TC_FIXED_STEP,
        },
        ..VarqiteConfig::default()
    };
    let seed = std::env::var("QCMPS_LIH_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let trace = varqite::run(
        &spec,
        &ParamVector::random(spec.n_params(), seed),
        &h,
        &config,
    )
    .unwrap();
    let e = trace.final_energy();
    report.check(
        &name,
        (e.re - ground).abs() < LIH_ED_TOL && (e.re - reference).abs() < LIH_REFERENCE_TOL,
        format!(
            "L = {n_layers}, E = {:.8} ({:+.1e}i), ED = {ground:.8}, reference {reference}; |E - ED| = {:.1e} (tol {LIH_ED_TOL:e})",
            e.re,
            e.im,
            (e.re - ground).abs()
        ),
        t,
    );
}

fn seed_study(report: &mut Report) -> SeedStudy {
    let t = Instant::now();
    let h = PauliSum::read_file(fixture("tfim3.toml")).unwrap();
    let ground = exact_diagonalize(&h).unwrap().ground_energy.re;
    let seeds: Vec<u64> = (100..110).collect();
    let study = |optimizer| {
        let spec = StudySpec {
            ansatz: build_ansatz(1, 3, 1).unwrap(),
            hamiltonian: h.clone(),
            optimizer,
            ground_energy: Some(ground),
            threshold: CHEMICAL_ACCURACY,
            bin_edges: vec![0.0, 25.0, 50.0, 100.0, 200.0, 300.0, 400.0, 501.0],
            deterministic: false,
        };
        run_seed_study(&spec, &seeds).unwrap()
    };
    let vq = study(Optimizer::Varqite(VarqiteConfig::default()));
    let bfgs = study(Optimizer::Bfgs {
        config: BfgsConfig::default(),
        penalty: None,
        evaluator: Evaluator::Mps,
    });
    let summary = |s: &SeedStudy| {
        format!(
            "{} {}/10 within {:e}, histogram {:?}",
            s.optimizer, s.success_count, s.threshold, s.iteration_histogram.counts
        )
    };
    let emitted = [&vq, &bfgs].iter().all(|s| {
        s.outcomes.len() == 10
            && s.iteration_histogram.counts.iter().sum::<usize>() == s.converged_count
    });
    report.check(
        "seed_study",
        emitted,
        format!(
            "report only, 10 seeds, bins {:?}; {}; {}",
            vq.iteration_histogram.edges,
            summary(&vq),
            summary(&bfgs)
        ),
        t,
    );
    vq
}

fn tfim_adaptive(adaptive_runs: &mut Vec<(String, ConvergenceTrace)>) {
    let h = PauliSum::read_file(fixture("tfim3.toml")).unwrap();
    let spec = build_ansatz(2, 3, 1).unwrap();
    for seed in 0..2 {
        let trace = varqite::run(
            &spec,
            &ParamVector::random(spec.n_params(), seed),
            &h,
            &VarqiteConfig::default(),
        )
        .unwrap();
        adaptive_runs.push((format!("tfim3 seed {seed}"), trace));
    }
}

fn main() {
    let mut report = Report { failures: 0 };
    a_diagonal(&mut report);
    gradient_identity(&mut report);
    metric_identity(&mut report);
    evaluator_equivalence(&mut report);
    right_orthogonality(&mut report);

    let mut adaptive_runs = Vec::new();
    toy_convergence(&mut report, &mut adaptive_runs);
    non_hermitian(&mut report);
    lih_conditional(&mut report, "QCMPS_LIH_3NMO_TC", 1, -8.02161);
    lih_conditional(&mut report, "QCMPS_LIH_4NMO_TC", 2, -8.02339);
    let study = seed_study(&mut report);

    let t = Instant::now();
    tfim_adaptive(&mut adaptive_runs);
    let steps: usize = adaptive_runs
        .iter()
        .map(|(_, r)| r.iterations())
        .sum::<usize>()
        + study.outcomes.iter().map(|o| o.iterations).sum::<usize>();
    let mut violations: Vec<String> = adaptive_runs
        .iter()
        .filter(|(_, r)| !r.argmin_holds())
        .map(|(n, _)| n.clone())
        .collect();
    violations.extend(
        study
            .outcomes
            .iter()
            .filter(|o| o.argmin_holds != Some(true))
            .map(|o| format!("study seed {}", o.seed)),
    );
    let runs = adaptive_runs.len() + study.outcomes.len();
    report.check(
        "adaptive_argmin",
        violations.is_empty(),
        format!("{runs} adaptive runs, {steps} accepted steps, violations {violations:?}"),
        t,
    );

    if report.failures > 0 {
        println!("{} acceptance criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
