use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{load_run_config, LoadedRun, OptimizerChoice};
use super::trace::{write_json, write_trace_file};
use super::TOOL_VERSION;
use crate::baselines::{
    exact_diagonalize, run_optimizer, run_seed_study, Optimizer, SeedStudy, StudySpec,
};
use crate::channel::{self, Part};
use crate::circuit::ParamVector;
use crate::error::{Error, Result};
use crate::guard;
use crate::mps::{self, overlap, tensors_from_params};
use crate::pauli::{PauliString, PauliSum, C64};
use crate::varqite::{self, assemble_system, energy, Evaluator, VarqiteConfig};

/// Flags shared by every command. `out`, `seed` and `deterministic`
/// override the matching config fields.
#[derive(Clone, Debug, Default)]
pub struct GlobalOptions {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub deterministic: bool,
}

impl GlobalOptions {
    pub fn load(&self) -> Result<LoadedRun> {
        let path = self.config.as_ref().ok_or_else(|| Error::Config {
            path: String::new(),
            message: "this command needs --config <path>".into(),
        })?;
        let mut run = load_run_config(path)?;
        if let Some(seed) = self.seed {
            run.config.ansatz.seed = seed;
        }
        run.config.deterministic |= self.deterministic;
        Ok(run)
    }

    pub fn output_dir(&self, run: &LoadedRun) -> PathBuf {
        self.out.clone().unwrap_or_else(|| run.output_dir())
    }
}

fn optimizer_for(run: &LoadedRun, section: &OptimizerChoice) -> Optimizer {
    match section {
        OptimizerChoice::Varqite(v) => Optimizer::Varqite(run.varqite_config(v)),
        OptimizerChoice::Bfgs(b) => Optimizer::Bfgs {
            config: b.clone(),
            penalty: run.penalty.clone(),
            evaluator: run.evaluator(),
        },
    }
}

fn ed_ground(h: &PauliSum) -> Result<Option<C64>> {
    if h.n_qubits() > guard::dense_limit() {
        return Ok(None);
    }
    Ok(Some(exact_diagonalize(h)?.ground_energy))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool_version: String,
    pub method: String,
    pub status: String,
    pub final_energy: C64,
    pub ed_ground_energy: Option<C64>,
    pub abs_error: Option<f64>,
    pub iterations: usize,
    pub seed: u64,
    pub n_params: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub config: super::config::RunConfig,
}

impl RunSummary {
    pub fn numerical_failure(&self) -> bool {
        self.status == "numerical-failure"
    }
}

/// Runs the configured optimizer and writes `trace.csv` and `summary.json`
/// into `out_dir`.
pub fn run_optimization(run: &LoadedRun, out_dir: &Path) -> Result<RunSummary> {
    let seed = run.config.ansatz.seed;
    let theta0 = ParamVector::random(run.ansatz.n_params(), seed);
    let ground = ed_ground(&run.hamiltonian)?;
    let optimizer = optimizer_for(run, &run.optimizer);
    let outcome = run_optimizer(
        &run.ansatz,
        &run.hamiltonian,
        &optimizer,
        &theta0,
        seed,
        run.config.deterministic,
        ground.map(|g| g.re),
    )?;
    std::fs::create_dir_all(out_dir)?;
    write_trace_file(out_dir.join("trace.csv"), &outcome.trace)?;
    let summary = RunSummary {
        tool_version: TOOL_VERSION.into(),
        method: optimizer.name().into(),
        status: outcome.status,
        final_energy: outcome.final_energy.unwrap_or_default(),
        ed_ground_energy: ground,
        abs_error: outcome.error,
        iterations: outcome.iterations,
        seed,
        n_params: run.ansatz.n_params(),
        failure: outcome.failure,
        config: run.config.clone(),
    };
    write_json(out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn fmt_complex(z: C64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{:.12} {sign} {:.12}i", z.re, z.im.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdReport {
    pub n_qubits: usize,
    pub hermitian_input: bool,
    pub ground_energy: C64,
    /// Lowest eigenvalues by real part.
    pub eigenvalues: Vec<C64>,
}

pub fn diagonalize(h: &PauliSum, k: usize) -> Result<EdReport> {
    let s = exact_diagonalize(h)?;
    Ok(EdReport {
        n_qubits: h.n_qubits(),
        hermitian_input: s.hermitian_input,
        ground_energy: s.ground_energy,
        eigenvalues: s.eigenvalues.into_iter().take(k).collect(),
    })
}

impl EdReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kind = if self.hermitian_input {
            "hermitian"
        } else {
            "non-hermitian"
        };
        let _ = writeln!(out, "qubits: {} ({kind})", self.n_qubits);
        let _ = writeln!(out, "ground energy: {}", fmt_complex(self.ground_energy));
        for (i, e) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "  {i:>4}  {}", fmt_complex(*e));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub draws: usize,
    pub tolerance: f64,
    pub corrupted: bool,
    pub max_dev_expectation: f64,
    pub max_dev_a: f64,
    pub max_dev_c: f64,
    pub max_deviation: f64,
    /// `[mps, channel]` energy per draw.
    pub energies: Vec<[C64; 2]>,
    pub passed: bool,
}

/// Compares the tensor-network evaluator against the channel simulator on
/// random parameter draws.
pub fn validate_evaluators(run: &LoadedRun) -> Result<ValidationReport> {
    let section = run.config.validate.clone().unwrap_or_default();
    let (spec, h) = (&run.ansatz, &run.hamiltonian);
    guard::check(2 + spec.n_virtual(), guard::channel_limit())?;
    let parallel = !run.config.deterministic;
    let exact = Evaluator::Channel { shots: None };
    let mut strings: Vec<PauliString> = h.terms().iter().map(|(_, s)| s.clone()).collect();
    strings.push(PauliString::identity(h.n_qubits()));

    let (mut dev_e, mut dev_a, mut dev_c) = (0.0f64, 0.0f64, 0.0f64);
    let mut energies = Vec::with_capacity(section.draws);
    for draw in 0..section.draws {
        let params = ParamVector::random(spec.n_params(), section.seed.wrapping_add(draw as u64));
        let mut state = tensors_from_params(spec, &params)?;
        if section.corrupt_tensor {
            state.tensors_mut()[0].slice_mut(0)[(0, 0)] += C64::new(0.1, 0.0);
        }
        for p in &strings {
            let want = overlap(&state, &state, Some(p))?;
            let re = channel::hadamard_test_expectation(spec, &params, p, Part::Real, None)?;
            let im = channel::hadamard_test_expectation(spec, &params, p, Part::Imaginary, None)?;
            dev_e = dev_e.max((want - C64::new(re, im)).norm());
        }
        let a = assemble_system(spec, &params, h, &Evaluator::Mps, parallel)?;
        let b = assemble_system(spec, &params, h, &exact, parallel)?;
        dev_a = dev_a.max((&a.a_matrix - &b.a_matrix).amax());
        dev_c = dev_c.max((&a.c_vector - &b.c_vector).amax());
        energies.push([mps::expectation_with(&state, h, parallel)?, b.energy]);
    }
    let max_deviation = dev_e.max(dev_a).max(dev_c);
    Ok(ValidationReport {
        draws: section.draws,
        tolerance: section.tolerance,
        corrupted: section.corrupt_tensor,
        max_dev_expectation: dev_e,
        max_dev_a: dev_a,
        max_dev_c: dev_c,
        max_deviation,
        energies,
        passed: max_deviation <= section.tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub draws: usize,
    pub fd_step: f64,
    pub tolerance: f64,
    /// `max |C + 1/2 grad_fd Re E|`
    pub max_c_error: f64,
    /// `max |A_ij - Re<d_i psi|d_j psi>_fd|`
    pub max_a_error: f64,
    pub max_a_diag_deviation: f64,
    /// `||C||_inf` after converging with VarQITE, when requested.
    pub stationary_c_norm: Option<f64>,
    pub passed: bool,
}

/// Central-difference derivative states `d psi / d theta_i` of the full
/// physical-plus-bond state.
pub fn fd_derivative_states(
    spec: &crate::circuit::AnsatzSpec,
    params: &ParamVector,
    h: f64,
) -> Result<Vec<Vec<C64>>> {
    (0..params.len())
        .map(|i| {
            let up =
                tensors_from_params(spec, &params.with_entry(i, params[i] + h))?.to_statevector();
            let down =
                tensors_from_params(spec, &params.with_entry(i, params[i] - h))?.to_statevector();
            Ok(up
                .iter()
                .zip(&down)
                .map(|(u, d)| (u - d) / (2.0 * h))
                .collect())
        })
        .collect()
}

/// Central-difference gradient of `Re <H>`.
pub fn fd_energy_gradient(
    spec: &crate::circuit::AnsatzSpec,
    params: &ParamVector,
    h_op: &PauliSum,
    h: f64,
) -> Result<Vec<f64>> {
    (0..params.len())
        .map(|i| {
            let up = energy(
                spec,
                &params.with_entry(i, params[i] + h),
                h_op,
                &Evaluator::Mps,
                false,
            )?;
            let down = energy(
                spec,
                &params.with_entry(i, params[i] - h),
                h_op,
                &Evaluator::Mps,
                false,
            )?;
            Ok((up.re - down.re) / (2.0 * h))
        })
        .collect()
}

fn c_error(
    spec: &crate::circuit::AnsatzSpec,
    params: &ParamVector,
    h: &PauliSum,
    c: &nalgebra::DVector<f64>,
    step: f64,
) -> Result<f64> {
    let grad = fd_energy_gradient(spec, params, h, step)?;
    Ok(c.iter()
        .zip(&grad)
        .map(|(c, g)| (c + 0.5 * g).abs())
        .fold(0.0, f64::max))
}

/// Checks `C = -1/2 grad Re E` and `A_ij = Re<d_i psi|d_j psi>` against
/// central differences.
pub fn check_gradients(run: &LoadedRun) -> Result<GradcheckReport> {
    let section = run.config.gradcheck.clone().unwrap_or_default();
    let (spec, h) = (&run.ansatz, &run.hamiltonian);
    if !h.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    let parallel = !run.config.deterministic;
    let (mut c_err, mut a_err, mut diag) = (0.0f64, 0.0f64, 0.0f64);
    for draw in 0..section.draws {
        let params = ParamVector::random(spec.n_params(), section.seed.wrapping_add(draw as u64));
        let sys = assemble_system(spec, &params, h, &Evaluator::Mps, parallel)?;
        diag = diag.max(sys.max_diagonal_deviation());
        c_err = c_err.max(c_error(spec, &params, h, &sys.c_vector, section.fd_step)?);
        let d = fd_derivative_states(spec, &params, section.fd_step)?;
        for i in 0..d.len() {
            for j in i..d.len() {
                let fd: f64 = d[i].iter().zip(&d[j]).map(|(x, y)| (x.conj() * y).re).sum();
                a_err = a_err.max((sys.a_matrix[(i, j)] - fd).abs());
            }
        }
    }
    let stationary_c_norm = if section.converge_first {
        let cfg = match &run.optimizer {
            OptimizerChoice::Varqite(v) => run.varqite_config(v),
            OptimizerChoice::Bfgs(_) => VarqiteConfig {
                deterministic: run.config.deterministic,
                ..VarqiteConfig::default()
            },
        };
        let theta0 = ParamVector::random(spec.n_params(), run.config.ansatz.seed);
        let trace = varqite::run(
            spec,
            &theta0,
            h,
            &VarqiteConfig {
                evaluator: Evaluator::Mps,
                ..cfg
            },
        )?;
        let sys = assemble_system(spec, &trace.final_params, h, &Evaluator::Mps, parallel)?;
        c_err = c_err.max(c_error(
            spec,
            &trace.final_params,
            h,
            &sys.c_vector,
            section.fd_step,
        )?);
        Some(sys.c_vector.amax())
    } else {
        None
    };
    Ok(GradcheckReport {
        draws: section.draws,
        fd_step: section.fd_step,
        tolerance: section.tolerance,
        max_c_error: c_err,
        max_a_error: a_err,
        max_a_diag_deviation: diag,
        stationary_c_norm,
        passed: c_err <= section.tolerance && a_err <= section.tolerance && diag <= 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepArm {
    pub name: String,
    pub study: SeedStudy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tool_version: String,
    pub ed_ground_energy: Option<C64>,
    pub arms: Vec<SweepArm>,
    pub config: super::config::RunConfig,
}

/// One seed study per optimizer arm, all on the same seeds. Writes
/// `<arm>/seed_<seed>.csv`, `<arm>/study.json` and `sweep.json`.
pub fn sweep(run: &LoadedRun, out_dir: &Path) -> Result<SweepReport> {
    let section = run.config.sweep.clone().ok_or_else(|| Error::Config {
        path: "sweep".into(),
        message: "the sweep command needs a [sweep] section".into(),
    })?;
    let seeds = section.seed_list(run.config.ansatz.seed)?;
    let ground = ed_ground(&run.hamiltonian)?;
    let sections: Vec<&OptimizerChoice> = std::iter::once(&run.optimizer)
        .chain(&run.extra_arms)
        .collect();
    let mut arms = Vec::with_capacity(sections.len());
    for (k, sec) in sections.iter().enumerate() {
        let duplicate = sections.iter().filter(|s| s.name() == sec.name()).count() > 1;
        let name = if duplicate {
            format!("{}_{k}", sec.name())
        } else {
            sec.name().to_string()
        };
        let spec = StudySpec {
            ansatz: run.ansatz.clone(),
            hamiltonian: run.hamiltonian.clone(),
            optimizer: optimizer_for(run, sec),
            ground_energy: ground.map(|g| g.re),
            threshold: section.threshold,
            bin_edges: section.bin_edges.clone(),
            deterministic: run.config.deterministic,
        };
        let study = run_seed_study(&spec, &seeds).map_err(|e| match e {
            Error::InvalidArgument(message) => Error::Config {
                path: "sweep".into(),
                message,
            },
            other => other,
        })?;
        let dir = out_dir.join(&name);
        std::fs::create_dir_all(&dir)?;
        for o in &study.outcomes {
            write_trace_file(dir.join(format!("seed_{}.csv", o.seed)), &o.trace)?;
        }
        write_json(dir.join("study.json"), &study)?;
        arms.push(SweepArm { name, study });
    }
    let report = SweepReport {
        tool_version: TOOL_VERSION.into(),
        ed_ground_energy: ground,
        arms,
        config: run.config.clone(),
    };
    write_json(out_dir.join("sweep.json"), &report)?;
    Ok(report)
}
