//! Variational imaginary-time evolution on the QCMPS manifold.
//!
//! Each iteration assembles `A_ij = 1/4 Re<xi_i|xi_j>` and
//! `C_j = -Re<d_j psi|H|psi>`, solves `(A + delta I) x = C` and moves
//! `theta += dtau * x`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{self, OverlapTarget, Part, ShotPlan};
use crate::circuit::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::mps::{self, maybe_par_map};
use crate::pauli::{PauliSum, C64};

pub const DEFAULT_REGULARIZATION: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_MAX_ITERS: usize = 500;
pub const DEFAULT_STEP_CANDIDATES: [f64; 9] =
    [0.02, 0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70];
const RETRY_FACTOR: f64 = 100.0;

/// How overlaps are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evaluator {
    /// Tensor contraction of the component tensors.
    Mps,
    /// Literal Hadamard-test circuits on the reset-channel simulator,
    /// optionally sampled.
    Channel { shots: Option<ShotPlan> },
}

impl Evaluator {
    fn fork(&self, stream: u64) -> Evaluator {
        match *self {
            Evaluator::Channel { shots: Some(plan) } => Evaluator::Channel {
                shots: Some(plan.fork(stream)),
            },
            other => other,
        }
    }

    fn plan(&self, ids: &[u64]) -> Option<ShotPlan> {
        match self {
            Evaluator::Channel { shots: Some(plan) } => {
                Some(ids.iter().fold(*plan, |p, &id| p.fork(id)))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QfiSystem {
    pub a_matrix: DMatrix<f64>,
    pub c_vector: DVector<f64>,
    pub energy: C64,
}

impl QfiSystem {
    pub fn n_params(&self) -> usize {
        self.c_vector.len()
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.a_matrix - self.a_matrix.transpose()).amax()
    }

    pub fn max_diagonal_deviation(&self) -> f64 {
        self.a_matrix
            .diagonal()
            .iter()
            .map(|d| (d - 0.25).abs())
            .fold(0.0, f64::max)
    }
}

fn check_h(spec: &AnsatzSpec, h: &PauliSum) -> Result<()> {
    if h.n_qubits() != spec.n_blocks() {
        return Err(Error::dims(format!(
            "{}-qubit Hamiltonian for a {}-block ansatz",
            h.n_qubits(),
            spec.n_blocks()
        )));
    }
    Ok(())
}

fn ensure_finite(sys: &QfiSystem) -> Result<()> {
    let ok = sys
        .a_matrix
        .iter()
        .chain(sys.c_vector.iter())
        .all(|v| v.is_finite())
        && sys.energy.re.is_finite()
        && sys.energy.im.is_finite();
    if ok {
        Ok(())
    } else {
        Err(Error::NumericalFailure {
            message: "non-finite entry in the linear system".into(),
            condition_estimate: None,
        })
    }
}

/// `C_j = 1/2 sum_k Im(c_k <xi_j|P_k|psi>)`.
fn c_entry(h: &PauliSum, z: impl Fn(usize) -> C64) -> f64 {
    let mut acc = 0.0;
    for (k, (c, _)) in h.terms().iter().enumerate() {
        acc += (c * z(k)).im;
    }
    0.5 * acc
}

/// `<psi|H|psi>` with the chosen evaluator.
pub fn energy(
    spec: &AnsatzSpec,
    params: &ParamVector,
    h: &PauliSum,
    evaluator: &Evaluator,
    parallel: bool,
) -> Result<C64> {
    check_h(spec, h)?;
    match evaluator {
        Evaluator::Mps => {
            mps::expectation_with(&mps::tensors_from_params(spec, params)?, h, parallel)
        }
        Evaluator::Channel { .. } => {
            let terms = h.terms();
            let values = maybe_par_map(parallel, terms.len(), |k| -> Result<C64> {
                let (c, p) = &terms[k];
                let re = channel::hadamard_test_expectation(
                    spec,
                    params,
                    p,
                    Part::Real,
                    evaluator.plan(&[2, k as u64, 0]).as_ref(),
                )?;
                let im = channel::hadamard_test_expectation(
                    spec,
                    params,
                    p,
                    Part::Imaginary,
                    evaluator.plan(&[2, k as u64, 1]).as_ref(),
                )?;
                Ok(c * C64::new(re, im))
            });
            let mut acc = C64::new(0.0, 0.0);
            for v in values {
                acc += v?;
            }
            Ok(acc)
        }
    }
}

pub fn assemble_system(
    spec: &AnsatzSpec,
    params: &ParamVector,
    h: &PauliSum,
    evaluator: &Evaluator,
    parallel: bool,
) -> Result<QfiSystem> {
    check_h(spec, h)?;
    spec.check_params(params)?;
    let p = spec.n_params();
    let sys = match evaluator {
        Evaluator::Mps => {
            let state = mps::tensors_from_params(spec, params)?;
            let xis = mps::xi_tensors(spec, params, parallel)?;
            let blocks: Vec<usize> = (0..p)
                .map(|i| spec.resolve_param(i).map(|s| s.block))
                .collect::<Result<_>>()?;
            let gram = mps::xi_gram(&state, &xis, &blocks, parallel)?;
            let (energy, z) = mps::energy_and_xi_overlaps(&state, h, &xis, &blocks, parallel)?;
            let a_matrix = DMatrix::from_fn(p, p, |i, j| 0.25 * gram[(i, j)].re);
            let c_vector = DVector::from_iterator(p, z.iter().map(|&zj| 0.5 * zj.im));
            QfiSystem {
                a_matrix,
                c_vector,
                energy,
            }
        }
        Evaluator::Channel { .. } => {
            let pairs: Vec<(usize, usize)> =
                (0..p).flat_map(|i| (i..p).map(move |j| (i, j))).collect();
            let a_vals = maybe_par_map(parallel, pairs.len(), |k| {
                let (i, j) = pairs[k];
                let plan = evaluator.plan(&[0, i as u64, j as u64]);
                channel::varqite_test_overlaps(
                    spec,
                    params,
                    i,
                    OverlapTarget::Param(j),
                    Part::Real,
                    plan.as_ref(),
                )
            });
            let mut a_matrix = DMatrix::zeros(p, p);
            for (&(i, j), v) in pairs.iter().zip(a_vals) {
                let v = 0.25 * v?;
                a_matrix[(i, j)] = v;
                a_matrix[(j, i)] = v;
            }
            let terms = h.terms();
            let c_vals = maybe_par_map(parallel, p, |j| -> Result<f64> {
                let z = terms
                    .iter()
                    .enumerate()
                    .map(|(k, (_, s))| -> Result<C64> {
                        let target = OverlapTarget::String(s);
                        let ids = |part: u64| evaluator.plan(&[1, j as u64, k as u64, part]);
                        let re = channel::varqite_test_overlaps(
                            spec,
                            params,
                            j,
                            target,
                            Part::Real,
                            ids(0).as_ref(),
                        )?;
                        let im = channel::varqite_test_overlaps(
                            spec,
                            params,
                            j,
                            target,
                            Part::Imaginary,
                            ids(1).as_ref(),
                        )?;
                        Ok(C64::new(re, im))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(c_entry(h, |k| z[k]))
            });
            let c_vector = DVector::from_vec(c_vals.into_iter().collect::<Result<Vec<_>>>()?);
            QfiSystem {
                a_matrix,
                c_vector,
                energy: energy(spec, params, h, evaluator, parallel)?,
            }
        }
    };
    ensure_finite(&sys)?;
    Ok(sys)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub direction: DVector<f64>,
    /// Regularization that was actually used.
    pub delta: f64,
    /// `||(A + delta I) x - C||_inf`
    pub residual: f64,
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn regularized(a: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += delta;
    }
    m
}

fn solve_with(a: &DMatrix<f64>, c: &DVector<f64>, delta: f64) -> Option<Solution> {
    let m = regularized(a, delta);
    let chol = m.clone().cholesky()?;
    let mut x = chol.solve(c);
    // two rounds of iterative refinement against the same factor
    for _ in 0..2 {
        let r = c - &m * &x;
        x += chol.solve(&r);
    }
    let residual = (&m * &x - c).amax();
    x.iter().all(|v| v.is_finite()).then_some(Solution {
        direction: x,
        delta,
        residual,
    })
}

/// Solves `(A + delta I) x = C` by Cholesky, retrying once with
/// `delta * 100` when the factorization fails.
pub fn solve_direction(sys: &QfiSystem, delta: f64) -> Result<Solution> {
    if !(delta >= 0.0) {
        return Err(Error::invalid("regularization must be non-negative"));
    }
    let (a, c) = (&sys.a_matrix, &sys.c_vector);
    if a.nrows() != c.len() || a.ncols() != c.len() {
        return Err(Error::dims(format!(
            "{}x{} metric with {} gradient entries",
            a.nrows(),
            a.ncols(),
            c.len()
        )));
    }
    let bound = 1e-10 * c.amax().max(1.0);
    for d in [delta, delta * RETRY_FACTOR] {
        if let Some(sol) = solve_with(a, c, d) {
            if sol.residual < bound {
                return Ok(sol);
            }
        }
        if d == 0.0 {
            break;
        }
    }
    Err(Error::NumericalFailure {
        message: format!("regularized metric could not be factorized (delta = {delta:e})"),
        condition_estimate: Some(condition_estimate(&regularized(a, delta))),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepPolicy {
    Fixed { step: f64 },
    Adaptive { candidates: Vec<f64> },
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy::Adaptive {
            candidates: DEFAULT_STEP_CANDIDATES.to_vec(),
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        let steps: &[f64] = match self {
            StepPolicy::Fixed { step } => std::slice::from_ref(step),
            StepPolicy::Adaptive { candidates } => candidates,
        };
        if steps.is_empty() || steps.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("step sizes must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepChoice {
    pub step: f64,
    pub params: ParamVector,
    pub energy: C64,
    /// `(step, energy)` for every evaluated candidate.
    pub candidates: Vec<(f64, C64)>,
}

pub fn select_step(
    spec: &AnsatzSpec,
    params: &ParamVector,
    h: &PauliSum,
    direction: &DVector<f64>,
    policy: &StepPolicy,
    evaluator: &Evaluator,
    parallel: bool,
) -> Result<StepChoice> {
    policy.validate()?;
    if direction.len() != params.len() || direction.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "step direction must be finite and match the parameter count",
        ));
    }
    let steps: Vec<f64> = match policy {
        StepPolicy::Fixed { step } => vec![*step],
        StepPolicy::Adaptive { candidates } => {
            let mut c = candidates.clone();
            c.sort_by(f64::total_cmp);
            c
        }
    };
    let mut candidates = Vec::with_capacity(steps.len());
    let mut best: Option<(usize, ParamVector, C64)> = None;
    for (idx, &tau) in steps.iter().enumerate() {
        let trial = params.displaced(direction.as_slice(), tau);
        let e = energy(spec, &trial, h, &evaluator.fork(idx as u64), parallel)?;
        candidates.push((tau, e));
        if !e.re.is_finite() {
            continue;
        }
        // strict comparison keeps the smallest step on ties
        if best.as_ref().is_none_or(|(_, _, b)| e.re < b.re) {
            best = Some((idx, trial, e));
        }
    }
    let (idx, params, energy) = best.ok_or_else(|| Error::NumericalFailure {
        message: "every candidate step produced a non-finite energy".into(),
        condition_estimate: None,
    })?;
    Ok(StepChoice {
        step: steps[idx],
        params,
        energy,
        candidates,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarqiteConfig {
    pub regularization: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub step: StepPolicy,
    pub evaluator: Evaluator,
    /// Sequential evaluation and zeroed wall-clock columns.
    pub deterministic: bool,
}

impl Default for VarqiteConfig {
    fn default() -> Self {
        VarqiteConfig {
            regularization: DEFAULT_REGULARIZATION,
            tol: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
            step: StepPolicy::default(),
            evaluator: Evaluator::Mps,
            deterministic: false,
        }
    }
}

impl VarqiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::invalid(
                "regularization must be a non-negative number",
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        self.step.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    ToleranceMet,
    IterationCap,
    NumericalFailure,
}

impl RunStatus {
    pub fn is_success(self) -> bool {
        self != RunStatus::NumericalFailure
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: C64,
    pub step: f64,
    pub dir_norm: f64,
    pub elapsed_ms: f64,
    pub candidates: Vec<(f64, C64)>,
}

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy_re: f64,
    pub energy_im: f64,
    pub step: f64,
    pub dir_norm: f64,
    pub elapsed_ms: f64,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        TraceRow {
            iter: r.iter,
            energy_re: r.energy.re,
            energy_im: r.energy.im,
            step: r.step,
            dir_norm: r.dir_norm,
            elapsed_ms: r.elapsed_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    pub final_params: ParamVector,
    pub failure: Option<String>,
}

impl ConvergenceTrace {
    pub fn final_energy(&self) -> C64 {
        self.records.last().map(|r| r.energy).unwrap_or_default()
    }

    pub fn rows(&self) -> Vec<TraceRow> {
        self.records.iter().map(TraceRow::from).collect()
    }

    /// Number of parameter updates performed.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// Whether every accepted step has the lowest `Re E` among its candidates.
    pub fn argmin_holds(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.candidates.iter().all(|(_, e)| !(e.re < r.energy.re)))
    }
}

pub fn run(
    spec: &AnsatzSpec,
    theta0: &ParamVector,
    h: &PauliSum,
    config: &VarqiteConfig,
) -> Result<ConvergenceTrace> {
    config.validate()?;
    check_h(spec, h)?;
    spec.check_params(theta0)?;
    let parallel = !config.deterministic;
    let start = Instant::now();
    let elapsed = || {
        if config.deterministic {
            0.0
        } else {
            start.elapsed().as_secs_f64() * 1e3
        }
    };

    let mut params = theta0.clone();
    let e0 = energy(spec, &params, h, &config.evaluator.fork(u64::MAX), parallel)?;
    let mut records = vec![IterationRecord {
        iter: 0,
        energy: e0,
        step: 0.0,
        dir_norm: 0.0,
        elapsed_ms: elapsed(),
        candidates: Vec::new(),
    }];
    let mut status = RunStatus::IterationCap;
    let mut failure = None;

    for iter in 1..=config.max_iters {
        let evaluator = config.evaluator.fork(iter as u64);
        let step = assemble_system(spec, &params, h, &evaluator, parallel)
            .and_then(|sys| solve_direction(&sys, config.regularization))
            .and_then(|sol| {
                let choice = select_step(
                    spec,
                    &params,
                    h,
                    &sol.direction,
                    &config.step,
                    &evaluator.fork(0x5eed),
                    parallel,
                )?;
                Ok((sol, choice))
            });
        let (sol, choice) = match step {
            Ok(v) => v,
            Err(e @ Error::NumericalFailure { .. }) => {
                status = RunStatus::NumericalFailure;
                failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let previous = records.last().map(|r| r.energy.re).unwrap_or(f64::NAN);
        records.push(IterationRecord {
            iter,
            energy: choice.energy,
            step: choice.step,
            dir_norm: sol.direction.norm(),
            elapsed_ms: elapsed(),
            candidates: choice.candidates,
        });
        params = choice.params;
        if (choice.energy.re - previous).abs() < config.tol {
            status = RunStatus::ToleranceMet;
            break;
        }
    }
    Ok(ConvergenceTrace {
        records,
        status,
        final_params: params,
        failure,
    })
}
