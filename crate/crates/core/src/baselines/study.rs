use serde::{Deserialize, Serialize};

use super::bfgs::{bfgs_minimize, BfgsConfig, BfgsStatus};
use super::penalty::{penalty_cost, PenaltySpec};
use crate::circuit::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::mps::maybe_par_map;
use crate::pauli::{PauliSum, C64};
use crate::varqite::{self, energy, Evaluator, RunStatus, StepPolicy, TraceRow, VarqiteConfig};

/// Chemical accuracy in hartree.
pub const CHEMICAL_ACCURACY: f64 = 1.6e-3;

#[derive(Clone, Debug, PartialEq)]
pub enum Optimizer {
    Varqite(VarqiteConfig),
    Bfgs {
        config: BfgsConfig,
        penalty: Option<PenaltySpec>,
        evaluator: Evaluator,
    },
}

impl Optimizer {
    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::Varqite(_) => "varqite",
            Optimizer::Bfgs { .. } => "bfgs",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudySpec {
    pub ansatz: AnsatzSpec,
    pub hamiltonian: PauliSum,
    pub optimizer: Optimizer,
    /// Reference ground energy; errors are `|Re E - ground|`.
    pub ground_energy: Option<f64>,
    pub threshold: f64,
    /// Iteration histogram bin edges, ascending.
    pub bin_edges: Vec<f64>,
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub final_energy: Option<C64>,
    pub error: Option<f64>,
    pub iterations: usize,
    pub status: String,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Adaptive VarQITE only: whether every accepted step was the candidate
    /// argmin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmin_holds: Option<bool>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// `counts[k]` covers `[edges[k], edges[k + 1])`; values outside the
    /// range land in the first or last bin.
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(edges: Vec<f64>, values: impl IntoIterator<Item = f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(
                "histogram needs at least two strictly ascending edges",
            ));
        }
        let bins = edges.len() - 1;
        let mut counts = vec![0; bins];
        for v in values {
            let k = edges[1..].iter().position(|&e| v < e).unwrap_or(bins - 1);
            counts[k] += 1;
        }
        Ok(Histogram { edges, counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedStudy {
    pub optimizer: String,
    pub seeds: Vec<u64>,
    pub outcomes: Vec<SeedOutcome>,
    pub threshold: f64,
    pub ground_energy: Option<f64>,
    pub success_count: usize,
    pub converged_count: usize,
    pub iteration_histogram: Histogram,
}

/// One optimization from `theta0`, summarized. `seed` is only recorded.
pub fn run_optimizer(
    ansatz: &AnsatzSpec,
    h: &PauliSum,
    optimizer: &Optimizer,
    theta0: &ParamVector,
    seed: u64,
    deterministic: bool,
    ground_energy: Option<f64>,
) -> Result<SeedOutcome> {
    let (energy_final, iterations, status, converged, failure, trace, argmin) = match optimizer {
        Optimizer::Varqite(cfg) => {
            let cfg = VarqiteConfig {
                deterministic,
                ..cfg.clone()
            };
            let t = varqite::run(ansatz, theta0, h, &cfg)?;
            let ok = t.status == RunStatus::ToleranceMet;
            let status = serde_json::to_value(t.status)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            let argmin = matches!(cfg.step, StepPolicy::Adaptive { .. }).then(|| t.argmin_holds());
            (
                t.final_energy(),
                t.iterations(),
                status,
                ok,
                t.failure.clone(),
                t.rows(),
                argmin,
            )
        }
        Optimizer::Bfgs {
            config,
            penalty,
            evaluator,
        } => {
            if !h.is_hermitian() {
                return Err(Error::NonHermitian);
            }
            let cost = |p: &ParamVector| match penalty {
                Some(pen) => penalty_cost(ansatz, p, h, pen, evaluator),
                None => energy(ansatz, p, h, evaluator, false).map(|e| e.re),
            };
            let r = bfgs_minimize(cost, theta0, config, !deterministic)?;
            let e = energy(ansatz, &r.params, h, evaluator, false)?;
            let rows = r
                .trace
                .iter()
                .enumerate()
                .map(|(i, s)| TraceRow {
                    iter: i,
                    energy_re: s.cost,
                    energy_im: 0.0,
                    step: s.step,
                    dir_norm: s.dir_norm,
                    elapsed_ms: 0.0,
                })
                .collect();
            let status = serde_json::to_value(r.status)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            (
                e,
                r.iterations(),
                status,
                r.status == BfgsStatus::Converged,
                None,
                rows,
                None,
            )
        }
    };
    Ok(SeedOutcome {
        seed,
        final_energy: Some(energy_final),
        error: ground_energy.map(|g| (energy_final.re - g).abs()),
        iterations,
        status,
        converged,
        failure,
        argmin_holds: argmin,
        trace,
    })
}

fn run_one(spec: &StudySpec, seed: u64) -> Result<SeedOutcome> {
    let theta0 = ParamVector::random(spec.ansatz.n_params(), seed);
    run_optimizer(
        &spec.ansatz,
        &spec.hamiltonian,
        &spec.optimizer,
        &theta0,
        seed,
        spec.deterministic,
        spec.ground_energy,
    )
}

/// Runs the optimizer once per seed. Failures are recorded per seed.
pub fn run_seed_study(spec: &StudySpec, seeds: &[u64]) -> Result<SeedStudy> {
    if seeds.is_empty() {
        return Err(Error::invalid("a seed study needs at least one seed"));
    }
    let outcomes: Vec<SeedOutcome> = maybe_par_map(!spec.deterministic, seeds.len(), |k| {
        run_one(spec, seeds[k]).unwrap_or_else(|e| SeedOutcome {
            seed: seeds[k],
            final_energy: None,
            error: None,
            iterations: 0,
            status: "error".into(),
            converged: false,
            failure: Some(e.to_string()),
            argmin_holds: None,
            trace: Vec::new(),
        })
    });
    let success_count = outcomes
        .iter()
        .filter(|o| o.error.is_some_and(|e| e < spec.threshold))
        .count();
    let converged: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.converged)
        .map(|o| o.iterations as f64)
        .collect();
    Ok(SeedStudy {
        optimizer: spec.optimizer.name().into(),
        seeds: seeds.to_vec(),
        success_count,
        converged_count: converged.len(),
        iteration_histogram: Histogram::new(spec.bin_edges.clone(), converged)?,
        threshold: spec.threshold,
        ground_energy: spec.ground_energy,
        outcomes,
    })
}
