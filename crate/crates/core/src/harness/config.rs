//! Run and study configuration documents (TOML).
//!
//! Relative paths inside a config file are resolved against the directory
//! that contains it.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::{synthesize_tc, BfgsConfig, PenaltySpec};
use crate::channel::ShotPlan;
use crate::circuit::{build_ansatz, AnsatzSpec};
use crate::error::{Error, Result};
use crate::pauli::{line_col, PauliSum};
use crate::varqite::{
    Evaluator, StepPolicy, VarqiteConfig, DEFAULT_MAX_ITERS, DEFAULT_REGULARIZATION,
    DEFAULT_TOLERANCE,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hamiltonian: PathBuf,
    /// When set, the Hamiltonian is replaced by `e^{-J} H e^{J}` with
    /// `J = sum_i jastrow[i] Z_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jastrow: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltySection>,
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub evaluator: EvaluatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    /// Seed for shot sampling; defaults to the ansatz seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradcheck: Option<GradcheckSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    pub s2: PathBuf,
    pub n_electrons: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub n_virtual: usize,
    #[serde(default = "one")]
    pub n_layers: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorKind {
    #[default]
    Mps,
    Channel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Varqite,
    Bfgs,
}

/// Optimizer table as written in the file. Fields that do not belong to the
/// chosen `method` are rejected by [`OptimizerSection::resolve`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub armijo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backtrack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_backtracks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gtol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptimizerChoice {
    Varqite(VarqiteSection),
    Bfgs(BfgsConfig),
}

impl OptimizerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerChoice::Varqite(_) => "varqite",
            OptimizerChoice::Bfgs(_) => "bfgs",
        }
    }
}

impl OptimizerSection {
    /// Checks the fields against `method` and fills in defaults. `path` is
    /// the table's location, used in error messages.
    pub fn resolve(&self, path: &str) -> Result<OptimizerChoice> {
        let err = |field: &str, message: String| Error::Config {
            path: if field.is_empty() {
                path.to_string()
            } else {
                format!("{path}.{field}")
            },
            message,
        };
        let foreign = |names: &[(&str, bool)]| -> Result<()> {
            match names.iter().find(|(_, set)| *set) {
                Some((name, _)) => Err(err(
                    name,
                    format!("not a {:?} option", self.method).to_lowercase(),
                )),
                None => Ok(()),
            }
        };
        match self.method {
            Method::Varqite => {
                foreign(&[
                    ("fd_step", self.fd_step.is_some()),
                    ("armijo", self.armijo.is_some()),
                    ("backtrack", self.backtrack.is_some()),
                    ("max_backtracks", self.max_backtracks.is_some()),
                    ("gtol", self.gtol.is_some()),
                ])?;
                let d = VarqiteSection::default();
                let v = VarqiteSection {
                    regularization: self.regularization.unwrap_or(d.regularization),
                    tol: self.tol.unwrap_or(d.tol),
                    max_iters: self.max_iters.unwrap_or(d.max_iters),
                    step: self.step.clone().unwrap_or(d.step),
                };
                VarqiteConfig {
                    regularization: v.regularization,
                    tol: v.tol,
                    max_iters: v.max_iters,
                    step: v.step.clone(),
                    ..VarqiteConfig::default()
                }
                .validate()
                .map_err(|e| err("", e.to_string()))?;
                Ok(OptimizerChoice::Varqite(v))
            }
            Method::Bfgs => {
                foreign(&[
                    ("regularization", self.regularization.is_some()),
                    ("tol", self.tol.is_some()),
                    ("step", self.step.is_some()),
                ])?;
                let d = BfgsConfig::default();
                let b = BfgsConfig {
                    fd_step: self.fd_step.unwrap_or(d.fd_step),
                    armijo: self.armijo.unwrap_or(d.armijo),
                    backtrack: self.backtrack.unwrap_or(d.backtrack),
                    max_backtracks: self.max_backtracks.unwrap_or(d.max_backtracks),
                    gtol: self.gtol.unwrap_or(d.gtol),
                    max_iters: self.max_iters.unwrap_or(d.max_iters),
                };
                b.validate().map_err(|e| err("", e.to_string()))?;
                Ok(OptimizerChoice::Bfgs(b))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarqiteSection {
    pub regularization: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub step: StepPolicy,
}

impl Default for VarqiteSection {
    fn default() -> Self {
        VarqiteSection {
            regularization: DEFAULT_REGULARIZATION,
            tol: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
            step: StepPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub draws: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Negative control: perturbs one MPS tensor before comparing.
    pub corrupt_tensor: bool,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            draws: 5,
            seed: 0,
            tolerance: 1e-8,
            corrupt_tensor: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckSection {
    pub draws: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub tolerance: f64,
    /// Run VarQITE to convergence first and check the stationary point too.
    pub converge_first: bool,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        GradcheckSection {
            draws: 3,
            seed: 0,
            fd_step: 1e-5,
            tolerance: 1e-6,
            converge_first: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit seed list; otherwise `n_seeds` consecutive seeds starting at
    /// the ansatz seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_seeds: Option<usize>,
    #[serde(default = "chemical_accuracy")]
    pub threshold: f64,
    #[serde(default = "default_bin_edges")]
    pub bin_edges: Vec<f64>,
    /// Optimizers run on the same seeds in addition to the main one.
    #[serde(default)]
    pub extra_arms: Vec<OptimizerSection>,
}

fn chemical_accuracy() -> f64 {
    crate::baselines::study::CHEMICAL_ACCURACY
}

fn default_bin_edges() -> Vec<f64> {
    vec![0.0, 25.0, 50.0, 100.0, 200.0, 300.0, 400.0, 501.0]
}

impl SweepSection {
    pub fn seed_list(&self, base: u64) -> Result<Vec<u64>> {
        match (&self.seeds, self.n_seeds) {
            (Some(s), None) if !s.is_empty() => Ok(s.clone()),
            (None, Some(n)) if n > 0 => Ok((0..n as u64).map(|k| base + k).collect()),
            _ => Err(Error::Config {
                path: "sweep".into(),
                message: "give exactly one of a non-empty `seeds` list or a positive `n_seeds`"
                    .into(),
            }),
        }
    }
}

/// A config file plus everything it references, parsed and checked.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub hamiltonian: PauliSum,
    pub penalty: Option<PenaltySpec>,
    pub ansatz: AnsatzSpec,
    pub optimizer: OptimizerChoice,
    /// Resolved `sweep.extra_arms`.
    pub extra_arms: Vec<OptimizerChoice>,
}

impl LoadedRun {
    pub fn evaluator(&self) -> Evaluator {
        match self.config.evaluator {
            EvaluatorKind::Mps => Evaluator::Mps,
            EvaluatorKind::Channel => Evaluator::Channel {
                shots: self.config.shots.map(|shots| ShotPlan {
                    shots,
                    seed: self.config.shot_seed.unwrap_or(self.config.ansatz.seed),
                }),
            },
        }
    }

    pub fn varqite_config(&self, section: &VarqiteSection) -> VarqiteConfig {
        VarqiteConfig {
            regularization: section.regularization,
            tol: section.tol,
            max_iters: section.max_iters,
            step: section.step.clone(),
            evaluator: self.evaluator(),
            deterministic: self.config.deterministic,
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.config.output_dir)
    }
}

/// Deserializes a TOML document, reporting failures with the field path.
pub fn parse_document<T: DeserializeOwned>(source: &str) -> Result<T> {
    let de = toml::Deserializer::new(source);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = inner
            .span()
            .map(|s| {
                let (line, col) = line_col(source, s.start);
                format!(" (line {line}, column {col})")
            })
            .unwrap_or_default();
        Error::Config {
            path,
            message: format!("{}{at}", inner.message().trim_end()),
        }
    })
}

fn read_referenced(base: &Path, field: &str, rel: &Path) -> Result<PauliSum> {
    let path = base.join(rel);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Config {
        path: field.into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    PauliSum::parse(&text).map_err(|e| Error::Config {
        path: field.into(),
        message: format!("{}: {e}", path.display()),
    })
}

pub fn load_run_config(path: impl AsRef<Path>) -> Result<LoadedRun> {
    let path = path.as_ref();
    let source = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: String::new(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    from_config(parse_document(&source)?, base_dir)
}

/// Checks a parsed config and loads the files it references.
pub fn from_config(config: RunConfig, base_dir: PathBuf) -> Result<LoadedRun> {
    let mut hamiltonian = read_referenced(&base_dir, "hamiltonian", &config.hamiltonian)?;
    if let Some(g) = &config.jastrow {
        hamiltonian = synthesize_tc(&hamiltonian, g).map_err(|e| Error::Config {
            path: "jastrow".into(),
            message: e.to_string(),
        })?;
    }
    let penalty = match &config.penalty {
        Some(p) => {
            let s2 = read_referenced(&base_dir, "penalty.s2", &p.s2)?;
            if s2.n_qubits() != hamiltonian.n_qubits() {
                return Err(Error::Config {
                    path: "penalty.s2".into(),
                    message: format!(
                        "{} qubits, Hamiltonian has {}",
                        s2.n_qubits(),
                        hamiltonian.n_qubits()
                    ),
                });
            }
            Some(
                PenaltySpec::new(s2, p.n_electrons).map_err(|e| Error::Config {
                    path: "penalty".into(),
                    message: e.to_string(),
                })?,
            )
        }
        None => None,
    };
    let a = &config.ansatz;
    let ansatz = build_ansatz(a.n_virtual, hamiltonian.n_qubits(), a.n_layers).map_err(|e| {
        Error::Config {
            path: "ansatz".into(),
            message: e.to_string(),
        }
    })?;
    let optimizer = config.optimizer.resolve("optimizer")?;
    let extra_arms = match &config.sweep {
        Some(sw) => sw
            .extra_arms
            .iter()
            .enumerate()
            .map(|(k, a)| a.resolve(&format!("sweep.extra_arms[{k}]")))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    if config.shots == Some(0) {
        return Err(Error::Config {
            path: "shots".into(),
            message: "must be at least 1".into(),
        });
    }
    Ok(LoadedRun {
        config,
        base_dir,
        hamiltonian,
        penalty,
        ansatz,
        optimizer,
        extra_arms,
    })
}
