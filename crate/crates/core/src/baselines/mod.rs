//! Reference solvers and instance generators.

pub mod bfgs;
pub mod ed;
pub mod penalty;
pub mod study;
pub mod tc;

pub use bfgs::{bfgs_minimize, BfgsConfig, BfgsResult, BfgsStatus};
pub use ed::{exact_diagonalize, SpectrumResult};
pub use penalty::{penalty_cost, PenaltySpec};
pub use study::{
    run_optimizer, run_seed_study, Histogram, Optimizer, SeedOutcome, SeedStudy, StudySpec,
    CHEMICAL_ACCURACY,
};
pub use tc::synthesize_tc;
