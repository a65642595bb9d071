use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::commands::{self, GlobalOptions};
use super::trace::write_json;
use super::{exit_code, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
use crate::error::Result;
use crate::pauli::PauliSum;

#[derive(Debug, Parser)]
#[command(
    name = "qcmps",
    version,
    about = "QCMPS ansatz optimization with VarQITE"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the ansatz seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sequential evaluation and zeroed timing columns.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Worker threads for the parallel evaluators.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the configured instance and write a trace and summary.
    Run,
    /// Exact diagonalization of a Hamiltonian file.
    Ed {
        /// Hamiltonian file; defaults to the config's `hamiltonian`.
        hamiltonian: Option<PathBuf>,
        /// Number of eigenvalues to print.
        #[arg(short, long, default_value_t = 8)]
        k: usize,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Cross-check the tensor evaluator against the circuit simulator.
    Validate,
    /// Check the linear system against finite differences.
    Gradcheck,
    /// Multi-seed study, one trace per seed and arm.
    Sweep,
}

impl Cli {
    fn globals(&self) -> GlobalOptions {
        GlobalOptions {
            config: self.config.clone(),
            out: self.out.clone(),
            seed: self.seed,
            deterministic: self.deterministic,
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let g = cli.globals();
    match &cli.command {
        Command::Run => {
            let run = g.load()?;
            let out = g.output_dir(&run);
            let s = commands::run_optimization(&run, &out)?;
            println!("method: {}", s.method);
            println!("status: {} after {} iterations", s.status, s.iterations);
            println!(
                "final energy: {} {:+}i",
                s.final_energy.re, s.final_energy.im
            );
            if let (Some(g), Some(err)) = (s.ed_ground_energy, s.abs_error) {
                println!("ED ground energy: {} {:+}i", g.re, g.im);
                println!("absolute error: {err:e}");
            }
            println!("artifacts: {}", out.display());
            if let Some(f) = &s.failure {
                eprintln!("numerical failure: {f}");
            }
            Ok(if s.numerical_failure() {
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            })
        }
        Command::Ed {
            hamiltonian,
            k,
            json,
        } => {
            let h = match hamiltonian {
                Some(path) => PauliSum::read_file(path)?,
                None => g.load()?.hamiltonian,
            };
            let report = commands::diagonalize(&h, *k)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(EXIT_OK)
        }
        Command::Validate => {
            let run = g.load()?;
            let report = commands::validate_evaluators(&run)?;
            let out = g.output_dir(&run);
            std::fs::create_dir_all(&out)?;
            write_json(out.join("validate.json"), &report)?;
            println!("draws: {}", report.draws);
            println!(
                "max |expectation deviation|: {:e}",
                report.max_dev_expectation
            );
            println!("max |A deviation|: {:e}", report.max_dev_a);
            println!("max |C deviation|: {:e}", report.max_dev_c);
            println!(
                "{} (tolerance {:e})",
                if report.passed { "PASS" } else { "FAIL" },
                report.tolerance
            );
            Ok(if report.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            })
        }
        Command::Gradcheck => {
            let run = g.load()?;
            let report = commands::check_gradients(&run)?;
            let out = g.output_dir(&run);
            std::fs::create_dir_all(&out)?;
            write_json(out.join("gradcheck.json"), &report)?;
            println!("max |C + grad/2|: {:e}", report.max_c_error);
            println!("max |A - A_fd|: {:e}", report.max_a_error);
            println!("max |A_ii - 1/4|: {:e}", report.max_a_diag_deviation);
            if let Some(c) = report.stationary_c_norm {
                println!("|C|_inf after convergence: {c:e}");
            }
            println!(
                "{} (tolerance {:e})",
                if report.passed { "PASS" } else { "FAIL" },
                report.tolerance
            );
            Ok(if report.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            })
        }
        Command::Sweep => {
            let run = g.load()?;
            let out = g.output_dir(&run);
            let report = commands::sweep(&run, &out)?;
            for arm in &report.arms {
                let s = &arm.study;
                println!(
                    "{}: {}/{} seeds within {:e}, {} converged, iteration histogram {:?}",
                    arm.name,
                    s.success_count,
                    s.seeds.len(),
                    s.threshold,
                    s.converged_count,
                    s.iteration_histogram.counts
                );
            }
            println!("artifacts: {}", out.display());
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                super::EXIT_CONFIG
            } else {
                EXIT_OK
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return super::EXIT_CONFIG;
        }
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
