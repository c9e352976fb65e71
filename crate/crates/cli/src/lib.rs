//! Experiment runner: configs in, CSVs, snapshots, plots and manifests out.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use commands::{
    cmd_decay_scan, cmd_front_scan, cmd_ineq_lab, cmd_report, cmd_run, cmd_virial_check, Outcome,
};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "bovirial", version, about = "Benjamin-Ono simulator and virial diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; defaults to $BOVIRIAL_OUT/<experiment id>.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides the lab family seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for parallel scans.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evolve the initial data and store snapshots and the conservation ledger.
    Run,
    /// Regional masses, weighted functionals and the decay accumulator.
    DecayScan,
    /// Masses beyond the right and left fronts.
    FrontScan,
    /// Term-by-term check of the weighted-mass identity.
    VirialCheck,
    /// Randomized commutator and interpolation inequality families.
    IneqLab,
    /// Plots and summary for a finished experiment directory.
    Report {
        /// Experiment directory; falls back to --out.
        run_dir: Option<PathBuf>,
    },
}

impl Cli {
    pub fn execute(&self) -> Result<Outcome, CliError> {
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Config("--threads must be positive".into()));
            }
            // Fails only when a pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let out = self.out.as_deref();
        let config = || {
            self.config
                .as_deref()
                .ok_or_else(|| CliError::Config("--config is required".into()))
        };
        match &self.command {
            Command::Run => cmd_run(config()?, out),
            Command::DecayScan => cmd_decay_scan(config()?, out),
            Command::FrontScan => cmd_front_scan(config()?, out),
            Command::VirialCheck => cmd_virial_check(config()?, out),
            Command::IneqLab => cmd_ineq_lab(config()?, out, self.seed),
            Command::Report { run_dir } => {
                let dir = run_dir
                    .as_deref()
                    .or(out)
                    .ok_or_else(|| CliError::MissingData("report needs a run directory".into()))?;
                cmd_report(dir)
            }
        }
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.execute() {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            println!("results in {}", outcome.dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
