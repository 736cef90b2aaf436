//! Batch front-end for the dissipative spin-chain library.
//!
//! Subcommands consume flat `key=value` configs, write CSV/JSON artifacts
//! plus a run manifest into the output directory, and signal through the
//! exit status: 0 success, 1 usage, 2 numerical failure, 3 resource refusal.

use std::fmt;
use std::path::Path;

mod commands;
mod config;
mod manifest;
mod output;

use config::{Command, Config};

#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation or config; exit status 1.
    Usage(String),
    /// Failure surfaced by the library; exit status 2, or 3 for guards.
    Core(nhspin::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<nhspin::Error> for CliError {
    fn from(e: nhspin::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(nhspin::Error::ResourceGuard(_)) => 3,
            CliError::Core(_) => 2,
        }
    }

    /// Adapter for `std::io::Error` at a known path.
    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |e| CliError::Usage(format!("cannot write `{}`: {e}", path.display()))
    }
}

const USAGE: &str = "\
usage: nhspin <command> [key=value ...] [config=FILE]

commands:
  gap-sweep        complex gap vs gamma; one CSV per (N, Omega), critical rates JSON
  spectrum-flow    eigenvalue continuation curves and dominant-level crossings
  evolve           entropy / norm-loss time series from an initial product state
  entropy-scaling  steady-state entropy vs chain length, linear fit + classification
  trajectory-check quantum-jump ensemble vs dense Lindblad reference

keys (defaults in parentheses):
  model=NHTFI|NHXX|NHXX_FIELD   required
  N=<sites>                     required unless N_list is given
  N_list=8,10,12                entropy-scaling / gap-sweep
  J=<coupling> (1)              Omega=<field> (0)      Omega_list=a,b
  gamma=<x | a,b,c | lo:hi[:step]>   grid step defaults to 0.05
  dt (0.05)  tail_tol (1e-12)  t_max (200; 20 for trajectory-check)
  cut (N/2)  seed (1)  n_traj (2000)  k_levels (8)
  method=dynamics|spectral (dynamics)
  sampler=norm-threshold|euler (norm-threshold)
  initial=plus|neel (plus)
  threshold=<gap fraction> (0.02)
  allow_large=true|false (false)
  output=<dir> (.)
  config=FILE                   key=value lines, `#` comments; CLI keys win

exit status: 0 success, 1 usage, 2 numerical failure, 3 resource refusal";

fn dispatch(cfg: &Config) -> Result<bool, CliError> {
    match cfg.command {
        Command::GapSweep => commands::gap_sweep::run(cfg),
        Command::SpectrumFlow => commands::spectrum_flow::run(cfg),
        Command::Evolve => commands::evolve::run(cfg),
        Command::EntropyScaling => commands::entropy_scaling::run(cfg),
        Command::TrajectoryCheck => commands::trajectory_check::run(cfg),
    }
}

fn run(args: &[String]) -> Result<bool, CliError> {
    let Some(first) = args.first() else {
        return Err(CliError::Usage(USAGE.into()));
    };
    if first == "help" || first == "--help" || first == "-h" {
        // tolerate a closed pipe (`nhspin help | head`)
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), "{USAGE}");
        return Ok(true);
    }
    let command = Command::parse(first)?;
    let cfg = Config::from_args(command, &args[1..])?;
    dispatch(&cfg)
}

fn main() {
    // deterministic BLAS regardless of the host's core count; an explicit
    // environment setting wins
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match run(&args) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("warning: some points failed; outputs retained with converged=0 flags");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
