//! One runner per subcommand. Each builds its outputs in memory, writes
//! them atomically, and finishes with the manifest; the returned flag is
//! the all-points-converged verdict that decides the exit status.

pub mod entropy_scaling;
pub mod evolve;
pub mod gap_sweep;
pub mod spectrum_flow;
pub mod trajectory_check;

use nhspin::{Error, StateVector};

use crate::config::Config;
use crate::CliError;

/// Commands whose estimated working memory exceeds this refuse to start
/// unless `allow_large=true`.
pub const GUARD_BYTES: u64 = 8 << 30;

/// Peak-memory model for one momentum-block eigensolve of a size-`n` chain:
/// the sparse matrix plus LAPACK's dense workspace on the largest block.
pub fn spectral_bytes(n: usize) -> u64 {
    let dim = 1u64 << n;
    let csr = dim * (n as u64 + 2) * 24;
    let block = dim / n as u64 + 2;
    csr + 4 * block * block * 16
}

/// Peak-memory model for expansion propagation: the sparse matrix and a
/// fixed handful of state vectors.
pub fn propagation_bytes(n: usize) -> u64 {
    let dim = 1u64 << n;
    dim * (n as u64 + 2) * 24 + 6 * dim * 16
}

pub fn check_guard(bytes: u64, allow_large: bool, what: &str) -> Result<(), CliError> {
    if bytes > GUARD_BYTES && !allow_large {
        return Err(CliError::Core(Error::ResourceGuard(format!(
            "{what}: estimated {:.1} GiB working memory exceeds the 8 GiB guard; \
             set allow_large=true to proceed",
            bytes as f64 / (1u64 << 30) as f64
        ))));
    }
    Ok(())
}

/// Initial state selected by the `initial` key.
pub fn initial_state(cfg: &Config, n: usize) -> Result<StateVector, CliError> {
    match cfg.initial()? {
        "neel" => StateVector::neel(n).map_err(|e| CliError::Usage(e.to_string())),
        _ => Ok(StateVector::plus_product(n)),
    }
}

/// Compact float formatting for file names and point labels (not data).
pub fn label_f64(x: f64) -> String {
    format!("{x}")
}
