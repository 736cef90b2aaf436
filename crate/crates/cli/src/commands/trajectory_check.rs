//! `trajectory-check`: quantum-jump ensemble versus the dense Lindblad
//! reference, reported as trace distances against statistical bounds.

use nhspin::{jump_lindblad_agreement, JumpModel, TrajectoryOptions, LINDBLAD_MAX_SITES};

use super::initial_state;
use crate::config::{Config, DEFAULT_DT, DEFAULT_N_TRAJ, DEFAULT_SEED};

/// Ensembles equilibrate within a few multiples of `1/gamma`; the evolve
/// command's 200-unit horizon would only add statistical noise here.
const DEFAULT_TRAJ_T_MAX: f64 = 20.0;
use crate::manifest::Manifest;
use crate::output::OutputDir;
use crate::CliError;

pub fn run(cfg: &Config) -> Result<bool, CliError> {
    let spec = cfg.spec()?.with_gamma(cfg.gamma_scalar(0.4)?);
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if spec.n > LINDBLAD_MAX_SITES {
        return Err(CliError::Usage(format!(
            "key `N`: the dense reference integrates the full density matrix; \
             N <= {LINDBLAD_MAX_SITES} required, got {}",
            spec.n
        )));
    }

    let mut opts = TrajectoryOptions::new(
        cfg.f64_or("dt", DEFAULT_DT)?,
        cfg.f64_or("t_max", DEFAULT_TRAJ_T_MAX)?,
        cfg.sampler()?,
    );
    opts.tail_tol = cfg.f64_or("tail_tol", 1e-10)?;
    let n_steps = (opts.t_max / opts.dt).floor().max(1.0) as usize;
    opts.checkpoint_every = (n_steps / 8).max(1);
    let n_traj = cfg.usize_or("n_traj", DEFAULT_N_TRAJ)?;
    let seed = cfg.u64_or("seed", DEFAULT_SEED)?;
    let v0 = initial_state(cfg, spec.n)?;

    let mut out = OutputDir::create(&cfg.output_dir())?;
    let mut manifest = Manifest::begin(cfg);

    let identity_error = JumpModel::new(&spec)
        .map_err(CliError::Core)?
        .generator_identity_error();
    manifest.point(
        format!("generator_identity_error={identity_error:.3e}"),
        identity_error < 1e-12,
    );

    let report =
        jump_lindblad_agreement(&spec, &v0, &opts, n_traj, seed).map_err(CliError::Core)?;
    for (i, t) in report.times.iter().enumerate() {
        manifest.point(
            format!(
                "t={t} trace_distance={:.3e} bound={:.3e}",
                report.trace_distances[i], report.bounds_3sigma[i]
            ),
            report.trace_distances[i] <= report.bounds_3sigma[i],
        );
    }

    let mut body = Vec::new();
    report.write_json(&mut body).map_err(CliError::Core)?;
    out.put("trajectory_check.json", &body)?;

    manifest.finish(&mut out)
}
