//! `evolve`: expansion-propagated entropy and norm-loss time series for a
//! single parameter point.

use nhspin::{evolve_trajectory, EvolveOptions};

use super::{check_guard, initial_state, propagation_bytes};
use crate::config::{Config, DEFAULT_DT, DEFAULT_TAIL_TOL, DEFAULT_T_MAX};
use crate::manifest::Manifest;
use crate::output::OutputDir;
use crate::CliError;

pub fn run(cfg: &Config) -> Result<bool, CliError> {
    let spec = cfg.spec()?.with_gamma(cfg.gamma_scalar(0.4)?);
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let allow_large = cfg.bool_or("allow_large", false)?;
    check_guard(propagation_bytes(spec.n), allow_large, "evolve propagation")?;

    let mut opts = EvolveOptions::new(&spec);
    opts.dt = cfg.f64_or("dt", DEFAULT_DT)?;
    opts.tail_tol = cfg.f64_or("tail_tol", DEFAULT_TAIL_TOL)?;
    opts.t_max = cfg.f64_or("t_max", DEFAULT_T_MAX)?;
    opts.cut = cfg.cut_or_half(spec.n)?;
    let v0 = initial_state(cfg, spec.n)?;

    let mut out = OutputDir::create(&cfg.output_dir())?;
    let mut manifest = Manifest::begin(cfg);

    let series = evolve_trajectory(&spec, &v0, &opts).map_err(CliError::Core)?;
    manifest.point(
        format!(
            "gamma={} t_final={} order={}",
            spec.gamma,
            series.final_time(),
            series.expansion_order
        ),
        true,
    );
    if !series.steady_reached {
        manifest.warn(format!(
            "entropy not steady by t_max={}; series ends mid-transient",
            opts.t_max
        ));
    }

    let mut body = Vec::new();
    series.write_csv(&mut body).map_err(CliError::Core)?;
    out.put("evolve.csv", &body)?;

    manifest.finish(&mut out)
}
