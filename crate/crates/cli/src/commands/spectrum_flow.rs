//! `spectrum-flow`: continuation curves of the top-imaginary levels across
//! a dissipation grid, with the crossing intervals of the dominant level.

use nhspin::io::fmt_f64;
use nhspin::track_levels;

use super::{check_guard, spectral_bytes};
use crate::config::{Config, DEFAULT_K_LEVELS};
use crate::manifest::Manifest;
use crate::output::OutputDir;
use crate::CliError;

/// A tracked eigenvalue counts as the pointwise dominant one when it agrees
/// with the recorded maximum to this relative tolerance (the two come from
/// separate solver calls).
const MAX_MATCH_TOL: f64 = 1e-10;

pub fn run(cfg: &Config) -> Result<bool, CliError> {
    let spec = cfg.spec()?;
    let grid = cfg.gamma_grid("0:2:0.05")?;
    if grid.len() < 2 {
        return Err(CliError::Usage(
            "key `gamma`: spectrum-flow needs a grid of at least two points".into(),
        ));
    }
    let k_levels = cfg.usize_or("k_levels", DEFAULT_K_LEVELS)?;
    if k_levels == 0 || k_levels > spec.dim() {
        return Err(CliError::Usage(format!(
            "key `k_levels`: must be within [1, {}]",
            spec.dim()
        )));
    }
    let allow_large = cfg.bool_or("allow_large", false)?;
    check_guard(
        spectral_bytes(spec.n),
        allow_large,
        "spectrum-flow diagonalization",
    )?;

    let mut out = OutputDir::create(&cfg.output_dir())?;
    let mut manifest = Manifest::begin(cfg);

    let flow = track_levels(&spec, &grid, k_levels).map_err(CliError::Core)?;
    for w in &flow.warnings {
        manifest.warn(w.clone());
    }

    let mut csv = String::from("gamma,level_index,re,im,is_max\n");
    for (k, &gamma) in flow.gamma_grid.iter().enumerate() {
        let top = flow.max_imag_curve[k];
        for (li, level) in flow.tracked.iter().enumerate() {
            let e = level.eigenvalues[k];
            let is_max = (e - top).norm() <= MAX_MATCH_TOL * (1.0 + top.norm());
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(gamma),
                li,
                fmt_f64(e.re),
                fmt_f64(e.im),
                u8::from(is_max),
            ));
        }
        manifest.point(format!("gamma={gamma}"), true);
    }
    out.put("spectrum_flow.csv", csv.as_bytes())?;

    let mut json = String::new();
    json.push_str("{\n");
    json.push_str(&format!("  \"k_levels\": {k_levels},\n"));
    json.push_str(&format!(
        "  \"crossing_count\": {},\n",
        flow.crossings.len()
    ));
    json.push_str("  \"crossings\": [\n");
    for (i, (lo, hi)) in flow.crossings.iter().enumerate() {
        let comma = if i + 1 == flow.crossings.len() { "" } else { "," };
        json.push_str(&format!(
            "    {{\"gamma_lo\": {}, \"gamma_hi\": {}}}{comma}\n",
            fmt_f64(*lo),
            fmt_f64(*hi)
        ));
    }
    json.push_str("  ],\n");
    json.push_str("  \"levels\": [\n");
    for (li, level) in flow.tracked.iter().enumerate() {
        let comma = if li + 1 == flow.tracked.len() { "" } else { "," };
        json.push_str(&format!(
            "    {{\"level_index\": {li}, \"end_sector\": {}, \"min_overlap\": {}, \
             \"ambiguous_points\": {}}}{comma}\n",
            level.end_id.sector,
            fmt_f64(level.min_overlap),
            level.ambiguous_at.len()
        ));
    }
    json.push_str("  ]\n}\n");
    out.put("crossings.json", json.as_bytes())?;

    manifest.finish(&mut out)
}
