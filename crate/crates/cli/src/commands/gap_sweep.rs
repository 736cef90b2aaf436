//! `gap-sweep`: complex-gap tables over a dissipation grid, one CSV per
//! `(N, Omega)` pair, plus the extracted critical rates.

use nhspin::io::fmt_f64;
use nhspin::{critical_rate, gap_sweep_with_cut, CRITICAL_RATE_DEFAULT_FRACTION};

use super::{check_guard, label_f64, spectral_bytes};
use crate::config::Config;
use crate::manifest::Manifest;
use crate::output::OutputDir;
use crate::CliError;

pub fn run(cfg: &Config) -> Result<bool, CliError> {
    let ns = cfg.n_list()?;
    let omegas = cfg.omega_list()?;
    let grid = cfg.gamma_grid("0:2:0.05")?;
    let fraction = cfg.f64_or("threshold", CRITICAL_RATE_DEFAULT_FRACTION)?;
    let allow_large = cfg.bool_or("allow_large", false)?;
    for &n in &ns {
        check_guard(spectral_bytes(n), allow_large, "gap-sweep diagonalization")?;
    }

    let mut out = OutputDir::create(&cfg.output_dir())?;
    let mut manifest = Manifest::begin(cfg);
    let mut rates = Vec::new();

    for &n in &ns {
        for &omega in &omegas {
            let spec = cfg.spec_for(n, omega)?;
            let cut = cfg.cut_or_half(n)?;
            let table = gap_sweep_with_cut(&spec, &grid, cut).map_err(CliError::Core)?;
            for row in &table.rows {
                manifest.point(
                    format!("N={n} Omega={} gamma={}", label_f64(omega), label_f64(row.gamma)),
                    row.converged,
                );
            }
            let mut body = Vec::new();
            table.write_csv(&mut body).map_err(CliError::Core)?;
            out.put(
                &format!("gap_sweep_N{n}_Omega{}.csv", label_f64(omega)),
                &body,
            )?;
            rates.push((n, omega, critical_rate(&table, fraction)));
        }
    }

    let mut json = String::new();
    json.push_str("{\n");
    json.push_str(&format!(
        "  \"threshold_fraction\": {},\n",
        fmt_f64(fraction)
    ));
    json.push_str("  \"rates\": [\n");
    for (i, (n, omega, rate)) in rates.iter().enumerate() {
        let comma = if i + 1 == rates.len() { "" } else { "," };
        let value = match rate {
            Some(r) => fmt_f64(*r),
            None => "null".to_string(),
        };
        json.push_str(&format!(
            "    {{\"N\": {n}, \"Omega\": {}, \"critical_rate\": {value}}}{comma}\n",
            fmt_f64(*omega)
        ));
    }
    json.push_str("  ]\n}\n");
    out.put("critical_rates.json", json.as_bytes())?;

    manifest.finish(&mut out)
}
