//! `entropy-scaling`: steady-state entropy against chain length at each
//! requested dissipation rate, with the linear fit and its classification.

use nhspin::{scaling_analysis, Error, ScalingMethod};

use super::{check_guard, label_f64, propagation_bytes, spectral_bytes};
use crate::config::Config;
use crate::manifest::Manifest;
use crate::output::OutputDir;
use crate::CliError;

pub fn run(cfg: &Config) -> Result<bool, CliError> {
    let ns = cfg.n_list()?;
    let gammas = cfg.gamma_grid("0.4")?;
    let method = cfg.scaling_method()?;
    let allow_large = cfg.bool_or("allow_large", false)?;

    let max_n = ns.iter().copied().max().unwrap_or(0);
    match method {
        ScalingMethod::Spectral => {
            // the full-spectrum route at N = 14 is a deliberately gated slow
            // path; the dynamics route stays open at every permitted size
            if max_n >= 14 && !allow_large {
                return Err(CliError::Core(Error::ResourceGuard(
                    "entropy-scaling method=spectral at N=14 is gated as slow; \
                     set allow_large=true or use method=dynamics"
                        .into(),
                )));
            }
            check_guard(spectral_bytes(max_n), allow_large, "entropy-scaling eigensolve")?;
        }
        ScalingMethod::Dynamics => {
            check_guard(
                propagation_bytes(max_n),
                allow_large,
                "entropy-scaling propagation",
            )?;
        }
    }

    let template = cfg.spec_for(*ns.iter().min().unwrap_or(&4), cfg.f64_or("Omega", 0.0)?)?;

    let mut out = OutputDir::create(&cfg.output_dir())?;
    let mut manifest = Manifest::begin(cfg);

    let mut csv = String::new();
    let mut fits = Vec::new();
    for (gi, &gamma) in gammas.iter().enumerate() {
        let record = scaling_analysis(&template, &ns, gamma, method).map_err(CliError::Core)?;
        for &n in &record.n_values {
            manifest.point(format!("N={n} gamma={}", label_f64(gamma)), true);
        }
        for (n, reason) in &record.failures {
            manifest.point(format!("N={n} gamma={}", label_f64(gamma)), false);
            manifest.warn(format!("N={n} gamma={}: {reason}", label_f64(gamma)));
        }
        let mut body = Vec::new();
        record.write_csv(&mut body).map_err(CliError::Core)?;
        let text = String::from_utf8(body).expect("csv is ascii");
        if gi == 0 {
            csv.push_str(&text);
        } else {
            // header only once; later records contribute rows
            let mut lines = text.splitn(2, '\n');
            let _header = lines.next();
            if let Some(rest) = lines.next() {
                csv.push_str(rest);
            }
        }

        let mut fit = Vec::new();
        record.write_fit_json(&mut fit).map_err(CliError::Core)?;
        fits.push(String::from_utf8(fit).expect("json is ascii").trim_end().to_string());
    }
    out.put("entropy_scaling.csv", csv.as_bytes())?;

    let mut json = String::from("[\n");
    for (i, fit) in fits.iter().enumerate() {
        let comma = if i + 1 == fits.len() { "" } else { "," };
        json.push_str(&format!("  {fit}{comma}\n"));
    }
    json.push_str("]\n");
    out.put("scaling_fits.json", json.as_bytes())?;

    manifest.finish(&mut out)
}
