//! Flat `key=value` experiment configs.
//!
//! A config is assembled from an optional `config=FILE` (same syntax, one
//! pair per line, `#` comments) with the remaining command-line pairs
//! layered on top. Every key has a default except `model` and `N`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nhspin::{JumpSampler, Model, ScalingMethod, SpinChainSpec};

use crate::CliError;

/// Grid step used when a `gamma=a:b` range omits one.
pub const DEFAULT_GRID_STEP: f64 = 0.05;

pub const DEFAULT_DT: f64 = 0.05;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_T_MAX: f64 = 200.0;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_N_TRAJ: usize = 2000;
pub const DEFAULT_K_LEVELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GapSweep,
    SpectrumFlow,
    Evolve,
    EntropyScaling,
    TrajectoryCheck,
}

impl Command {
    pub fn parse(s: &str) -> Result<Command, CliError> {
        match s {
            "gap-sweep" => Ok(Command::GapSweep),
            "spectrum-flow" => Ok(Command::SpectrumFlow),
            "evolve" => Ok(Command::Evolve),
            "entropy-scaling" => Ok(Command::EntropyScaling),
            "trajectory-check" => Ok(Command::TrajectoryCheck),
            other => Err(CliError::Usage(format!("unknown command `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::GapSweep => "gap-sweep",
            Command::SpectrumFlow => "spectrum-flow",
            Command::Evolve => "evolve",
            Command::EntropyScaling => "entropy-scaling",
            Command::TrajectoryCheck => "trajectory-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "N",
    "N_list",
    "J",
    "Omega",
    "Omega_list",
    "gamma",
    "dt",
    "tail_tol",
    "t_max",
    "cut",
    "seed",
    "output",
    "method",
    "n_traj",
    "k_levels",
    "allow_large",
    "threshold",
    "sampler",
    "initial",
];

/// Parsed but untyped key/value pairs; typed readers live on the methods.
#[derive(Debug, Clone)]
pub struct Config {
    pub command: Command,
    values: BTreeMap<String, String>,
}

fn split_pair(token: &str) -> Result<(&str, &str), CliError> {
    match token.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k, v)),
        _ => Err(CliError::Usage(format!(
            "expected key=value, got `{token}`"
        ))),
    }
}

impl Config {
    /// Assemble from the argument list after the command word.
    pub fn from_args(command: Command, args: &[String]) -> Result<Config, CliError> {
        let mut file_values = BTreeMap::new();
        let mut cli_values = BTreeMap::new();
        for token in args {
            let (key, value) = split_pair(token)?;
            if key == "config" {
                let text = std::fs::read_to_string(value).map_err(|e| {
                    CliError::Usage(format!("cannot read config file `{value}`: {e}"))
                })?;
                for line in text.lines() {
                    let line = line.split('#').next().unwrap_or("").trim();
                    if line.is_empty() {
                        continue;
                    }
                    let (k, v) = split_pair(line)?;
                    Self::check_key(k)?;
                    file_values.insert(k.to_string(), v.to_string());
                }
            } else {
                Self::check_key(key)?;
                cli_values.insert(key.to_string(), value.to_string());
            }
        }
        file_values.extend(cli_values);
        Ok(Config {
            command,
            values: file_values,
        })
    }

    fn check_key(key: &str) -> Result<(), CliError> {
        if KNOWN_KEYS.contains(&key) {
            Ok(())
        } else {
            Err(CliError::Usage(format!("unknown key `{key}`")))
        }
    }

    /// The merged pairs, sorted by key; echoed into the manifest.
    pub fn echo(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse_with<T, F>(&self, key: &str, f: F) -> Result<Option<T>, CliError>
    where
        F: FnOnce(&str) -> Option<T>,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => f(raw).map(Some).ok_or_else(|| {
                CliError::Usage(format!("key `{key}`: cannot parse `{raw}`"))
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self
            .parse_with(key, |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))?
            .unwrap_or(default);
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.parse_with(key, |s| s.parse().ok())?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.parse_with(key, |s| s.parse().ok())?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        Ok(self
            .parse_with(key, |s| match s {
                "true" | "1" | "yes" => Some(true),
                "false" | "0" | "no" => Some(false),
                _ => None,
            })?
            .unwrap_or(default))
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let raw = self
            .get("model")
            .ok_or_else(|| CliError::Usage("key `model` is required".into()))?;
        Model::parse(raw).map_err(|_| CliError::Usage(format!("key `model`: unknown model `{raw}`")))
    }

    /// Single chain length from `N`.
    pub fn n(&self) -> Result<usize, CliError> {
        self.parse_with("N", |s| s.parse().ok())?
            .ok_or_else(|| CliError::Usage("key `N` is required".into()))
    }

    /// Chain lengths from `N_list`, falling back to the single `N`.
    pub fn n_list(&self) -> Result<Vec<usize>, CliError> {
        if let Some(list) = self.parse_with("N_list", parse_usize_list)? {
            if list.is_empty() {
                return Err(CliError::Usage("key `N_list` is empty".into()));
            }
            return Ok(list);
        }
        Ok(vec![self.n()?])
    }

    /// Field strengths from `Omega_list`, falling back to `Omega` (default 0).
    pub fn omega_list(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = self.parse_with("Omega_list", parse_f64_list)? {
            if list.is_empty() {
                return Err(CliError::Usage("key `Omega_list` is empty".into()));
            }
            return Ok(list);
        }
        Ok(vec![self.f64_or("Omega", 0.0)?])
    }

    /// The physical spec for a single-(N, Omega) command.
    pub fn spec(&self) -> Result<SpinChainSpec, CliError> {
        self.spec_for(self.n()?, self.f64_or("Omega", 0.0)?)
    }

    pub fn spec_for(&self, n: usize, omega: f64) -> Result<SpinChainSpec, CliError> {
        let mut spec = SpinChainSpec::new(self.model()?, n)
            .with_coupling(self.f64_or("J", 1.0)?)
            .with_omega(omega);
        if self.bool_or("allow_large", false)? {
            spec = spec.allow_large();
        }
        // surfaced now so a bad model/field combination is a usage error
        // rather than a mid-run failure; size-guard refusals keep their
        // exit status
        spec.validate().map_err(|e| match e {
            nhspin::Error::ResourceGuard(_) => CliError::Core(e),
            other => CliError::Usage(other.to_string()),
        })?;
        Ok(spec)
    }

    /// `gamma` as a grid: `a:b:c` (start:stop:step), `a:b` with the default
    /// step, or an explicit comma list. A bare scalar is a one-point grid.
    pub fn gamma_grid(&self, default: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.get("gamma").unwrap_or(default);
        parse_gamma(raw).ok_or_else(|| {
            CliError::Usage(format!("key `gamma`: cannot parse `{raw}` as value or grid"))
        })
    }

    /// `gamma` as a single value; grids are rejected.
    pub fn gamma_scalar(&self, default: f64) -> Result<f64, CliError> {
        match self.get("gamma") {
            None => Ok(default),
            Some(raw) => match parse_gamma(raw) {
                Some(g) if g.len() == 1 => Ok(g[0]),
                _ => Err(CliError::Usage(format!(
                    "key `gamma`: this command takes a single value, got `{raw}`"
                ))),
            },
        }
    }

    pub fn scaling_method(&self) -> Result<ScalingMethod, CliError> {
        match self.get("method") {
            None => Ok(ScalingMethod::Dynamics),
            Some(raw) => ScalingMethod::parse(raw)
                .map_err(|_| CliError::Usage(format!("key `method`: unknown method `{raw}`"))),
        }
    }

    pub fn sampler(&self) -> Result<JumpSampler, CliError> {
        match self.get("sampler") {
            None => Ok(JumpSampler::NormThreshold),
            Some(raw) => JumpSampler::parse(raw)
                .map_err(|_| CliError::Usage(format!("key `sampler`: unknown sampler `{raw}`"))),
        }
    }

    /// Initial state name: `plus` (separable default) or `neel`.
    pub fn initial(&self) -> Result<&str, CliError> {
        match self.get("initial") {
            None => Ok("plus"),
            Some("plus") => Ok("plus"),
            Some("neel") => Ok("neel"),
            Some(other) => Err(CliError::Usage(format!(
                "key `initial`: expected plus or neel, got `{other}`"
            ))),
        }
    }

    /// Output directory (default: current directory).
    pub fn output_dir(&self) -> PathBuf {
        Path::new(self.get("output").unwrap_or(".")).to_path_buf()
    }

    /// Entropy cut, defaulting to `N/2`.
    pub fn cut_or_half(&self, n: usize) -> Result<usize, CliError> {
        self.usize_or("cut", n / 2)
    }
}

fn parse_usize_list(s: &str) -> Option<Vec<usize>> {
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

fn parse_f64_list(s: &str) -> Option<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect()
}

fn parse_gamma(raw: &str) -> Option<Vec<f64>> {
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (a.parse().ok()?, b.parse().ok()?, DEFAULT_GRID_STEP),
            [a, b, c] => (a.parse().ok()?, b.parse().ok()?, c.parse().ok()?),
            _ => return None,
        };
        grid(start, stop, step)
    } else {
        let list = parse_f64_list(raw)?;
        if list.is_empty() {
            None
        } else {
            Some(list)
        }
    }
}

/// Inclusive arithmetic grid; the count is rounded so `0:2:0.05` lands on
/// 2.0 exactly despite binary arithmetic.
fn grid(start: f64, stop: f64, step: f64) -> Option<Vec<f64>> {
    if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
        return None;
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Some((0..=count).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cmd: Command, args: &[&str]) -> Result<Config, CliError> {
        let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        Config::from_args(cmd, &owned)
    }

    #[test]
    fn rejects_unknown_keys_by_name() {
        let err = cfg(Command::GapSweep, &["modle=NHTFI"]).unwrap_err();
        assert!(err.to_string().contains("modle"));
    }

    #[test]
    fn rejects_bare_tokens() {
        assert!(cfg(Command::GapSweep, &["NHTFI"]).is_err());
        assert!(cfg(Command::GapSweep, &["N="]).is_err());
    }

    #[test]
    fn grid_syntax_variants() {
        let c = cfg(Command::GapSweep, &["model=NHTFI", "N=4", "gamma=0:2:0.05"]).unwrap();
        let g = c.gamma_grid("0:2").unwrap();
        assert_eq!(g.len(), 41);
        assert!((g[40] - 2.0).abs() < 1e-12);

        let c = cfg(Command::GapSweep, &["model=NHTFI", "N=4", "gamma=0:1"]).unwrap();
        assert_eq!(c.gamma_grid("0:2").unwrap().len(), 21);

        let c = cfg(Command::GapSweep, &["model=NHTFI", "N=4", "gamma=0.4,0.8,1.2"]).unwrap();
        assert_eq!(c.gamma_grid("0:2").unwrap(), vec![0.4, 0.8, 1.2]);

        let c = cfg(Command::Evolve, &["model=NHTFI", "N=4", "gamma=0.4"]).unwrap();
        assert_eq!(c.gamma_scalar(0.0).unwrap(), 0.4);
        assert!(c.gamma_grid("0:2").unwrap().len() == 1);
    }

    #[test]
    fn scalar_commands_reject_grids() {
        let c = cfg(Command::Evolve, &["model=NHTFI", "N=4", "gamma=0:2"]).unwrap();
        assert!(c.gamma_scalar(0.0).is_err());
    }

    #[test]
    fn file_pairs_are_overridden_by_cli_pairs() {
        let dir = std::env::temp_dir().join("nhspin-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "model=NHTFI # comment\nN=6\ngamma=0.5\n\n# full line\n").unwrap();
        let c = cfg(
            Command::Evolve,
            &[&format!("config={}", path.display()), "gamma=0.8"],
        )
        .unwrap();
        assert_eq!(c.n().unwrap(), 6);
        assert_eq!(c.gamma_scalar(0.0).unwrap(), 0.8);
        assert_eq!(c.model().unwrap(), Model::Nhtfi);
    }

    #[test]
    fn defaults_apply() {
        let c = cfg(Command::Evolve, &["model=NHTFI", "N=4"]).unwrap();
        assert_eq!(c.f64_or("J", 1.0).unwrap(), 1.0);
        assert_eq!(c.f64_or("dt", DEFAULT_DT).unwrap(), DEFAULT_DT);
        assert_eq!(c.u64_or("seed", DEFAULT_SEED).unwrap(), DEFAULT_SEED);
        assert_eq!(c.cut_or_half(5).unwrap(), 2);
        assert_eq!(c.initial().unwrap(), "plus");
    }

    #[test]
    fn spec_validation_is_a_usage_error() {
        let c = cfg(Command::GapSweep, &["model=NHXX", "N=4", "Omega=2"]).unwrap();
        match c.spec() {
            Err(CliError::Usage(_)) => {}
            other => panic!("expected usage error, got {other:?}"),
        }
    }
}
