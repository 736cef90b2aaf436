//! Run manifest: the provenance record written alongside every output.

use std::time::Instant;

use nhspin::io::fmt_f64;

use crate::config::Config;
use crate::output::OutputDir;
use crate::CliError;

/// Accumulates convergence flags and warnings while a command runs, then
/// serializes itself as the final artifact of the run directory.
pub struct Manifest {
    command: &'static str,
    config: Vec<(String, String)>,
    points: Vec<(String, bool)>,
    warnings: Vec<String>,
    started: Instant,
}

impl Manifest {
    pub fn begin(config: &Config) -> Manifest {
        Manifest {
            command: config.command.name(),
            config: config
                .echo()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            points: Vec::new(),
            warnings: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Record one unit of work and whether it converged.
    pub fn point(&mut self, label: impl Into<String>, converged: bool) {
        self.points.push((label.into(), converged));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|(_, ok)| *ok)
    }

    /// Serialize and write `manifest.json`; call after every other artifact
    /// so the checksum list is complete.
    pub fn finish(self, out: &mut OutputDir) -> Result<bool, CliError> {
        let all = self.all_converged();
        let mut s = String::new();
        s.push_str("{\n");
        s.push_str(&format!("  \"command\": \"{}\",\n", self.command));
        s.push_str(&format!(
            "  \"version\": \"{}\",\n",
            env!("CARGO_PKG_VERSION")
        ));
        s.push_str("  \"config\": {\n");
        for (i, (k, v)) in self.config.iter().enumerate() {
            let comma = if i + 1 == self.config.len() { "" } else { "," };
            s.push_str(&format!(
                "    \"{}\": \"{}\"{comma}\n",
                json_escape(k),
                json_escape(v)
            ));
        }
        s.push_str("  },\n");
        s.push_str("  \"points\": [\n");
        for (i, (label, ok)) in self.points.iter().enumerate() {
            let comma = if i + 1 == self.points.len() { "" } else { "," };
            s.push_str(&format!(
                "    {{\"label\": \"{}\", \"converged\": {ok}}}{comma}\n",
                json_escape(label)
            ));
        }
        s.push_str("  ],\n");
        s.push_str(&format!("  \"all_converged\": {all},\n"));
        s.push_str("  \"warnings\": [\n");
        for (i, w) in self.warnings.iter().enumerate() {
            let comma = if i + 1 == self.warnings.len() { "" } else { "," };
            s.push_str(&format!("    \"{}\"{comma}\n", json_escape(w)));
        }
        s.push_str("  ],\n");
        s.push_str("  \"outputs\": [\n");
        for (i, f) in out.files().iter().enumerate() {
            let comma = if i + 1 == out.files().len() { "" } else { "," };
            s.push_str(&format!(
                "    {{\"file\": \"{}\", \"sha256\": \"{}\"}}{comma}\n",
                json_escape(&f.name),
                f.sha256
            ));
        }
        s.push_str("  ],\n");
        s.push_str(&format!(
            "  \"wall_time_seconds\": {}\n",
            fmt_f64(self.started.elapsed().as_secs_f64())
        ));
        s.push_str("}\n");
        out.put("manifest.json", s.as_bytes())?;
        Ok(all)
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
