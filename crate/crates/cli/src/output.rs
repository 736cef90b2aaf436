//! Atomic output files.
//!
//! Every artifact is written to a sibling temporary file and renamed into
//! place, so a crash never leaves a half-written CSV behind. The content
//! hash of each finished file is collected for the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

/// One finished artifact: final name plus content hash.
#[derive(Debug, Clone)]
pub struct WrittenFile {
    pub name: String,
    pub sha256: String,
}

/// Collects artifacts for a single run directory.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<WrittenFile>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<OutputDir, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Usage(format!("cannot create output dir `{}`: {e}", dir.display())))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Write `body` under `name` atomically and record its checksum.
    pub fn put(&mut self, name: &str, body: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, body)?;
        self.written.push(WrittenFile {
            name: name.to_string(),
            sha256: hex_sha256(body),
        });
        Ok(())
    }

    pub fn files(&self) -> &[WrittenFile] {
        &self.written
    }
}

pub fn write_atomic(path: &Path, body: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body).map_err(CliError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(CliError::io(path))?;
    Ok(())
}

pub fn hex_sha256(body: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(body);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
