//! Run manifests and atomic file writes.
//!
//! Every subcommand that produces artifacts writes a `run_manifest.txt`
//! next to them recording the subcommand, its settings and a SHA-256 per
//! artifact. The manifest contains no timestamps or absolute paths, so
//! reruns with identical flags produce identical manifests.

use std::fmt::Display;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// Write `bytes` to `path` via a temp file in the same directory plus
/// rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Accumulates settings and artifact hashes for one run.
pub struct Manifest {
    settings: Vec<(String, String)>,
    artifacts: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        let mut m = Manifest { settings: Vec::new(), artifacts: Vec::new() };
        m.setting("tool", format!("slipdet {}", env!("CARGO_PKG_VERSION")));
        m.setting("subcommand", subcommand);
        m
    }

    pub fn setting(&mut self, key: &str, value: impl Display) {
        self.settings.push((key.to_string(), value.to_string()));
    }

    /// Record an artifact by its manifest-relative name and content.
    pub fn artifact(&mut self, name: &str, bytes: &[u8]) {
        self.artifacts.push((name.to_string(), sha256_hex(bytes)));
    }

    /// Write an artifact atomically and record it in one step.
    pub fn write_artifact(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        self.artifact(name, bytes);
        Ok(path)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.settings {
            let _ = writeln!(out, "{k} = {v}");
        }
        let mut sorted = self.artifacts.clone();
        sorted.sort();
        for (name, hash) in sorted {
            let _ = writeln!(out, "artifact sha256 {hash} {name}");
        }
        out
    }

    /// Write `run_manifest.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("run_manifest.txt");
        write_atomic(&path, self.render().as_bytes())?;
        Ok(path)
    }
}
