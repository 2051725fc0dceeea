//! Output staging: every file of a command is rendered in memory first and
//! only written once the whole command has succeeded.

use std::path::{Path, PathBuf};

use serde::Serialize;

use pdc_core::synth::write_files;

use crate::config::sha256_hex;
use crate::error::CliResult;

pub const PROVENANCE_FILE: &str = "provenance.json";

#[derive(Serialize)]
struct OutputHash<'a> {
    file: &'a str,
    sha256: String,
}

#[derive(Serialize)]
struct RunProvenance<'a> {
    tool: String,
    command: &'a str,
    config: String,
    config_sha256: &'a str,
    seed: u64,
    inputs: &'a [String],
    outputs: Vec<OutputHash<'a>>,
}

#[derive(Default)]
pub struct Staged {
    pub files: Vec<(String, String)>,
    pub inputs: Vec<String>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    /// Writes the staged files plus `provenance.json`, which hashes the
    /// config and every output.
    pub fn commit(
        mut self,
        dir: &Path,
        command: &str,
        config: &Path,
        config_sha256: &str,
        seed: u64,
    ) -> CliResult<Vec<PathBuf>> {
        let outputs = self
            .files
            .iter()
            .map(|(f, b)| OutputHash {
                file: f,
                sha256: sha256_hex(b.as_bytes()),
            })
            .collect();
        let prov = RunProvenance {
            tool: format!("pdcal {}", env!("CARGO_PKG_VERSION")),
            command,
            config: config.display().to_string(),
            config_sha256,
            seed,
            inputs: &self.inputs,
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&prov).expect("provenance serializes");
        text.push('\n');
        self.files.push((PROVENANCE_FILE.to_string(), text));
        Ok(write_files(dir, &self.files)?)
    }
}

/// Delimited table with a header row; floats in shortest round-trip form.
pub fn table(header: &[&str], columns: &[&[f64]]) -> String {
    use std::fmt::Write as _;
    let n = columns.first().map_or(0, |c| c.len());
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..n {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", c[i]);
        }
        out.push('\n');
    }
    out
}

pub fn flags(mask: &[bool]) -> Vec<f64> {
    mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}
