//! Run manifests: what ran, with which inputs, and what it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{commands, exit, input_error, read_input, Command, Common, Exit};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// The command as parsed, with input paths made absolute.
    pub command: Command,
    /// Common flags with the seed actually used filled in.
    pub common: Common,
    /// Every setting the run used, defaults included.
    pub resolved_config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<OutputDigest>,
    pub notes: Vec<String>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs, outputs and notes while a subcommand runs.
pub struct Run {
    out: PathBuf,
    inputs: Vec<InputDigest>,
    outputs: Vec<OutputDigest>,
    notes: Vec<String>,
    pub resolved: serde_json::Value,
    pub seed: Option<u64>,
    started: u64,
}

impl Run {
    pub fn new(out: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(out)
            .with_context(|| format!("cannot create output directory {}", out.display()))?;
        Ok(Self {
            out: out.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
            resolved: serde_json::Value::Null,
            seed: None,
            started: now_ms(),
        })
    }

    /// Reads an input file and records its digest.
    pub fn input(&mut self, role: &str, path: &Path) -> anyhow::Result<Vec<u8>> {
        let bytes = read_input(path)?;
        self.inputs.push(InputDigest {
            role: role.into(),
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        eprintln!("note: {note}");
        self.notes.push(note);
    }

    /// Renders an output in memory, then writes it and records its digest.
    pub fn write(
        &mut self,
        file: &str,
        render: impl FnOnce(&mut Vec<u8>) -> va_core::Result<()>,
    ) -> anyhow::Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        let path = self.out.join(file);
        fs::write(&path, &buf).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(OutputDigest {
            file: file.into(),
            sha256: sha256_hex(&buf),
        });
        Ok(())
    }

    pub fn finish(self, command: &Command, common: &Common) -> anyhow::Result<RunManifest> {
        let manifest = RunManifest {
            tool: "va".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: command.name().into(),
            command: command.clone(),
            common: Common {
                seed: self.seed.or(common.seed),
                out: Some(std::path::absolute(&self.out).unwrap_or(self.out.clone())),
                ..common.clone()
            },
            resolved_config: self.resolved,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            notes: self.notes,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
        };
        let json = serde_json::to_vec_pretty(&manifest)?;
        let path = self.out.join(MANIFEST_FILE);
        fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(manifest)
    }
}

/// Re-runs a recorded command and checks that every output matches.
pub fn replay(path: &Path, cli: &Common) -> anyhow::Result<u8> {
    let bytes = read_input(path)?;
    let recorded: RunManifest = serde_json::from_slice(&bytes)
        .map_err(|e| input_error(format!("{} is not a run manifest: {e}", path.display())))?;
    for input in &recorded.inputs {
        let now = sha256_hex(&read_input(&input.path)?);
        if now != input.sha256 {
            return Err(Exit {
                code: exit::INPUT,
                message: format!(
                    "{} input {} changed since the recorded run",
                    input.role,
                    input.path.display()
                ),
            }
            .into());
        }
    }
    let original_out = recorded
        .common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("va-out"));
    let out = cli.out.clone().unwrap_or_else(|| {
        let mut name = original_out.file_name().unwrap_or_default().to_os_string();
        name.push("-replay");
        original_out.with_file_name(name)
    });
    let common = Common {
        out: Some(out.clone()),
        threads: cli.threads,
        ..recorded.common.clone()
    };
    let (code, fresh) = commands::execute(recorded.command.clone(), common)?;
    let differing: Vec<&str> = recorded
        .outputs
        .iter()
        .filter(|o| !fresh.outputs.contains(o))
        .map(|o| o.file.as_str())
        .collect();
    if differing.is_empty() && fresh.outputs.len() == recorded.outputs.len() {
        println!(
            "replay: {} outputs identical in {}",
            recorded.outputs.len(),
            out.display()
        );
        Ok(code)
    } else {
        println!("replay: outputs differ: {}", differing.join(", "));
        Ok(exit::FINDINGS)
    }
}
