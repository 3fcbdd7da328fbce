//! Output staging and the run manifest.
//!
//! Artifacts are collected in memory and written only once the command has
//! succeeded, each through a temporary file that is renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;
use warpband::io::to_json;
use warpband::{Error, Result};

use crate::config::RunConfig;

pub const MANIFEST_FORMAT: &str = "warpband-manifest/1";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads an input file and records its name and hash.
pub fn read_input(path: &Path, inputs: &mut Vec<FileRecord>) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    inputs.push(FileRecord {
        name: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: sha256_hex(&bytes),
    });
    String::from_utf8(bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<()> {
        self.add(name, to_json(value)?);
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    format: &'static str,
    command: &'a str,
    version: &'static str,
    config: &'a RunConfig,
    parameters: &'a Value,
    inputs: &'a [FileRecord],
    outputs: Vec<FileRecord>,
}

/// Writes every staged file and then the manifest into `config.out_dir`.
pub fn commit(
    config: &RunConfig,
    command: &str,
    parameters: &Value,
    inputs: &[FileRecord],
    outputs: Outputs,
) -> Result<()> {
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let records = outputs
        .files
        .iter()
        .map(|(name, bytes)| FileRecord {
            name: name.clone(),
            sha256: sha256_hex(bytes),
        })
        .collect();
    let manifest = Manifest {
        format: MANIFEST_FORMAT,
        command,
        version: warpband::VERSION,
        config,
        parameters,
        inputs,
        outputs: records,
    };
    let manifest = to_json(&manifest)?;
    for (name, bytes) in &outputs.files {
        write_atomic(dir, name, bytes)?;
    }
    write_atomic(dir, MANIFEST_NAME, manifest.as_bytes())
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target)
        .map_err(|e| Error::Io(format!("{}: {}", target.display(), e.error)))?;
    Ok(())
}
