//! Report envelope and writers. Output is a pure function of config and inputs.

use crate::error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub config_sha256: String,
    pub inputs: Vec<InputHash>,
    pub data: T,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> Result<InputHash, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(InputHash { path: name, sha256: sha256_hex(&bytes) })
}

/// A command result: a JSON payload and, for tabular commands, CSV rows.
pub struct Output {
    pub json: serde_json::Value,
    pub csv: Option<Vec<u8>>,
    pub inputs: Vec<InputHash>,
}

impl Output {
    pub fn json<T: Serialize>(data: &T) -> Result<Self, CliError> {
        Ok(Output { json: to_value(data)?, csv: None, inputs: Vec::new() })
    }

    pub fn table<T: Serialize, R: Serialize>(data: &T, rows: &[R]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Output { json: to_value(data)?, csv: Some(bytes), inputs: Vec::new() })
    }

    pub fn with_inputs(mut self, inputs: Vec<InputHash>) -> Self {
        self.inputs = inputs;
        self
    }
}

fn to_value<T: Serialize>(data: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(data).map_err(|e| CliError::Io(e.to_string()))
}

pub fn emit(command: &str, config_sha256: String, out: Output, format: Format, path: Option<&PathBuf>) -> Result<(), CliError> {
    let bytes = match format {
        Format::Csv => out.csv.ok_or_else(|| CliError::Unsupported(format!("command `{command}` has no CSV form")))?,
        Format::Json => {
            let env = Envelope { schema_version: SCHEMA_VERSION, command, config_sha256, inputs: out.inputs, data: out.json };
            let mut s = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
            s.push(b'\n');
            s
        }
    };
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
