//! Run manifests: every command that writes outputs also writes
//! `<out>.manifest.json` recording the fully resolved configuration, the
//! seed, and digests of every input file. Re-running a command whose
//! manifest matches reproduces its outputs byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

pub fn digest_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(format!("fnv1a64:{:016x}", fnv1a64(&bytes)))
}

#[derive(Debug, Default)]
pub struct Manifest {
    command: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    resolved: BTreeMap<String, Value>,
    seed: Option<u64>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            ..Manifest::default()
        }
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.resolved.insert(key.to_string(), value.into());
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    /// Write `<primary output>.manifest.json`. Call after the outputs exist
    /// so their digests can be recorded too.
    pub fn write(&self) -> Result<(), CliError> {
        let primary = match self.outputs.first() {
            Some(p) => p.clone(),
            None => return Ok(()),
        };
        let mut inputs = serde_json::Map::new();
        for path in &self.inputs {
            inputs.insert(
                path.display().to_string(),
                Value::String(digest_file(path)?),
            );
        }
        let mut outputs = serde_json::Map::new();
        for path in &self.outputs {
            outputs.insert(
                path.display().to_string(),
                Value::String(digest_file(path)?),
            );
        }
        let doc = json!({
            "command": self.command,
            "tool": format!("offlang {}", env!("CARGO_PKG_VERSION")),
            "seed": self.seed,
            "inputs": inputs,
            "outputs": outputs,
            "resolved": self.resolved,
        });
        let mut body = doc.to_string();
        body.push('\n');
        let path = manifest_path(&primary);
        fs::write(&path, body).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
