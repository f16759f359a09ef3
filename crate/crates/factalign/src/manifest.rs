//! Run manifests: what went in, what came out, under which configuration.
//!
//! Manifests carry no timestamps or machine-specific data, so identical runs
//! produce identical manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    /// Input file name to SHA-256 digest.
    pub inputs: BTreeMap<String, String>,
    /// Output file name (relative to the output directory) to digest.
    pub outputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub versions: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([("factalign".to_string(), env!("CARGO_PKG_VERSION").to_string())])
}

impl Manifest {
    pub fn new(command: &str, config_hash: String, seed: Option<u64>) -> Self {
        Manifest {
            command: command.into(),
            config_hash,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            seed,
            versions: versions(),
        }
    }

    /// Records an input under its file name.
    pub fn input(&mut self, path: &Path) -> io::Result<()> {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.inputs.insert(name, file_digest(path)?);
        Ok(())
    }

    pub fn output(&mut self, dir: &Path, name: &str) -> io::Result<()> {
        self.outputs.insert(name.into(), file_digest(&dir.join(name))?);
        Ok(())
    }
}
