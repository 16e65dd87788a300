use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{RunConfig, Stage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Record of one stage run: what went in, what came out, and the settings
/// needed to repeat it. Holds no timestamps so reruns compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: Stage,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub sample_seeds: Vec<u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

fn rel(root: &Path, p: &Path) -> String {
    p.strip_prefix(root)
        .unwrap_or(p)
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Hashes every file under the stage directory and writes
/// `<stage>/manifest.json`. `inputs` are external files; paths under the
/// output directory are recorded relative to it.
pub fn write_manifest(cfg: &RunConfig, root: &Path, stage: Stage, inputs: &[PathBuf]) -> Result<Manifest> {
    let dir = root.join(stage.as_str());
    let target = dir.join("manifest.json");
    let mut files = Vec::new();
    walk(&dir, &mut files)?;
    let outputs = files
        .iter()
        .filter(|p| **p != target)
        .map(|p| Ok(FileHash { path: rel(root, p), sha256: hash_file(p)? }))
        .collect::<Result<Vec<_>>>()?;
    let inputs = inputs
        .iter()
        .map(|p| {
            let path = if p.starts_with(root) { rel(root, p) } else { p.display().to_string() };
            Ok(FileHash { path, sha256: hash_file(p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Manifest {
        stage,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(cfg.fingerprint_json().as_bytes()),
        seed: cfg.seed,
        sample_seeds: cfg.sample_seeds(),
        inputs,
        outputs,
    };
    let text = serde_json::to_string_pretty(&m)?;
    std::fs::write(&target, text).map_err(|e| Error::io(&target, e))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
