//! Run manifests: every file-producing invocation records its command, flag
//! values, seed, input digests and output digests so a run can be audited and
//! replayed.

use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

impl RunManifest {
    pub fn new(command: &str, args: serde_json::Value, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            args,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
        }
    }

    /// Digest an input file that already exists on disk.
    pub fn record_input(&mut self, path: &Path) -> io::Result<()> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Write an output file and record its digest.
    pub fn write_output(&mut self, path: &Path, content: &str) -> io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, content)?;
        self.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    /// Stamp the end time and write `manifest.json` into `out_dir`.
    pub fn finalize(mut self, out_dir: &Path) -> io::Result<PathBuf> {
        self.finished_unix_ms = now_ms();
        std::fs::create_dir_all(out_dir)?;
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self).expect("serializable manifest");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
