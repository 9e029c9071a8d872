//! Artifact writing with a provenance manifest. Every file goes to a
//! temporary name first and is renamed into place, so interrupted runs
//! leave no partial artifacts; the manifest is written last and records a
//! sha256 per artifact.

use std::fs;
use std::path::PathBuf;

use grbm::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub struct ArtifactWriter {
    dir: PathBuf,
    entries: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, Serialize)]
struct ArtifactEntry {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_digest: &'a str,
    seed: u64,
    tool_version: &'a str,
    artifacts: &'a [ArtifactEntry],
}

impl ArtifactWriter {
    pub fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir)
            .map_err(|e| Error::Config(format!("cannot create output dir {dir:?}: {e}")))?;
        Ok(Self {
            dir,
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &PathBuf {
        &self.dir
    }

    /// Writes one artifact atomically and records its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        self.write_raw(name, bytes)?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        self.entries.push(ArtifactEntry {
            name: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    /// Writes the manifest and consumes the writer.
    pub fn finish(mut self, config_digest: &str, seed: u64) -> Result<()> {
        self.entries.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = Manifest {
            config_digest,
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            artifacts: &self.entries,
        };
        let body = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        self.write_raw("manifest.json", body.as_bytes())
    }

    fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.dir.join(format!(".tmp.{name}"));
        let target = self.dir.join(name);
        fs::write(&tmp, bytes)
            .map_err(|e| Error::Config(format!("cannot write {tmp:?}: {e}")))?;
        fs::rename(&tmp, &target)
            .map_err(|e| Error::Config(format!("cannot rename into {target:?}: {e}")))
    }
}
