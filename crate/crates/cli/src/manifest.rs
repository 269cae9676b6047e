use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest(path: &Path, shown_as: String) -> Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest { path: shown_as, sha256: hex::encode(Sha256::digest(&bytes)) })
}

/// Everything needed to replay a run: the resolved configuration, the
/// inputs it read and the files it wrote. Deliberately free of timestamps
/// and absolute output paths so identical runs give identical manifests.
#[derive(Serialize)]
pub struct Manifest<C: Serialize> {
    pub experiment: String,
    pub tool_version: &'static str,
    pub config: C,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Files written by an experiment, relative to its output directory.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.record(name);
        Ok(())
    }

    /// Notes a file written by other means.
    pub fn record(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn finish<C: Serialize>(mut self, experiment: &str, config: C, inputs: Vec<FileDigest>) -> Result<()> {
        self.files.sort();
        let outputs = self
            .files
            .iter()
            .map(|f| digest(&self.dir.join(f), f.clone()))
            .collect::<Result<Vec<_>>>()?;
        let manifest = Manifest { experiment: experiment.to_string(), tool_version: env!("CARGO_PKG_VERSION"), config, inputs, outputs };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}
