//! Output directories with checksummed, atomically written files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub library_version: String,
    pub verb: String,
    pub config_hash: String,
    pub basis_dimension: Option<usize>,
    pub qubit_count: Option<u32>,
    /// Omitted in deterministic mode.
    pub wall_clock_seconds: Option<f64>,
    pub files: Vec<FileEntry>,
    pub metrics: BTreeMap<String, serde_json::Value>,
}

/// Collects files for one run and writes the manifest last.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn finish(mut self, mut manifest: RunManifest) -> io::Result<RunManifest> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        manifest.files = self.files;
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        write_atomic(&self.root.join(MANIFEST_NAME), text.as_bytes())?;
        Ok(manifest)
    }
}

/// Recomputes every checksum listed in a manifest; returns mismatches.
pub fn verify(root: &Path) -> io::Result<Vec<String>> {
    let text = fs::read_to_string(root.join(MANIFEST_NAME))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(io::Error::other)?;
    let mut bad = Vec::new();
    for f in &manifest.files {
        match fs::read(root.join(&f.path)) {
            Ok(b) if sha256_hex(&b) == f.sha256 => {}
            _ => bad.push(f.path.clone()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
