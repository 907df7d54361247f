use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

/// Output files held in memory until every stage has succeeded.
#[derive(Debug, Default)]
pub struct Staged {
    files: BTreeMap<String, Vec<u8>>,
}

#[derive(Debug, Serialize)]
struct ManifestEntry<'a> {
    path: &'a str,
    sha256: String,
    size: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    files: Vec<ManifestEntry<'a>>,
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("value serializes");
    v.push(b'\n');
    v
}

impl Staged {
    pub fn add(&mut self, path: impl Into<String>, bytes: impl Into<Vec<u8>>) -> anyhow::Result<()> {
        let path = path.into();
        if path.split('/').any(|seg| seg.is_empty() || seg == "." || seg == "..") {
            bail!("invalid output path {path:?}");
        }
        if self.files.insert(path.clone(), bytes.into()).is_some() {
            bail!("two artifacts would be written to {path}");
        }
        Ok(())
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    /// Sorted list of every staged file with its content hash.
    pub fn manifest(&self) -> Vec<u8> {
        let files = self
            .files
            .iter()
            .filter(|(p, _)| p.as_str() != MANIFEST)
            .map(|(path, bytes)| ManifestEntry {
                path,
                sha256: hex::encode(Sha256::digest(bytes)),
                size: bytes.len(),
            })
            .collect();
        to_json_bytes(&Manifest { files })
    }

    /// Write every file below `dir`, creating it as needed and overwriting
    /// files of the same name.
    pub fn write_into(&self, dir: &Path) -> io::Result<()> {
        for (path, bytes) in &self.files {
            let target = dir.join(path);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(target, bytes)?;
        }
        Ok(())
    }

    /// Replace `dir` with exactly the staged files. An existing directory is
    /// only replaced when it is empty or holds a previous run's manifest.
    pub fn commit(&self, dir: &Path) -> anyhow::Result<()> {
        if dir.exists() {
            let replaceable = dir.is_dir()
                && (dir.join(MANIFEST).is_file() || fs::read_dir(dir)?.next().is_none());
            if !replaceable {
                bail!(
                    "{} exists and is not a previous output directory; refusing to replace it",
                    dir.display()
                );
            }
        }
        let tmp = sibling(dir, "partial");
        if tmp.exists() {
            fs::remove_dir_all(&tmp).with_context(|| format!("removing {}", tmp.display()))?;
        }
        if let Err(e) = self.write_into(&tmp) {
            let _ = fs::remove_dir_all(&tmp);
            return Err(e).with_context(|| format!("writing {}", tmp.display()));
        }
        if dir.exists() {
            let old = sibling(dir, "old");
            fs::rename(dir, &old).with_context(|| format!("moving {} aside", dir.display()))?;
            if let Err(e) = fs::rename(&tmp, dir) {
                let _ = fs::rename(&old, dir);
                let _ = fs::remove_dir_all(&tmp);
                return Err(e).with_context(|| format!("replacing {}", dir.display()));
            }
            fs::remove_dir_all(&old).with_context(|| format!("removing {}", old.display()))?;
        } else {
            fs::rename(&tmp, dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(())
    }
}

fn sibling(dir: &Path, tag: &str) -> PathBuf {
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    dir.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}
