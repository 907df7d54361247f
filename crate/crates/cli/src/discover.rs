use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use sgml_core::scl::{classify_kind, SclKind};
use sgml_core::validate::DocumentKind;
use sgml_core::xml::{self, Element};

/// What an input file holds, decided from its content.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Scl(SclKind),
    Proprietary(DocumentKind),
    PlcOpen,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputKind::Scl(k) => write!(f, "{k}"),
            InputKind::Proprietary(k) => write!(f, "{k}"),
            InputKind::PlcOpen => f.write_str("plcopen"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InputFile {
    pub path: PathBuf,
    /// File name relative to the input directory.
    pub name: String,
    pub kind: InputKind,
    pub bytes: Vec<u8>,
}

fn is_plcopen(root: &Element) -> bool {
    root.local_name() == "project"
        && (root.attrs.iter().any(|(k, v)| k.starts_with("xmlns") && v.contains("plcopen.org"))
            || root.child("types").is_some()
            || root.child("fileHeader").is_some())
}

/// Decide the kind of one file from its root element. `Ok(None)` means a
/// well-formed XML file of no known kind.
pub fn classify_bytes(bytes: &[u8]) -> anyhow::Result<Option<InputKind>> {
    let doc = xml::parse(bytes)?;
    let root = &doc.root;
    if root.local_name() == "SCL" {
        return Ok(Some(InputKind::Scl(classify_kind(bytes)?)));
    }
    if is_plcopen(root) {
        return Ok(Some(InputKind::PlcOpen));
    }
    Ok(DocumentKind::from_root_element(&root.name).map(InputKind::Proprietary))
}

pub fn read_input(path: &Path) -> anyhow::Result<(Option<InputKind>, Vec<u8>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let kind = classify_bytes(&bytes).with_context(|| path.display().to_string())?;
    Ok((kind, bytes))
}

#[derive(Debug, Default)]
pub struct Discovered {
    pub files: Vec<InputFile>,
    /// Files skipped because they are not XML of a known kind.
    pub ignored: Vec<String>,
}

impl Discovered {
    pub fn of_kind(&self, kind: InputKind) -> impl Iterator<Item = &InputFile> {
        self.files.iter().filter(move |f| f.kind == kind)
    }

    pub fn scl(&self, kind: SclKind) -> impl Iterator<Item = &InputFile> {
        self.of_kind(InputKind::Scl(kind))
    }

    pub fn proprietary(&self, kind: DocumentKind) -> impl Iterator<Item = &InputFile> {
        self.of_kind(InputKind::Proprietary(kind))
    }
}

/// Classify every regular file directly inside `dir`, in name order.
/// Files that do not look like XML are ignored; malformed XML is an error.
pub fn discover(dir: &Path) -> anyhow::Result<Discovered> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    let mut found = Discovered::default();
    for name in names {
        let path = dir.join(&name);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        if !looks_like_xml(&bytes) {
            found.ignored.push(name);
            continue;
        }
        match classify_bytes(&bytes).with_context(|| name.clone())? {
            Some(kind) => found.files.push(InputFile { path, name, kind, bytes }),
            None => found.ignored.push(name),
        }
    }
    Ok(found)
}

fn looks_like_xml(bytes: &[u8]) -> bool {
    let text = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    text.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'<')
}
