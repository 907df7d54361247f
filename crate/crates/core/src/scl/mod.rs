//! IEC 61850 SCL documents: model, parser, serializer, kind classification
//! and reference resolution.

mod classify;
mod invariants;
pub mod model;
mod parse;
mod refs;
mod write;

pub use classify::{classify_kind, classify_model, KindEvidence};
pub use invariants::{check_invariants, Violation};
pub use model::*;
pub use parse::{parse_scl, parse_scl_with, ParseOptions};
pub(crate) use parse::from_element;
pub use refs::{resolve_references, Link, LinkKind, ReferenceReport};
pub use write::{render, serialize_scl};

use crate::xml::XmlError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SclError {
    #[error(transparent)]
    MalformedXml(#[from] XmlError),
    #[error("{path}: missing attribute {attr:?}")]
    MissingAttribute { path: String, attr: String },
    #[error("{path}: missing element {element}")]
    MissingElement { path: String, element: String },
    #[error("{path}: {message}")]
    InvalidValue { path: String, message: String },
    #[error("duplicate name {name:?} in {scope}")]
    DuplicateName { scope: String, name: String },
    #[error("{path}: unresolved reference to {target:?}")]
    UnresolvedReference { path: String, target: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("unclassifiable document: {0}")]
    UnclassifiableDocument(String),
}
