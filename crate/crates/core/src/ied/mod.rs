//! Virtual IEDs: cyber-physical mapping, protection settings, the
//! protection engine and configuration bundles.

mod config;
mod mapping;
mod protection;
mod settings;

pub use config::{
    generate_ied_config, BundleFiles, ControlBlocks, GooseAddress, GooseControlEntry, ReportControlEntry,
    VirtualIedConfig,
};
pub use mapping::{parse_mapping, resolve_cyber_attr, validate_mapping, CyberPhysicalMapping, CyberTarget, MappingEntry};
pub use protection::{evaluate_protection, events_to_jsonl, EventKind, Measurement, ProtectionEvent};
pub use settings::{
    parse_settings, parse_settings_with, ProtectionClass, ProtectionDefaults, ProtectionFunction, ProtectionSettings,
    ThresholdPair,
};

use crate::validate::ValidationReport;
use crate::xml::XmlError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IedError {
    #[error(transparent)]
    MalformedXml(#[from] XmlError),
    #[error("attribute {0:?} is mapped more than once")]
    DuplicateAttr(String),
    #[error("mapping file: {0}")]
    InvalidMapping(String),
    #[error("{function} needs {base} on the Settings element")]
    MissingBase { function: String, base: String },
    #[error("settings file failed validation with {} error(s)", .0.errors.len())]
    ValidationFailed(ValidationReport),
    #[error("no mapping entry feeds monitored attribute {0:?}")]
    UnmappedAttribute(String),
    #[error("measurement stream: {0}")]
    InvalidMeasurement(String),
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
}
