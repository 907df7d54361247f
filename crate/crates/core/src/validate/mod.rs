//! Rule-based validation of the SG-ML proprietary XML files.
//!
//! Each document kind has a fixed, ordered rule list. Structural and
//! reference failures are errors; unknown extra elements and out-of-range
//! advisory values are warnings.

mod mapping;
mod parameters;
mod scada;
mod thresholds;

pub use parameters::{is_equipment_path, KNOWN_UNITS};
pub use scada::{is_host, PERIOD_TYPES, POINT_ATTRS, SOURCE_ATTRS};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::xml::{self, Element, XmlError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DocumentKind {
    ParameterSpec,
    Mapping,
    Thresholds,
    ScadaProject,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 4] = [
        DocumentKind::ParameterSpec,
        DocumentKind::Mapping,
        DocumentKind::Thresholds,
        DocumentKind::ScadaProject,
    ];

    /// The root element name each kind is written with.
    pub fn root_element(self) -> &'static str {
        match self {
            DocumentKind::ParameterSpec => "Parameters",
            DocumentKind::Mapping => "Mapping",
            DocumentKind::Thresholds => "Settings",
            DocumentKind::ScadaProject => "project",
        }
    }

    pub fn from_root_element(name: &str) -> Option<DocumentKind> {
        DocumentKind::ALL
            .into_iter()
            .find(|k| k.root_element() == xml::local(name))
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocumentKind::ParameterSpec => "parameters",
            DocumentKind::Mapping => "mapping",
            DocumentKind::Thresholds => "thresholds",
            DocumentKind::ScadaProject => "scada",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown document kind {0:?} (expected parameters, mapping, thresholds or scada)")]
pub struct UnknownKind(String);

impl FromStr for DocumentKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "parameters" | "parameterspec" => Ok(DocumentKind::ParameterSpec),
            "mapping" => Ok(DocumentKind::Mapping),
            "thresholds" | "settings" => Ok(DocumentKind::Thresholds),
            "scada" | "scadaproject" => Ok(DocumentKind::ScadaProject),
            _ => Err(UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationRule {
    pub rule_id: &'static str,
    pub document_kind: DocumentKind,
    pub severity: Severity,
    pub description: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Finding {
    pub rule_id: String,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error(&mut self, rule_id: &str, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Finding {
            rule_id: rule_id.to_string(),
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn warning(&mut self, rule_id: &str, path: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Finding {
            rule_id: rule_id.to_string(),
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const fn rule(
    rule_id: &'static str,
    document_kind: DocumentKind,
    severity: Severity,
    description: &'static str,
) -> ValidationRule {
    ValidationRule {
        rule_id,
        document_kind,
        severity,
        description,
    }
}

use DocumentKind::*;
use Severity::{Error as E, Warning as W};

static RULES: &[ValidationRule] = &[
    rule("param-root", ParameterSpec, E, "root element is Parameters"),
    rule("param-attrs", ParameterSpec, E, "Equipment has path; Param has name, unit and value"),
    rule("param-equipment-path", ParameterSpec, E, "equipment path is a bare name, Substation/Transformer or Substation/VoltageLevel/Bay/Equipment"),
    rule("param-path-unique", ParameterSpec, E, "each equipment path appears once"),
    rule("param-name-unique", ParameterSpec, E, "parameter names are unique within an Equipment"),
    rule("param-value-finite", ParameterSpec, E, "parameter values are finite numbers"),
    rule("param-unit-known", ParameterSpec, E, "parameter units come from the unit table"),
    rule("param-unknown-element", ParameterSpec, W, "elements outside the format are ignored"),
    rule("map-root", Mapping, E, "root element is Mapping"),
    rule("map-attrs", Mapping, E, "Entry has physicalAttr and cyberAttr"),
    rule("map-dotted-path", Mapping, E, "attributes are dotted paths of at least two non-empty segments"),
    rule("map-physical-unique", Mapping, E, "each physicalAttr is mapped once"),
    rule("map-cyber-unique", Mapping, E, "each cyberAttr is mapped once"),
    rule("map-unknown-element", Mapping, W, "elements outside the format are ignored"),
    rule("threshold-root", Thresholds, E, "root element is Settings with a non-empty iedName"),
    rule("threshold-base-positive", Thresholds, E, "nominalCurrent, nominalVoltage and nominalPower are positive numbers"),
    rule("threshold-base-required", Thresholds, E, "every function has the nominal base its measurement is normalized on"),
    rule("threshold-ptoc-type", Thresholds, E, "PTOC carries type 50 or 51"),
    rule("threshold-instance", Thresholds, E, "instance is a positive integer"),
    rule("threshold-instance-unique", Thresholds, E, "(function, instance) pairs are unique"),
    rule("threshold-monitored-ied", Thresholds, E, "monitored is a dotted path inside the configured IED"),
    rule("threshold-trip-target", Thresholds, E, "tripTarget, when present, is a dotted path"),
    rule("threshold-trip-present", Thresholds, E, "at most one alarm and one trip threshold; PTOV and PTUV require a trip threshold"),
    rule("threshold-value-positive", Thresholds, E, "threshold values, multipliers and epsilons are positive numbers given once"),
    rule("threshold-period-nonneg", Thresholds, E, "threshold periods are non-negative seconds"),
    rule("trip-beyond-alarm", Thresholds, E, "over-functions trip at or above the alarm level, under-functions at or below"),
    rule("threshold-multiplier-range", Thresholds, W, "instantaneous over-current multiplier lies in 3..=4"),
    rule("threshold-unknown-element", Thresholds, W, "elements outside the format are ignored"),
    rule("scada-root", ScadaProject, E, "root element is project with a dataSources child"),
    rule("scada-source-attrs", ScadaProject, E, "dataSource carries every connection attribute"),
    rule("scada-port-range", ScadaProject, E, "port is an integer in 1..=65535"),
    rule("scada-host", ScadaProject, E, "host is an IPv4 address or a hostname"),
    rule("scada-update-periods", ScadaProject, E, "updatePeriods is a positive integer"),
    rule("scada-period-type", ScadaProject, W, "updatePeriodType is MILLISECONDS, SECONDS, MINUTES or HOURS"),
    rule("scada-point-attrs", ScadaProject, E, "dataPoint carries every point attribute"),
    rule("scada-offset", ScadaProject, E, "offset is a non-negative integer"),
    rule("scada-point-source", ScadaProject, E, "dataSourceXid names a dataSource"),
    rule("scada-point-owner", ScadaProject, E, "points match the xid and name of the source they belong to"),
    rule("xid-unique", ScadaProject, E, "xid values are unique over sources and points"),
    rule("scada-unknown-element", ScadaProject, W, "elements outside the format are ignored"),
];

/// Rules registered for a kind, in evaluation order.
pub fn list_rules(kind: DocumentKind) -> Vec<ValidationRule> {
    RULES.iter().filter(|r| r.document_kind == kind).cloned().collect()
}

/// Apply every rule of `kind`. Only malformed XML is an error; rule
/// failures are report entries.
pub fn validate_proprietary(kind: DocumentKind, bytes: &[u8]) -> Result<ValidationReport, XmlError> {
    let doc = xml::parse(bytes)?;
    Ok(validate_element(kind, &doc.root))
}

pub fn validate_element(kind: DocumentKind, root: &Element) -> ValidationReport {
    let mut report = ValidationReport::default();
    let root_path = format!("/{}", root.name);
    if root.local_name() != kind.root_element() {
        let id = match kind {
            ParameterSpec => "param-root",
            Mapping => "map-root",
            Thresholds => "threshold-root",
            ScadaProject => "scada-root",
        };
        report.error(
            id,
            root_path,
            format!("root element is <{}>, expected <{}>", root.name, kind.root_element()),
        );
        return report;
    }
    match kind {
        ParameterSpec => parameters::check(root, &root_path, &mut report),
        Mapping => mapping::check(root, &root_path, &mut report),
        Thresholds => thresholds::check(root, &root_path, &mut report),
        ScadaProject => scada::check(root, &root_path, &mut report),
    }
    report
}

/// Children paired with their `/Parent/Child[n]` paths; `n` counts
/// same-named siblings from 1.
pub(crate) fn indexed_children<'a>(parent: &'a Element, parent_path: &str) -> Vec<(String, &'a Element)> {
    let mut counts: Vec<(&str, usize)> = Vec::new();
    parent
        .children
        .iter()
        .map(|c| {
            let n = match counts.iter_mut().find(|(name, _)| *name == c.name) {
                Some(slot) => {
                    slot.1 += 1;
                    slot.1
                }
                None => {
                    counts.push((&c.name, 1));
                    1
                }
            };
            (format!("{parent_path}/{}[{n}]", c.name), c)
        })
        .collect()
}

pub(crate) fn attr_path(el_path: &str, attr: &str) -> String {
    format!("{el_path}/@{attr}")
}

/// A dotted path of at least two non-empty segments.
pub fn is_dotted_path(s: &str) -> bool {
    let mut n = 0;
    for seg in s.split('.') {
        if seg.trim().is_empty() {
            return false;
        }
        n += 1;
    }
    n >= 2
}

pub(crate) fn finite(v: &str) -> Option<f64> {
    v.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}
