use std::collections::HashSet;

use serde::Serialize;

use crate::power::PowerSystemModel;
use crate::scl::{Ied, LogicalDevice, LogicalNode, SclDocument};
use crate::validate::{is_dotted_path, ValidationReport};
use crate::xml::{self, Element};

use super::IedError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MappingEntry {
    /// e.g. `Load0.Voltage.phsA`
    pub physical_attr: String,
    /// e.g. `IED1.MMXU.PhV.phsA.cVal`
    pub cyber_attr: String,
}

impl MappingEntry {
    pub fn new(physical: impl Into<String>, cyber: impl Into<String>) -> Self {
        MappingEntry {
            physical_attr: physical.into(),
            cyber_attr: cyber.into(),
        }
    }

    pub fn device(&self) -> &str {
        self.physical_attr.split('.').next().unwrap_or("")
    }

    pub fn ied(&self) -> &str {
        self.cyber_attr.split('.').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CyberPhysicalMapping {
    pub entries: Vec<MappingEntry>,
}

impl CyberPhysicalMapping {
    pub fn physical_for(&self, cyber_attr: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.cyber_attr == cyber_attr)
            .map(|e| e.physical_attr.as_str())
    }

    /// Entries whose cyber side lives in `ied`.
    pub fn owned_by<'a>(&'a self, ied: &'a str) -> impl Iterator<Item = &'a MappingEntry> + 'a {
        self.entries.iter().filter(move |e| e.ied() == ied)
    }

    pub fn to_xml(&self) -> String {
        let mut root = Element::new("Mapping");
        for e in &self.entries {
            root.children.push(
                Element::new("Entry")
                    .with_attr("physicalAttr", &e.physical_attr)
                    .with_attr("cyberAttr", &e.cyber_attr),
            );
        }
        format!("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n{}", root.to_xml_string())
    }
}

/// Entries in file order.
pub fn parse_mapping(bytes: &[u8]) -> Result<CyberPhysicalMapping, IedError> {
    let doc = xml::parse(bytes)?;
    if doc.root.local_name() != "Mapping" {
        return Err(IedError::InvalidMapping(format!("root element is <{}>", doc.root.name)));
    }
    let mut physical = HashSet::new();
    let mut cyber = HashSet::new();
    let mut entries = Vec::new();
    for (i, el) in doc.root.children_named("Entry").enumerate() {
        let get = |attr: &str| {
            el.attr(attr)
                .filter(|v| is_dotted_path(v))
                .map(str::to_string)
                .ok_or_else(|| IedError::InvalidMapping(format!("entry {} has no dotted {attr}", i + 1)))
        };
        let entry = MappingEntry::new(get("physicalAttr")?, get("cyberAttr")?);
        if !physical.insert(entry.physical_attr.clone()) {
            return Err(IedError::DuplicateAttr(entry.physical_attr));
        }
        if !cyber.insert(entry.cyber_attr.clone()) {
            return Err(IedError::DuplicateAttr(entry.cyber_attr));
        }
        entries.push(entry);
    }
    Ok(CyberPhysicalMapping { entries })
}

/// Where a cyber attribute path lands in an IED data model.
#[derive(Debug, Clone, Copy)]
pub struct CyberTarget<'a> {
    pub ied: &'a Ied,
    pub ld: &'a LogicalDevice,
    pub ln: &'a LogicalNode,
    pub do_name: &'a str,
}

fn find_ln<'a>(ied: &'a Ied, seg: &str) -> Option<(&'a LogicalDevice, &'a LogicalNode)> {
    let all = || ied.logical_devices().flat_map(|ld| ld.logical_nodes.iter().map(move |ln| (ld, ln)));
    all()
        .find(|(_, ln)| ln.full_name() == seg)
        .or_else(|| all().find(|(_, ln)| ln.prefix.is_empty() && ln.ln_class == seg))
}

fn has_do(doc: &SclDocument, ln: &LogicalNode, name: &str) -> bool {
    ln.data_object(name).is_some()
        || doc
            .data_type_templates
            .as_ref()
            .and_then(|t| t.lnode_type(&ln.ln_type))
            .is_some_and(|t| t.do_names.iter().any(|d| d == name))
}

/// Resolve `IED[.LD].LN.DO[.DA...]`. The LN segment is a full name
/// (`MMXU1`) or, for unprefixed nodes, the bare class (`MMXU`).
pub fn resolve_cyber_attr<'a>(doc: &'a SclDocument, path: &'a str) -> Result<CyberTarget<'a>, String> {
    let segs: Vec<&str> = path.split('.').collect();
    let ied = doc
        .ied(segs[0])
        .ok_or_else(|| format!("no IED {:?}", segs[0]))?;
    let rest = &segs[1..];
    let by_ld = rest.first().and_then(|s| ied.logical_device(s)).and_then(|ld| {
        let seg = rest.get(1)?;
        let ln = ld
            .logical_nodes
            .iter()
            .find(|ln| ln.full_name() == *seg)
            .or_else(|| ld.logical_nodes.iter().find(|ln| ln.prefix.is_empty() && ln.ln_class == *seg))?;
        Some((ld, ln, &rest[2..]))
    });
    let (ld, ln, after) = match by_ld {
        Some(found) => found,
        None => {
            let seg = rest.first().ok_or_else(|| format!("{path:?} names no logical node"))?;
            let (ld, ln) = find_ln(ied, seg).ok_or_else(|| format!("IED {} has no logical node {seg:?}", ied.name))?;
            (ld, ln, &rest[1..])
        }
    };
    let do_name = after
        .first()
        .ok_or_else(|| format!("{path:?} names no data object"))?;
    if !has_do(doc, ln, do_name) {
        return Err(format!(
            "logical node {} of IED {} has no data object {do_name:?}",
            ln.full_name(),
            ied.name
        ));
    }
    Ok(CyberTarget { ied, ld, ln, do_name })
}

fn physical_device_exists(model: &PowerSystemModel, name: &str) -> bool {
    let last = |p: &str| p.rsplit('/').next().map(str::to_string);
    model
        .devices
        .iter()
        .any(|d| d.equipment_path == name || last(&d.equipment_path).as_deref() == Some(name))
        || model
            .graph
            .vertices
            .iter()
            .any(|v| v == name || last(v).as_deref() == Some(name))
}

/// Check both sides of every entry: the device named by the physical side
/// exists in the power model and the cyber side resolves to a data object.
/// At most one error per side of an entry.
pub fn validate_mapping(map: &CyberPhysicalMapping, icd: &SclDocument, model: &PowerSystemModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, e) in map.entries.iter().enumerate() {
        let path = format!("/Mapping/Entry[{}]", i + 1);
        if !physical_device_exists(model, e.device()) {
            report.error(
                "mapping-physical-device",
                format!("{path}/@physicalAttr"),
                format!("no device {:?} in the power model", e.device()),
            );
        }
        if let Err(msg) = resolve_cyber_attr(icd, &e.cyber_attr) {
            report.error("mapping-cyber-target", format!("{path}/@cyberAttr"), msg);
        }
    }
    report
}
