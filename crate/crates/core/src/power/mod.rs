//! Power-system simulation model: the electrical topology of the
//! single-line diagram merged with per-device parameters.

mod topology;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use topology::{build_document_graph, build_topology_graph, Edge, Leaf, SwitchState, TopologyGraph};

use crate::scl::{SclDocument, SclKind};
use crate::validate::{self, DocumentKind, ValidationReport};
use crate::xml::{self, XmlError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PowerError {
    #[error("terminal of {equipment} references unknown connectivity node {node:?}")]
    DanglingTerminal { equipment: String, node: String },
    #[error("parameters name equipment {0:?}, which is not in the substation model")]
    UnknownEquipmentPath(String),
    #[error("equipment name {0:?} is ambiguous; use the full path")]
    AmbiguousEquipmentPath(String),
    #[error("parameters for {0} are given more than once")]
    DuplicateEquipment(String),
    #[error("parameter file failed validation with {} error(s)", .0.errors.len())]
    ValidationFailed(ValidationReport),
    #[error("expected an SSD or SCD document, got {0}")]
    KindMismatch(SclKind),
    #[error(transparent)]
    MalformedXml(#[from] XmlError),
    #[error("model file: {0}")]
    ModelFile(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamValue {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterEntry {
    pub equipment_path: String,
    pub parameters: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterSpec {
    pub entries: Vec<ParameterEntry>,
}

impl ParameterSpec {
    /// Render back to the `Parameters` XML format.
    pub fn to_xml(&self) -> String {
        let mut root = xml::Element::new("Parameters");
        for e in &self.entries {
            let mut eq = xml::Element::new("Equipment").with_attr("path", &e.equipment_path);
            for (name, p) in &e.parameters {
                eq.children.push(
                    xml::Element::new("Param")
                        .with_attr("name", name)
                        .with_attr("unit", &p.unit)
                        .with_attr("value", p.value.to_string()),
                );
            }
            root.children.push(eq);
        }
        format!("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n{}", root.to_xml_string())
    }
}

/// Parse and validate a parameter file.
pub fn parse_parameters(bytes: &[u8]) -> Result<ParameterSpec, PowerError> {
    let doc = xml::parse(bytes)?;
    let report = validate::validate_element(DocumentKind::ParameterSpec, &doc.root);
    if !report.valid() {
        return Err(PowerError::ValidationFailed(report));
    }
    let entries = doc
        .root
        .children_named("Equipment")
        .map(|eq| ParameterEntry {
            equipment_path: eq.attr("path").unwrap_or("").to_string(),
            parameters: eq
                .children_named("Param")
                .map(|p| {
                    let value = p.attr("value").and_then(|v| v.trim().parse().ok()).unwrap_or(0.0);
                    (
                        p.attr("name").unwrap_or("").to_string(),
                        ParamValue {
                            value,
                            unit: p.attr("unit").unwrap_or("").to_string(),
                        },
                    )
                })
                .collect(),
        })
        .collect();
    Ok(ParameterSpec { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceRole {
    Source,
    Load,
    Switch,
    Transformer,
    Other,
}

impl DeviceRole {
    pub fn of(ce_type: &str) -> DeviceRole {
        match ce_type {
            "GEN" | "IFL" => DeviceRole::Source,
            "LOAD" | "MOT" => DeviceRole::Load,
            "CBR" | "DIS" => DeviceRole::Switch,
            "PTR" => DeviceRole::Transformer,
            _ => DeviceRole::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Device {
    pub equipment_path: String,
    pub ce_type: String,
    pub role: DeviceRole,
    pub terminals: Vec<String>,
    pub parameters: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VoltageLevelInfo {
    /// `Substation/VoltageLevel`.
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nominal_volts: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerSystemModel {
    pub graph: TopologyGraph,
    pub devices: Vec<Device>,
    pub voltage_levels: Vec<VoltageLevelInfo>,
}

impl PowerSystemModel {
    /// Equipment that received no parameters and runs on simulator defaults.
    pub fn defaulted_devices(&self) -> Vec<&str> {
        self.devices
            .iter()
            .filter(|d| d.parameters.is_empty())
            .map(|d| d.equipment_path.as_str())
            .collect()
    }

    pub fn device(&self, equipment_path: &str) -> Option<&Device> {
        self.devices.iter().find(|d| d.equipment_path == equipment_path)
    }

    pub fn sources(&self) -> impl Iterator<Item = &Device> {
        self.devices.iter().filter(|d| d.role == DeviceRole::Source)
    }

    pub fn loads(&self) -> impl Iterator<Item = &Device> {
        self.devices.iter().filter(|d| d.role == DeviceRole::Load)
    }
}

/// Merge a substation document with its parameter file.
///
/// Entry order does not matter. A switch takes its state from a `closed`
/// parameter (0 or 1) and is closed otherwise.
pub fn merge_parameters(ssd: &SclDocument, params: &ParameterSpec) -> Result<PowerSystemModel, PowerError> {
    if !matches!(ssd.kind, SclKind::Ssd | SclKind::Scd) {
        return Err(PowerError::KindMismatch(ssd.kind));
    }
    let mut graph = build_document_graph(ssd)?;
    let placed: Vec<_> = ssd.substations.iter().flat_map(topology::placed_equipment).collect();

    let mut by_name: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, p) in placed.iter().enumerate() {
        let name = p.path.rsplit('/').next().unwrap_or("");
        by_name.entry(name).or_default().push(i);
    }
    let mut assigned: Vec<Option<&ParameterEntry>> = vec![None; placed.len()];
    for entry in &params.entries {
        let idx = if entry.equipment_path.contains('/') {
            placed
                .iter()
                .position(|p| p.path == entry.equipment_path)
                .ok_or_else(|| PowerError::UnknownEquipmentPath(entry.equipment_path.clone()))?
        } else {
            match by_name.get(entry.equipment_path.as_str()).map(Vec::as_slice) {
                Some([i]) => *i,
                Some(_) => return Err(PowerError::AmbiguousEquipmentPath(entry.equipment_path.clone())),
                None => return Err(PowerError::UnknownEquipmentPath(entry.equipment_path.clone())),
            }
        };
        if assigned[idx].replace(entry).is_some() {
            return Err(PowerError::DuplicateEquipment(placed[idx].path.clone()));
        }
    }

    let mut devices = Vec::with_capacity(placed.len());
    for (p, entry) in placed.into_iter().zip(assigned) {
        let parameters = entry.map(|e| e.parameters.clone()).unwrap_or_default();
        if let Some(closed) = parameters.get("closed") {
            let state = if closed.value == 0.0 {
                SwitchState::Open
            } else {
                SwitchState::Closed
            };
            graph.set_switch(&p.path, state);
        }
        devices.push(Device {
            role: DeviceRole::of(&p.ce_type),
            equipment_path: p.path,
            ce_type: p.ce_type,
            terminals: p.nodes,
            parameters,
        });
    }

    let voltage_levels = ssd
        .substations
        .iter()
        .flat_map(|s| {
            s.voltage_levels.iter().map(move |v| VoltageLevelInfo {
                path: format!("{}/{}", s.name, v.name),
                nominal_volts: v.voltage.as_ref().map(|x| x.volts),
            })
        })
        .collect();
    Ok(PowerSystemModel {
        graph,
        devices,
        voltage_levels,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ModelFile {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    devices: Vec<Device>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    voltage_levels: Vec<VoltageLevelInfo>,
}

/// Deterministic compact JSON with keys `vertices`, `edges`, `devices` and
/// (when non-empty) `voltageLevels`.
pub fn emit_model(model: &PowerSystemModel) -> Vec<u8> {
    let file = ModelFile {
        vertices: model.graph.vertices.clone(),
        edges: model.graph.edges.clone(),
        devices: model.devices.clone(),
        voltage_levels: model.voltage_levels.clone(),
    };
    serde_json::to_vec(&file).expect("model serializes")
}

/// Inverse of [`emit_model`]. Leaves are rebuilt from single-terminal
/// devices.
pub fn load_model(bytes: &[u8]) -> Result<PowerSystemModel, PowerError> {
    let file: ModelFile = serde_json::from_slice(bytes).map_err(|e| PowerError::ModelFile(e.to_string()))?;
    let leaves = file
        .devices
        .iter()
        .filter(|d| d.terminals.len() == 1)
        .map(|d| Leaf {
            equipment_path: d.equipment_path.clone(),
            ce_type: d.ce_type.clone(),
            vertex: d.terminals[0].clone(),
        })
        .collect();
    Ok(PowerSystemModel {
        graph: TopologyGraph {
            vertices: file.vertices,
            edges: file.edges,
            leaves,
        },
        devices: file.devices,
        voltage_levels: file.voltage_levels,
    })
}
