//! In-memory model of SCL documents.
//!
//! The typed part covers the substation single-line diagram, the IED data
//! model down to data objects, datasets and control blocks, and the
//! communication section. Everything else in a file lands in an [`Extra`]
//! bucket on the nearest typed ancestor and is written back unchanged.

use std::fmt;

use serde::Serialize;

use crate::xml::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SclKind {
    Ssd,
    Icd,
    Scd,
    Sed,
    Cid,
}

impl SclKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SclKind::Ssd => "SSD",
            SclKind::Icd => "ICD",
            SclKind::Scd => "SCD",
            SclKind::Sed => "SED",
            SclKind::Cid => "CID",
        }
    }

    /// Conventional file extension, without the dot.
    pub fn extension(self) -> &'static str {
        match self {
            SclKind::Ssd => "ssd",
            SclKind::Icd => "icd",
            SclKind::Scd => "scd",
            SclKind::Sed => "sed",
            SclKind::Cid => "cid",
        }
    }
}

impl fmt::Display for SclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Attributes and child elements the typed model does not interpret.
#[derive(Debug, Clone, Default)]
pub struct Extra {
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
}

impl Extra {
    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty() && self.children.is_empty()
    }
}

impl PartialEq for Extra {
    fn eq(&self, other: &Self) -> bool {
        let mut a: Vec<_> = self.attrs.iter().collect();
        let mut b: Vec<_> = other.attrs.iter().collect();
        a.sort();
        b.sort();
        a == b && self.children == other.children
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SclDocument {
    pub kind: SclKind,
    /// Attributes of the `SCL` root (namespaces, version, revision).
    pub root_attrs: Vec<(String, String)>,
    pub header: Header,
    pub substations: Vec<Substation>,
    pub communication: Option<Communication>,
    pub ieds: Vec<Ied>,
    pub data_type_templates: Option<DataTypeTemplates>,
    pub extra: Vec<Element>,
}

impl SclDocument {
    pub fn new(kind: SclKind, header: Header) -> Self {
        SclDocument {
            kind,
            root_attrs: vec![
                ("xmlns".into(), "http://www.iec.ch/61850/2003/SCL".into()),
                ("version".into(), "2007".into()),
                ("revision".into(), "B".into()),
            ],
            header,
            substations: Vec::new(),
            communication: None,
            ieds: Vec::new(),
            data_type_templates: None,
            extra: Vec::new(),
        }
    }

    pub fn ied(&self, name: &str) -> Option<&Ied> {
        self.ieds.iter().find(|i| i.name == name)
    }

    pub fn substation(&self, name: &str) -> Option<&Substation> {
        self.substations.iter().find(|s| s.name == name)
    }

    pub fn sub_networks(&self) -> &[SubNetwork] {
        self.communication
            .as_ref()
            .map(|c| c.sub_networks.as_slice())
            .unwrap_or(&[])
    }

    /// Every connectivity node path declared in the document.
    pub fn connectivity_node_paths(&self) -> impl Iterator<Item = &str> {
        self.substations
            .iter()
            .flat_map(|s| s.voltage_levels.iter())
            .flat_map(|v| v.bays.iter())
            .flat_map(|b| b.connectivity_nodes.iter())
            .map(|n| n.path_name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Header {
    pub id: String,
    pub version: String,
    pub revision: String,
    pub extra: Extra,
}

impl Header {
    pub fn new(id: impl Into<String>) -> Self {
        Header {
            id: id.into(),
            version: "1".into(),
            revision: String::new(),
            extra: Extra::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Substation {
    pub name: String,
    pub lnodes: Vec<LNodeRef>,
    pub power_transformers: Vec<PowerTransformer>,
    pub voltage_levels: Vec<VoltageLevel>,
    pub extra: Extra,
}

impl Substation {
    pub fn new(name: impl Into<String>) -> Self {
        Substation {
            name: name.into(),
            ..Substation::default()
        }
    }

    pub fn voltage_level(&self, name: &str) -> Option<&VoltageLevel> {
        self.voltage_levels.iter().find(|v| v.name == name)
    }

    /// Every LNode reference anywhere below this substation.
    pub fn all_lnodes(&self) -> Vec<&LNodeRef> {
        let mut out: Vec<&LNodeRef> = self.lnodes.iter().collect();
        for t in &self.power_transformers {
            out.extend(t.lnodes.iter());
            for w in &t.windings {
                out.extend(w.lnodes.iter());
            }
        }
        for vl in &self.voltage_levels {
            out.extend(vl.lnodes.iter());
            for bay in &vl.bays {
                out.extend(bay.lnodes.iter());
                for ce in &bay.conducting_equipment {
                    out.extend(ce.lnodes.iter());
                }
            }
        }
        out
    }
}

/// Nominal voltage, normalized to volts. `multiplier` is the SI prefix the
/// value was written with and is reused on output.
#[derive(Debug, Clone)]
pub struct Voltage {
    pub volts: f64,
    pub multiplier: String,
}

impl Voltage {
    pub fn kilovolts(kv: f64) -> Self {
        Voltage {
            volts: kv * 1e3,
            multiplier: "k".into(),
        }
    }
}

impl PartialEq for Voltage {
    fn eq(&self, other: &Self) -> bool {
        let scale = self.volts.abs().max(other.volts.abs()).max(1.0);
        self.multiplier == other.multiplier && (self.volts - other.volts).abs() <= scale * 1e-12
    }
}

/// Factor for an SI multiplier token as used by SCL `Voltage` elements.
pub fn multiplier_factor(token: &str) -> Option<f64> {
    Some(match token {
        "" => 1.0,
        "m" => 1e-3,
        "k" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VoltageLevel {
    pub name: String,
    pub voltage: Option<Voltage>,
    pub nom_freq: Option<f64>,
    pub num_phases: Option<u32>,
    pub lnodes: Vec<LNodeRef>,
    pub bays: Vec<Bay>,
    pub extra: Extra,
}

impl VoltageLevel {
    pub fn new(name: impl Into<String>) -> Self {
        VoltageLevel {
            name: name.into(),
            ..VoltageLevel::default()
        }
    }

    pub fn bay(&self, name: &str) -> Option<&Bay> {
        self.bays.iter().find(|b| b.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bay {
    pub name: String,
    pub lnodes: Vec<LNodeRef>,
    pub conducting_equipment: Vec<ConductingEquipment>,
    pub connectivity_nodes: Vec<ConnectivityNode>,
    pub extra: Extra,
}

impl Bay {
    pub fn new(name: impl Into<String>) -> Self {
        Bay {
            name: name.into(),
            ..Bay::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConductingEquipment {
    pub name: String,
    /// Equipment type token: CBR, DIS, CTR, VTR, IFL, GEN, LOAD, ...
    pub ce_type: String,
    pub terminals: Vec<Terminal>,
    pub lnodes: Vec<LNodeRef>,
    pub extra: Extra,
}

impl ConductingEquipment {
    pub fn new(name: impl Into<String>, ce_type: impl Into<String>) -> Self {
        ConductingEquipment {
            name: name.into(),
            ce_type: ce_type.into(),
            ..ConductingEquipment::default()
        }
    }

    pub fn is_switch(&self) -> bool {
        matches!(self.ce_type.as_str(), "CBR" | "DIS")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerTransformer {
    pub name: String,
    pub windings: Vec<TransformerWinding>,
    pub lnodes: Vec<LNodeRef>,
    pub extra: Extra,
}

impl PowerTransformer {
    pub fn terminals(&self) -> impl Iterator<Item = &Terminal> {
        self.windings.iter().flat_map(|w| w.terminals.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformerWinding {
    pub name: String,
    pub terminals: Vec<Terminal>,
    pub lnodes: Vec<LNodeRef>,
    pub extra: Extra,
}

/// Attachment of an equipment terminal to a connectivity node given by its
/// `Substation/VoltageLevel/Bay/Node` path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Terminal {
    pub name: String,
    pub connectivity_node: String,
    pub extra: Extra,
}

impl Terminal {
    pub fn new(name: impl Into<String>, connectivity_node: impl Into<String>) -> Self {
        Terminal {
            name: name.into(),
            connectivity_node: connectivity_node.into(),
            extra: Extra::default(),
        }
    }

    /// The four path segments, if the path has exactly that shape.
    pub fn path_segments(&self) -> Option<[&str; 4]> {
        let parts: Vec<&str> = self.connectivity_node.split('/').collect();
        match parts.as_slice() {
            [s, v, b, n] if parts.iter().all(|p| !p.is_empty()) => Some([s, v, b, n]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConnectivityNode {
    pub name: String,
    pub path_name: String,
    pub extra: Extra,
}

impl ConnectivityNode {
    pub fn new(substation: &str, voltage_level: &str, bay: &str, name: &str) -> Self {
        ConnectivityNode {
            name: name.into(),
            path_name: format!("{substation}/{voltage_level}/{bay}/{name}"),
            extra: Extra::default(),
        }
    }
}

/// Allocation of an IED logical node to a piece of primary equipment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LNodeRef {
    pub ied_name: String,
    pub ld_inst: String,
    pub prefix: String,
    pub ln_class: String,
    pub ln_inst: String,
    pub extra: Extra,
}

impl LNodeRef {
    pub fn new(ied: &str, ld: &str, ln_class: &str, ln_inst: &str) -> Self {
        LNodeRef {
            ied_name: ied.into(),
            ld_inst: ld.into(),
            prefix: String::new(),
            ln_class: ln_class.into(),
            ln_inst: ln_inst.into(),
            extra: Extra::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ied {
    pub name: String,
    /// The IED `type` attribute; network switches carry `Switch`.
    pub ied_type: Option<String>,
    pub manufacturer: Option<String>,
    pub access_points: Vec<AccessPoint>,
    pub extra: Extra,
}

impl Ied {
    pub fn new(name: impl Into<String>) -> Self {
        Ied {
            name: name.into(),
            ..Ied::default()
        }
    }

    pub fn is_switch(&self) -> bool {
        self.ied_type
            .as_deref()
            .is_some_and(|t| t.eq_ignore_ascii_case("switch"))
    }

    pub fn access_point_names(&self) -> impl Iterator<Item = &str> {
        self.access_points.iter().map(|a| a.name.as_str())
    }

    pub fn logical_devices(&self) -> impl Iterator<Item = &LogicalDevice> {
        self.access_points
            .iter()
            .filter_map(|a| a.server.as_ref())
            .flat_map(|s| s.logical_devices.iter())
    }

    pub fn logical_devices_mut(&mut self) -> impl Iterator<Item = &mut LogicalDevice> {
        self.access_points
            .iter_mut()
            .filter_map(|a| a.server.as_mut())
            .flat_map(|s| s.logical_devices.iter_mut())
    }

    pub fn logical_device(&self, inst: &str) -> Option<&LogicalDevice> {
        self.logical_devices().find(|ld| ld.inst == inst)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccessPoint {
    pub name: String,
    pub server: Option<Server>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Server {
    pub logical_devices: Vec<LogicalDevice>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogicalDevice {
    pub inst: String,
    pub logical_nodes: Vec<LogicalNode>,
    pub extra: Extra,
}

impl LogicalDevice {
    /// Look up an LN by class and instance, optionally also by prefix.
    pub fn logical_node(&self, prefix: Option<&str>, ln_class: &str, inst: &str) -> Option<&LogicalNode> {
        self.logical_nodes.iter().find(|ln| {
            ln.ln_class == ln_class && ln.inst == inst && prefix.is_none_or(|p| ln.prefix == p)
        })
    }

    pub fn ln0(&self) -> Option<&LogicalNode> {
        self.logical_nodes.iter().find(|ln| ln.is_ln0())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogicalNode {
    pub prefix: String,
    pub ln_class: String,
    pub inst: String,
    pub ln_type: String,
    pub data_objects: Vec<DataObject>,
    pub data_sets: Vec<DataSet>,
    pub report_controls: Vec<ReportControlBlock>,
    pub goose_controls: Vec<GooseControlBlock>,
    pub extra: Extra,
}

impl LogicalNode {
    pub fn new(prefix: &str, ln_class: &str, inst: &str) -> Self {
        LogicalNode {
            prefix: prefix.into(),
            ln_class: ln_class.into(),
            inst: inst.into(),
            ln_type: format!("{ln_class}_T"),
            ..LogicalNode::default()
        }
    }

    pub fn is_ln0(&self) -> bool {
        self.ln_class == "LLN0"
    }

    /// Conventional LN name: prefix + class + instance, e.g. `MMXU1`.
    pub fn full_name(&self) -> String {
        format!("{}{}{}", self.prefix, self.ln_class, self.inst)
    }

    pub fn data_object(&self, name: &str) -> Option<&DataObject> {
        self.data_objects.iter().find(|d| d.name() == name)
    }

    pub fn data_set(&self, name: &str) -> Option<&DataSet> {
        self.data_sets.iter().find(|d| d.name == name)
    }
}

/// An instantiated data object (`DOI`), kept as its element so values and
/// unmodelled attributes survive a round-trip.
#[derive(Debug, Clone, PartialEq)]
pub struct DataObject {
    pub element: Element,
}

impl DataObject {
    /// Build a `DOI` with one `DAI` leaf per dotted attribute path, nesting
    /// intermediate segments as `SDI`s.
    pub fn new(name: &str, da_paths: &[&str]) -> Self {
        let mut doi = Element::new("DOI").with_attr("name", name);
        for path in da_paths {
            let segs: Vec<&str> = path.split('.').filter(|s| !s.is_empty()).collect();
            insert_da_path(&mut doi, &segs);
        }
        DataObject { element: doi }
    }

    pub fn name(&self) -> &str {
        self.element.attr("name").unwrap_or("")
    }

    /// Dotted paths of every `DAI` below the object.
    pub fn da_paths(&self) -> Vec<String> {
        fn rec(el: &crate::xml::Element, prefix: &str, out: &mut Vec<String>) {
            for c in &el.children {
                let name = c.attr("name").unwrap_or("");
                let path = if prefix.is_empty() {
                    name.to_string()
                } else {
                    format!("{prefix}.{name}")
                };
                match c.local_name() {
                    "DAI" => out.push(path),
                    "SDI" => rec(c, &path, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        rec(&self.element, "", &mut out);
        out
    }
}

fn insert_da_path(parent: &mut Element, segs: &[&str]) {
    match segs {
        [] => {}
        [leaf] => parent.children.push(Element::new("DAI").with_attr("name", *leaf)),
        [head, rest @ ..] => {
            let idx = parent
                .children
                .iter()
                .position(|c| c.local_name() == "SDI" && c.attr("name") == Some(head));
            let idx = match idx {
                Some(i) => i,
                None => {
                    parent.children.push(Element::new("SDI").with_attr("name", *head));
                    parent.children.len() - 1
                }
            };
            insert_da_path(&mut parent.children[idx], rest);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataSet {
    pub name: String,
    pub entries: Vec<Fcda>,
    pub extra: Extra,
}

/// Functionally constrained data attribute reference inside a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Fcda {
    pub ld_inst: String,
    pub prefix: String,
    pub ln_class: String,
    pub ln_inst: String,
    pub do_name: String,
    pub da_name: String,
    pub fc: String,
}

impl Fcda {
    /// Name of the top-level data object (`doName` may carry sub-objects).
    pub fn top_do(&self) -> &str {
        self.do_name.split('.').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TriggerOptions {
    pub data_change: bool,
    pub quality_change: bool,
    pub integrity_period: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportControlBlock {
    pub name: String,
    pub rpt_id: String,
    pub dat_set: String,
    pub buffered: bool,
    pub trigger: TriggerOptions,
    pub integrity_period_ms: Option<u32>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GooseControlBlock {
    pub name: String,
    pub app_id: String,
    pub dat_set: String,
    pub conf_rev: u32,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Communication {
    pub sub_networks: Vec<SubNetwork>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubNetwork {
    pub name: String,
    pub net_type: String,
    pub connected_aps: Vec<ConnectedAp>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConnectedAp {
    pub ied_name: String,
    pub ap_name: String,
    /// `Address/P` entries in document order (IP, IP-SUBNET, IP-GATEWAY, ...).
    pub address: Vec<(String, String)>,
    pub gse: Vec<Gse>,
    pub phys_conns: Vec<PhysConn>,
    pub extra: Extra,
}

impl ConnectedAp {
    pub fn address_param(&self, key: &str) -> Option<&str> {
        self.address
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn ip(&self) -> Option<&str> {
        self.address_param("IP")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gse {
    pub cb_name: String,
    pub ld_inst: String,
    pub mac_address: String,
    pub app_id: Option<String>,
    pub vlan_id: Option<String>,
    pub vlan_priority: Option<String>,
    /// Remaining `Address/P` entries.
    pub other_params: Vec<(String, String)>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhysConn {
    pub conn_type: String,
    pub params: Vec<(String, String)>,
    pub extra: Extra,
}

impl PhysConn {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn port(&self) -> Option<&str> {
        self.param("Port")
    }

    pub fn plug(&self) -> Option<&str> {
        self.param("Plug")
    }

    pub fn cable(&self) -> Option<&str> {
        self.param("Cable")
    }
}

/// The `DataTypeTemplates` section, preserved verbatim, plus an index of its
/// logical node types for data-object lookups.
#[derive(Debug, Clone)]
pub struct DataTypeTemplates {
    pub verbatim: String,
    pub root: Element,
    pub lnode_types: Vec<LNodeTypeInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LNodeTypeInfo {
    pub id: String,
    pub ln_class: String,
    pub do_names: Vec<String>,
}

impl DataTypeTemplates {
    /// Index a `DataTypeTemplates` element. `verbatim` defaults to the
    /// element's own serialization.
    pub fn from_element(root: Element, verbatim: Option<String>) -> Self {
        let lnode_types = root
            .children_named("LNodeType")
            .map(|t| LNodeTypeInfo {
                id: t.attr("id").unwrap_or("").to_string(),
                ln_class: t.attr("lnClass").unwrap_or("").to_string(),
                do_names: t
                    .children_named("DO")
                    .filter_map(|d| d.attr("name"))
                    .map(str::to_string)
                    .collect(),
            })
            .collect();
        let verbatim = verbatim.unwrap_or_else(|| root.to_xml_string());
        DataTypeTemplates {
            verbatim,
            root,
            lnode_types,
        }
    }

    pub fn lnode_type(&self, id: &str) -> Option<&LNodeTypeInfo> {
        self.lnode_types.iter().find(|t| t.id == id)
    }
}

impl PartialEq for DataTypeTemplates {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}
