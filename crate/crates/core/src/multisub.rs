//! Multi-substation models: SCD concatenation and SSD+SED bay grafting.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::scl::{
    classify_model, render, Bay, Communication, DataTypeTemplates, Header, SclDocument, SclError, SclKind,
};
use crate::validate::ValidationReport;
use crate::xml::{self, Element};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MergeError {
    #[error("nothing to merge")]
    EmptyInput,
    #[error("input {index} is {found}, expected {expected}")]
    KindMismatch {
        index: usize,
        expected: &'static str,
        found: SclKind,
    },
    #[error("{kind} name {name:?} occurs in more than one input")]
    NameCollision { kind: &'static str, name: String },
    #[error("no voltage level named {0:?} in the merged substations")]
    NoMatchingVoltageLevel(String),
    #[error("{path}: interconnection terminal points at missing node {target:?}")]
    UnresolvedInterconnectTerminal { path: String, target: String },
    #[error(transparent)]
    Scl(#[from] SclError),
}

/// How `merge_scd` treats names that occur in several inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionPolicy {
    Error,
    /// Rename to `{substation}_{name}`, using the first substation of the
    /// document the name comes from.
    #[default]
    Prefix,
}

impl fmt::Display for CollisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CollisionPolicy::Error => "error",
            CollisionPolicy::Prefix => "prefix",
        })
    }
}

impl FromStr for CollisionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(CollisionPolicy::Error),
            "prefix" => Ok(CollisionPolicy::Prefix),
            other => Err(format!("unknown collision policy {other:?} (expected error or prefix)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceDocument {
    pub name: String,
    pub kind: SclKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Rename {
    /// Index of the input the renamed element came from.
    pub document: usize,
    pub old_name: String,
    pub new_name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GraftedBay {
    pub sed_file: String,
    pub voltage_level_name: String,
    pub bay_name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MergeReport {
    pub source_documents: Vec<SourceDocument>,
    pub renames: Vec<Rename>,
    pub grafted_bays: Vec<GraftedBay>,
    pub warnings: Vec<String>,
}

impl MergeReport {
    fn sources<'a>(docs: impl IntoIterator<Item = &'a SclDocument>) -> Self {
        MergeReport {
            source_documents: docs
                .into_iter()
                .map(|d| SourceDocument {
                    name: d.header.id.clone(),
                    kind: d.kind,
                })
                .collect(),
            ..MergeReport::default()
        }
    }

    /// Replace the source names (header ids by default) with file names.
    pub fn name_sources<S: AsRef<str>>(&mut self, names: &[S]) {
        let mut names = names.iter();
        for s in &mut self.source_documents {
            if let Some(n) = names.next() {
                s.name = n.as_ref().to_string();
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn merged_header(docs: &[&SclDocument]) -> Header {
    let id = docs.iter().map(|d| d.header.id.as_str()).collect::<Vec<_>>().join("+");
    let mut h = Header::new(id);
    h.version = "1".into();
    h
}

/// Union of the type definitions, keyed by element name and id. Exact
/// duplicates collapse; a second, different definition of an id is dropped
/// with a warning.
fn union_templates<'a>(
    all: impl IntoIterator<Item = &'a DataTypeTemplates>,
    warnings: &mut Vec<String>,
) -> Option<DataTypeTemplates> {
    let mut root: Option<Element> = None;
    let mut seen: HashMap<(String, String), Element> = HashMap::new();
    for t in all {
        let out = root.get_or_insert_with(|| Element {
            name: t.root.name.clone(),
            attrs: t.root.attrs.clone(),
            ..Element::default()
        });
        for child in &t.root.children {
            let key = (child.local_name().to_string(), child.attr("id").unwrap_or("").to_string());
            match seen.get(&key) {
                Some(prev) if prev == child => {}
                Some(_) => warnings.push(format!(
                    "conflicting definitions of {} {:?}; the first one is kept",
                    key.0, key.1
                )),
                None => {
                    seen.insert(key, child.clone());
                    out.children.push(child.clone());
                }
            }
        }
    }
    root.map(|r| DataTypeTemplates::from_element(r, None))
}

fn check_kinds(docs: &[SclDocument], allowed: &[SclKind], expected: &'static str) -> Result<(), MergeError> {
    match docs.iter().enumerate().find(|(_, d)| !allowed.contains(&d.kind)) {
        Some((index, d)) => Err(MergeError::KindMismatch {
            index,
            expected,
            found: d.kind,
        }),
        None => Ok(()),
    }
}

/// Rename IEDs throughout a document: the IED element itself and every
/// `iedName` attribute or `IEDName` element that points at it.
fn rename_ieds(doc: &SclDocument, map: &HashMap<String, String>) -> Result<SclDocument, SclError> {
    if map.is_empty() {
        return Ok(doc.clone());
    }
    let text = render(doc);
    let mut root = xml::parse(text.as_bytes())?.root;
    root.walk_mut(&mut |el| {
        let is_ied = el.local_name() == "IED";
        for (k, v) in el.attrs.iter_mut() {
            let key = xml::local(k);
            if (key == "iedName" || (is_ied && key == "name")) && map.contains_key(v.as_str()) {
                *v = map[v.as_str()].clone();
            }
        }
        if el.local_name() == "IEDName" {
            if let Some(new) = map.get(el.text.trim()) {
                el.text = new.clone();
            }
        }
    });
    let mut out = crate::scl::from_element(&root, None)?;
    out.kind = doc.kind;
    out.data_type_templates = doc.data_type_templates.clone();
    Ok(out)
}

/// Names that occur in more than one document, with the documents holding
/// them.
fn collisions<'a, F, I>(docs: &'a [SclDocument], names: F) -> BTreeMap<&'a str, Vec<usize>>
where
    F: Fn(&'a SclDocument) -> I,
    I: Iterator<Item = &'a str>,
{
    let mut owners: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, d) in docs.iter().enumerate() {
        for n in names(d).collect::<BTreeSet<_>>() {
            owners.entry(n).or_default().push(i);
        }
    }
    owners.retain(|_, v| v.len() > 1);
    owners
}

fn prefix_of(doc: &SclDocument) -> &str {
    doc.substations.first().map_or(doc.header.id.as_str(), |s| s.name.as_str())
}

fn ensure_unique<'a>(names: impl Iterator<Item = &'a str>, kind: &'static str) -> Result<(), MergeError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(MergeError::NameCollision { kind, name: n.to_string() });
        }
    }
    Ok(())
}

/// Combine per-substation SCDs into one: substations, IEDs (switches
/// included) and subnetworks are concatenated in input order and the type
/// templates are unioned.
pub fn merge_scd(docs: &[SclDocument], policy: CollisionPolicy) -> Result<(SclDocument, MergeReport), MergeError> {
    if docs.is_empty() {
        return Err(MergeError::EmptyInput);
    }
    check_kinds(docs, &[SclKind::Scd], "SCD")?;
    let mut report = MergeReport::sources(docs);
    if docs.len() == 1 {
        return Ok((docs[0].clone(), report));
    }
    ensure_unique(docs.iter().flat_map(|d| d.substations.iter().map(|s| s.name.as_str())), "Substation")?;

    let ied_clash = collisions(docs, |d| d.ieds.iter().map(|i| i.name.as_str()));
    let subnet_clash = collisions(docs, |d| d.sub_networks().iter().map(|s| s.name.as_str()));
    if policy == CollisionPolicy::Error {
        if let Some(name) = ied_clash.keys().next() {
            return Err(MergeError::NameCollision { kind: "IED", name: name.to_string() });
        }
        if let Some(name) = subnet_clash.keys().next() {
            return Err(MergeError::NameCollision { kind: "SubNetwork", name: name.to_string() });
        }
    }

    let mut prepared = Vec::with_capacity(docs.len());
    for (i, d) in docs.iter().enumerate() {
        let prefix = prefix_of(d);
        let mut ied_map = HashMap::new();
        for (name, owners) in &ied_clash {
            if owners.contains(&i) {
                let new = format!("{prefix}_{name}");
                report.renames.push(Rename {
                    document: i,
                    old_name: name.to_string(),
                    new_name: new.clone(),
                    reason: "IED name collision".into(),
                });
                ied_map.insert(name.to_string(), new);
            }
        }
        let mut doc = rename_ieds(d, &ied_map)?;
        if let Some(comm) = doc.communication.as_mut() {
            for sn in &mut comm.sub_networks {
                if subnet_clash.get(sn.name.as_str()).is_some_and(|o| o.contains(&i)) {
                    let new = format!("{prefix}_{}", sn.name);
                    report.renames.push(Rename {
                        document: i,
                        old_name: sn.name.clone(),
                        new_name: new.clone(),
                        reason: "SubNetwork name collision".into(),
                    });
                    sn.name = new;
                }
            }
        }
        prepared.push(doc);
    }
    ensure_unique(prepared.iter().flat_map(|d| d.ieds.iter().map(|i| i.name.as_str())), "IED")?;
    ensure_unique(
        prepared.iter().flat_map(|d| d.sub_networks().iter().map(|s| s.name.as_str())),
        "SubNetwork",
    )?;

    let refs: Vec<&SclDocument> = docs.iter().collect();
    let mut merged = SclDocument::new(SclKind::Scd, merged_header(&refs));
    merged.root_attrs = docs[0].root_attrs.clone();
    let mut comm = Communication::default();
    let mut any_comm = false;
    for d in prepared.iter() {
        merged.substations.extend(d.substations.iter().cloned());
        merged.ieds.extend(d.ieds.iter().cloned());
        if let Some(c) = &d.communication {
            any_comm = true;
            comm.sub_networks.extend(c.sub_networks.iter().cloned());
            for a in &c.extra.attrs {
                if !comm.extra.attrs.contains(a) {
                    comm.extra.attrs.push(a.clone());
                }
            }
            comm.extra.children.extend(c.extra.children.iter().cloned());
        }
        for e in &d.extra {
            if !merged.extra.contains(e) {
                merged.extra.push(e.clone());
            }
        }
    }
    if any_comm {
        merged.communication = Some(comm);
    }
    merged.data_type_templates = union_templates(
        prepared.iter().filter_map(|d| d.data_type_templates.as_ref()),
        &mut report.warnings,
    );
    merged.kind = classify_model(&merged)?;
    Ok((merged, report))
}

/// Where a SED bay node lands once grafted.
struct Graft {
    substation: usize,
    voltage_level: usize,
    bay: usize,
}

/// Build one SSD describing every substation, then copy the bays of each
/// SED voltage level under the voltage level of the same name.
///
/// The host is the voltage level in the substation named like the SED's
/// substation when there is one, otherwise the first voltage level of that
/// name in input order. A grafted bay whose name is taken is renamed to
/// `{sedSubstation}_{bay}`. Terminals of grafted bays must resolve in the
/// merged model.
pub fn merge_ssd_sed(ssds: &[SclDocument], seds: &[SclDocument]) -> Result<(SclDocument, MergeReport), MergeError> {
    if ssds.is_empty() {
        return Err(MergeError::EmptyInput);
    }
    check_kinds(ssds, &[SclKind::Ssd, SclKind::Scd], "SSD")?;
    check_kinds(seds, &[SclKind::Sed], "SED")?;
    let mut report = MergeReport::sources(ssds.iter().chain(seds));
    ensure_unique(ssds.iter().flat_map(|d| d.substations.iter().map(|s| s.name.as_str())), "Substation")?;

    let refs: Vec<&SclDocument> = ssds.iter().collect();
    let mut merged = SclDocument::new(SclKind::Ssd, merged_header(&refs));
    merged.root_attrs = ssds[0].root_attrs.clone();
    merged.substations = ssds.iter().flat_map(|d| d.substations.iter().cloned()).collect();
    merged.data_type_templates = union_templates(
        ssds.iter().filter_map(|d| d.data_type_templates.as_ref()),
        &mut report.warnings,
    );

    let mut node_moves: HashMap<String, String> = HashMap::new();
    let mut grafts = Vec::new();
    for (si, sed) in seds.iter().enumerate() {
        let document = ssds.len() + si;
        for sed_sub in &sed.substations {
            for vl in &sed_sub.voltage_levels {
                let host = merged
                    .substations
                    .iter()
                    .position(|s| s.name == sed_sub.name && s.voltage_level(&vl.name).is_some())
                    .or_else(|| merged.substations.iter().position(|s| s.voltage_level(&vl.name).is_some()))
                    .ok_or_else(|| MergeError::NoMatchingVoltageLevel(vl.name.clone()))?;
                let sub = &mut merged.substations[host];
                let sub_name = sub.name.clone();
                let vi = sub
                    .voltage_levels
                    .iter()
                    .position(|v| v.name == vl.name)
                    .expect("host has the voltage level");
                let host_vl = &mut sub.voltage_levels[vi];
                for bay in &vl.bays {
                    let mut name = bay.name.clone();
                    if host_vl.bay(&name).is_some() {
                        let base = format!("{}_{}", sed_sub.name, bay.name);
                        name = base.clone();
                        let mut n = 2;
                        while host_vl.bay(&name).is_some() {
                            name = format!("{base}_{n}");
                            n += 1;
                        }
                        report.renames.push(Rename {
                            document,
                            old_name: bay.name.clone(),
                            new_name: name.clone(),
                            reason: format!("Bay name collision under VoltageLevel {}", vl.name),
                        });
                    }
                    let mut grafted: Bay = bay.clone();
                    grafted.name = name.clone();
                    for cn in &mut grafted.connectivity_nodes {
                        let new_path = format!("{sub_name}/{}/{name}/{}", host_vl.name, cn.name);
                        node_moves.insert(cn.path_name.clone(), new_path.clone());
                        cn.path_name = new_path;
                    }
                    host_vl.bays.push(grafted);
                    grafts.push(Graft {
                        substation: host,
                        voltage_level: vi,
                        bay: host_vl.bays.len() - 1,
                    });
                    report.grafted_bays.push(GraftedBay {
                        sed_file: sed.header.id.clone(),
                        voltage_level_name: vl.name.clone(),
                        bay_name: name,
                    });
                }
            }
        }
    }

    for g in &grafts {
        let bay = &mut merged.substations[g.substation].voltage_levels[g.voltage_level].bays[g.bay];
        for ce in &mut bay.conducting_equipment {
            for t in &mut ce.terminals {
                if let Some(new) = node_moves.get(&t.connectivity_node) {
                    t.connectivity_node = new.clone();
                }
            }
        }
    }
    let nodes: HashSet<String> = merged.connectivity_node_paths().map(str::to_string).collect();
    for g in &grafts {
        let sub = &merged.substations[g.substation];
        let vl = &sub.voltage_levels[g.voltage_level];
        let bay = &vl.bays[g.bay];
        for ce in &bay.conducting_equipment {
            for (ti, t) in ce.terminals.iter().enumerate() {
                if !nodes.contains(&t.connectivity_node) {
                    return Err(MergeError::UnresolvedInterconnectTerminal {
                        path: terminal_path(&sub.name, &vl.name, &bay.name, &ce.name, &t.name, ti),
                        target: t.connectivity_node.clone(),
                    });
                }
            }
        }
    }
    Ok((merged, report))
}

fn terminal_path(sub: &str, vl: &str, bay: &str, ce: &str, terminal: &str, index: usize) -> String {
    let t = if terminal.is_empty() { format!("#{index}") } else { terminal.to_string() };
    format!("Substation[{sub}]/VoltageLevel[{vl}]/Bay[{bay}]/ConductingEquipment[{ce}]/Terminal[{t}]")
}

/// Check that what each SED exchanges survives in the merged model: every
/// IED it connects has an IED section and an access point in the merged
/// communication, and every interconnection terminal (one pointing outside
/// the SED's own nodes) lands on a merged node.
///
/// IED entries are only checked when the merged document carries IED or
/// communication sections, so a pure SSD is checked electrically only.
pub fn check_intersub_consistency(merged: &SclDocument, seds: &[SclDocument]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let merged_nodes: HashSet<&str> = merged.connectivity_node_paths().collect();
    let connected: HashSet<&str> = merged
        .sub_networks()
        .iter()
        .flat_map(|sn| sn.connected_aps.iter().map(|c| c.ied_name.as_str()))
        .collect();
    let check_ieds = !merged.ieds.is_empty() || merged.communication.is_some();
    for sed in seds {
        let sed_path = format!("SED[{}]", sed.header.id);
        if check_ieds {
            let mut reported = HashSet::new();
            for sn in sed.sub_networks() {
                for ap in &sn.connected_aps {
                    let name = ap.ied_name.as_str();
                    let present = merged.ied(name).is_some() && connected.contains(name);
                    if !present && reported.insert(name) {
                        report.error(
                            "intersub-ied-missing",
                            format!("{sed_path}/Communication/SubNetwork[{}]/ConnectedAP[{}/{}]", sn.name, name, ap.ap_name),
                            format!("IED {name} has no IED section or access point in the merged model"),
                        );
                    }
                }
            }
        }
        let own: HashSet<&str> = sed.connectivity_node_paths().collect();
        for sub in &sed.substations {
            for vl in &sub.voltage_levels {
                for bay in &vl.bays {
                    for ce in &bay.conducting_equipment {
                        for (ti, t) in ce.terminals.iter().enumerate() {
                            let target = t.connectivity_node.as_str();
                            if !own.contains(target) && !merged_nodes.contains(target) {
                                report.error(
                                    "intersub-terminal-unresolved",
                                    format!(
                                        "{sed_path}/{}",
                                        terminal_path(&sub.name, &vl.name, &bay.name, &ce.name, &t.name, ti)
                                    ),
                                    format!("connectivity node {target} is not in the merged model"),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    report
}
