use crate::xml::{self, Element};

use super::model::*;
use super::{check_invariants, classify_model, resolve_references, LinkKind, SclError};

/// Controls how much checking [`parse_scl_with`] performs after building
/// the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Fail on the first dangling reference.
    pub resolve_references: bool,
    /// Fail on type invariant violations (duplicate names, bad addresses...).
    pub check_invariants: bool,
}

impl ParseOptions {
    pub const STRICT: ParseOptions = ParseOptions {
        resolve_references: true,
        check_invariants: true,
    };

    /// Structure only: used when the caller wants to inspect a broken
    /// document with [`resolve_references`].
    pub const LENIENT: ParseOptions = ParseOptions {
        resolve_references: false,
        check_invariants: false,
    };
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions::STRICT
    }
}

/// Parse an SCL document with full checking.
///
/// Terminals of SED documents may point at connectivity nodes of the
/// substations they interconnect, so those are not required to resolve
/// inside the SED itself.
pub fn parse_scl(bytes: &[u8]) -> Result<SclDocument, SclError> {
    parse_scl_with(bytes, ParseOptions::STRICT)
}

pub fn parse_scl_with(bytes: &[u8], opts: ParseOptions) -> Result<SclDocument, SclError> {
    let doc = xml::parse(bytes)?;
    let mut scl = from_element(&doc.root, Some(&doc))?;
    scl.kind = classify_model(&scl)?;
    if opts.check_invariants {
        if let Some(v) = check_invariants(&scl).into_iter().next() {
            return Err(v.into_parse_error());
        }
    }
    if opts.resolve_references {
        let report = resolve_references(&scl);
        let first = report.dangling().find(|l| {
            !(scl.kind == SclKind::Sed && l.kind == LinkKind::Terminal)
        });
        if let Some(link) = first {
            return Err(SclError::UnresolvedReference {
                path: link.source_path.clone(),
                target: link.target.clone(),
            });
        }
    }
    Ok(scl)
}

/// Build the model from an already parsed `SCL` element. The kind is set
/// provisionally to SSD; callers classify afterwards.
pub(crate) fn from_element(root: &Element, source: Option<&xml::XmlDocument>) -> Result<SclDocument, SclError> {
    if root.local_name() != "SCL" {
        return Err(SclError::UnclassifiableDocument(format!(
            "root element is <{}>, expected <SCL>",
            root.name
        )));
    }
    let mut header = None;
    let mut substations = Vec::new();
    let mut communication = None;
    let mut ieds = Vec::new();
    let mut templates = None;
    let mut extra = Vec::new();
    for child in &root.children {
        match child.local_name() {
            "Header" if header.is_none() => header = Some(header_from(child)?),
            "Substation" => substations.push(substation_from(child)?),
            "Communication" if communication.is_none() => communication = Some(communication_from(child)?),
            "IED" => ieds.push(ied_from(child)?),
            "DataTypeTemplates" if templates.is_none() => {
                let verbatim = source.and_then(|d| d.verbatim(child)).map(str::to_string);
                templates = Some(DataTypeTemplates::from_element(strip_spans(child), verbatim));
            }
            _ => extra.push(strip_spans(child)),
        }
    }
    let header = header.ok_or_else(|| SclError::MissingElement {
        path: "SCL".into(),
        element: "Header".into(),
    })?;
    Ok(SclDocument {
        kind: SclKind::Ssd,
        root_attrs: root.attrs.clone(),
        header,
        substations,
        communication,
        ieds,
        data_type_templates: templates,
        extra,
    })
}

fn strip_spans(el: &Element) -> Element {
    let mut el = el.clone();
    el.walk_mut(&mut |e| e.span = None);
    el
}

fn required(el: &Element, attr: &str, path: &str) -> Result<String, SclError> {
    el.attr(attr).map(str::to_string).ok_or_else(|| SclError::MissingAttribute {
        path: path.to_string(),
        attr: attr.to_string(),
    })
}

fn optional(el: &Element, attr: &str) -> String {
    el.attr(attr).unwrap_or("").to_string()
}

/// Split off attributes and children not in the known lists.
fn extra_of(el: &Element, known_attrs: &[&str], known_children: &[&str]) -> Extra {
    Extra {
        attrs: el
            .attrs
            .iter()
            .filter(|(k, _)| !known_attrs.contains(&k.as_str()))
            .cloned()
            .collect(),
        children: el
            .children
            .iter()
            .filter(|c| !known_children.contains(&c.local_name()))
            .map(strip_spans)
            .collect(),
    }
}

fn invalid(path: &str, message: impl Into<String>) -> SclError {
    SclError::InvalidValue {
        path: path.to_string(),
        message: message.into(),
    }
}

fn header_from(el: &Element) -> Result<Header, SclError> {
    Ok(Header {
        id: required(el, "id", "SCL/Header")?,
        version: optional(el, "version"),
        revision: optional(el, "revision"),
        extra: extra_of(el, &["id", "version", "revision"], &[]),
    })
}

fn lnodes_of(el: &Element) -> Vec<LNodeRef> {
    el.children_named("LNode")
        .map(|l| LNodeRef {
            ied_name: optional(l, "iedName"),
            ld_inst: optional(l, "ldInst"),
            prefix: optional(l, "prefix"),
            ln_class: optional(l, "lnClass"),
            ln_inst: optional(l, "lnInst"),
            extra: extra_of(l, &["iedName", "ldInst", "prefix", "lnClass", "lnInst"], &[]),
        })
        .collect()
}

fn substation_from(el: &Element) -> Result<Substation, SclError> {
    let name = required(el, "name", "SCL/Substation")?;
    let path = format!("Substation[{name}]");
    let power_transformers = el
        .children_named("PowerTransformer")
        .map(|t| transformer_from(t, &path))
        .collect::<Result<_, _>>()?;
    let voltage_levels = el
        .children_named("VoltageLevel")
        .map(|v| voltage_level_from(v, &path))
        .collect::<Result<_, _>>()?;
    Ok(Substation {
        lnodes: lnodes_of(el),
        power_transformers,
        voltage_levels,
        extra: extra_of(el, &["name"], &["LNode", "PowerTransformer", "VoltageLevel"]),
        name,
    })
}

fn transformer_from(el: &Element, parent: &str) -> Result<PowerTransformer, SclError> {
    let name = required(el, "name", parent)?;
    let path = format!("{parent}/PowerTransformer[{name}]");
    let windings = el
        .children_named("TransformerWinding")
        .map(|w| {
            let wname = required(w, "name", &path)?;
            let wpath = format!("{path}/TransformerWinding[{wname}]");
            Ok(TransformerWinding {
                terminals: terminals_of(w, &wpath)?,
                lnodes: lnodes_of(w),
                extra: extra_of(w, &["name", "type"], &["Terminal", "LNode"]),
                name: wname,
            })
        })
        .collect::<Result<_, SclError>>()?;
    Ok(PowerTransformer {
        windings,
        lnodes: lnodes_of(el),
        extra: extra_of(el, &["name", "type"], &["TransformerWinding", "LNode"]),
        name,
    })
}

fn voltage_level_from(el: &Element, parent: &str) -> Result<VoltageLevel, SclError> {
    let name = required(el, "name", parent)?;
    let path = format!("{parent}/VoltageLevel[{name}]");
    let voltage = match el.child("Voltage") {
        None => None,
        Some(v) => {
            let multiplier = optional(v, "multiplier");
            let factor = multiplier_factor(&multiplier)
                .ok_or_else(|| invalid(&path, format!("unknown voltage multiplier {multiplier:?}")))?;
            if let Some(unit) = v.attr("unit") {
                if unit != "V" {
                    return Err(invalid(&path, format!("voltage unit {unit:?} is not V")));
                }
            }
            let value: f64 = v
                .text
                .trim()
                .parse()
                .map_err(|_| invalid(&path, format!("voltage value {:?} is not a number", v.text)))?;
            Some(Voltage {
                volts: value * factor,
                multiplier,
            })
        }
    };
    let nom_freq = match el.attr("nomFreq") {
        None => None,
        Some(f) => Some(f.parse().map_err(|_| invalid(&path, format!("nomFreq {f:?}")))?),
    };
    let num_phases = match el.attr("numPhases") {
        None => None,
        Some(n) => Some(n.parse().map_err(|_| invalid(&path, format!("numPhases {n:?}")))?),
    };
    let bays = el
        .children_named("Bay")
        .map(|b| bay_from(b, &path))
        .collect::<Result<_, _>>()?;
    Ok(VoltageLevel {
        voltage,
        nom_freq,
        num_phases,
        lnodes: lnodes_of(el),
        bays,
        extra: extra_of(el, &["name", "nomFreq", "numPhases"], &["Voltage", "LNode", "Bay"]),
        name,
    })
}

fn bay_from(el: &Element, parent: &str) -> Result<Bay, SclError> {
    let name = required(el, "name", parent)?;
    let path = format!("{parent}/Bay[{name}]");
    let conducting_equipment = el
        .children_named("ConductingEquipment")
        .map(|c| {
            let cname = required(c, "name", &path)?;
            let cpath = format!("{path}/ConductingEquipment[{cname}]");
            Ok(ConductingEquipment {
                ce_type: optional(c, "type"),
                terminals: terminals_of(c, &cpath)?,
                lnodes: lnodes_of(c),
                extra: extra_of(c, &["name", "type"], &["Terminal", "LNode"]),
                name: cname,
            })
        })
        .collect::<Result<_, SclError>>()?;
    let connectivity_nodes = el
        .children_named("ConnectivityNode")
        .map(|n| {
            Ok(ConnectivityNode {
                name: required(n, "name", &path)?,
                path_name: required(n, "pathName", &path)?,
                extra: extra_of(n, &["name", "pathName"], &[]),
            })
        })
        .collect::<Result<_, SclError>>()?;
    Ok(Bay {
        lnodes: lnodes_of(el),
        conducting_equipment,
        connectivity_nodes,
        extra: extra_of(el, &["name"], &["LNode", "ConductingEquipment", "ConnectivityNode"]),
        name,
    })
}

/// Attributes of `Terminal` that are derived from `connectivityNode` and
/// regenerated on output.
pub(crate) const TERMINAL_DERIVED: [&str; 4] = ["substationName", "voltageLevelName", "bayName", "cNodeName"];

fn terminals_of(el: &Element, path: &str) -> Result<Vec<Terminal>, SclError> {
    el.children_named("Terminal")
        .map(|t| {
            let mut known = vec!["name", "connectivityNode"];
            known.extend(TERMINAL_DERIVED);
            Ok(Terminal {
                name: optional(t, "name"),
                connectivity_node: required(t, "connectivityNode", path)?,
                extra: extra_of(t, &known, &[]),
            })
        })
        .collect()
}

fn ied_from(el: &Element) -> Result<Ied, SclError> {
    let name = required(el, "name", "SCL/IED")?;
    let path = format!("IED[{name}]");
    let access_points = el
        .children_named("AccessPoint")
        .map(|ap| {
            let ap_name = required(ap, "name", &path)?;
            let ap_path = format!("{path}/AccessPoint[{ap_name}]");
            let server = ap
                .child("Server")
                .map(|s| {
                    let logical_devices = s
                        .children_named("LDevice")
                        .map(|ld| logical_device_from(ld, &ap_path))
                        .collect::<Result<_, _>>()?;
                    Ok::<_, SclError>(Server {
                        logical_devices,
                        extra: extra_of(s, &[], &["LDevice"]),
                    })
                })
                .transpose()?;
            Ok(AccessPoint {
                server,
                extra: extra_of(ap, &["name"], &["Server"]),
                name: ap_name,
            })
        })
        .collect::<Result<_, SclError>>()?;
    Ok(Ied {
        ied_type: el.attr("type").map(str::to_string),
        manufacturer: el.attr("manufacturer").map(str::to_string),
        access_points,
        extra: extra_of(el, &["name", "type", "manufacturer"], &["AccessPoint"]),
        name,
    })
}

fn logical_device_from(el: &Element, parent: &str) -> Result<LogicalDevice, SclError> {
    let inst = required(el, "inst", parent)?;
    let path = format!("{parent}/LDevice[{inst}]");
    let logical_nodes = el
        .children
        .iter()
        .filter(|c| matches!(c.local_name(), "LN0" | "LN"))
        .map(|ln| logical_node_from(ln, &path))
        .collect::<Result<_, _>>()?;
    Ok(LogicalDevice {
        logical_nodes,
        extra: extra_of(el, &["inst"], &["LN0", "LN"]),
        inst,
    })
}

fn parse_bool(v: &str, path: &str) -> Result<bool, SclError> {
    match v {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(invalid(path, format!("{other:?} is not a boolean"))),
    }
}

fn logical_node_from(el: &Element, parent: &str) -> Result<LogicalNode, SclError> {
    let ln_class = required(el, "lnClass", parent)?;
    let prefix = optional(el, "prefix");
    let inst = optional(el, "inst");
    let path = format!("{parent}/LN[{prefix}{ln_class}{inst}]");

    let data_sets = el
        .children_named("DataSet")
        .map(|ds| {
            Ok(DataSet {
                name: required(ds, "name", &path)?,
                entries: ds
                    .children_named("FCDA")
                    .map(|f| Fcda {
                        ld_inst: optional(f, "ldInst"),
                        prefix: optional(f, "prefix"),
                        ln_class: optional(f, "lnClass"),
                        ln_inst: optional(f, "lnInst"),
                        do_name: optional(f, "doName"),
                        da_name: optional(f, "daName"),
                        fc: optional(f, "fc"),
                    })
                    .collect(),
                extra: extra_of(ds, &["name"], &["FCDA"]),
            })
        })
        .collect::<Result<_, SclError>>()?;

    let report_controls = el
        .children_named("ReportControl")
        .map(|rc| {
            let name = required(rc, "name", &path)?;
            let rpath = format!("{path}/ReportControl[{name}]");
            let trigger = match rc.child("TrgOps") {
                None => TriggerOptions::default(),
                Some(t) => TriggerOptions {
                    data_change: t.attr("dchg").map(|v| parse_bool(v, &rpath)).transpose()?.unwrap_or(false),
                    quality_change: t.attr("qchg").map(|v| parse_bool(v, &rpath)).transpose()?.unwrap_or(false),
                    integrity_period: t.attr("period").map(|v| parse_bool(v, &rpath)).transpose()?.unwrap_or(false),
                },
            };
            let mut integrity_period_ms = match rc.attr("intgPd") {
                None => None,
                Some(p) => Some(p.parse::<u32>().map_err(|_| invalid(&rpath, format!("intgPd {p:?}")))?),
            };
            // intgPd="0" is how tools spell "no integrity period"
            if !trigger.integrity_period && integrity_period_ms == Some(0) {
                integrity_period_ms = None;
            }
            Ok(ReportControlBlock {
                rpt_id: optional(rc, "rptID"),
                dat_set: optional(rc, "datSet"),
                buffered: rc.attr("buffered").map(|v| parse_bool(v, &rpath)).transpose()?.unwrap_or(false),
                trigger,
                integrity_period_ms,
                extra: extra_of(rc, &["name", "rptID", "datSet", "buffered", "intgPd"], &["TrgOps"]),
                name,
            })
        })
        .collect::<Result<_, SclError>>()?;

    let goose_controls = el
        .children_named("GSEControl")
        .map(|gc| {
            let name = required(gc, "name", &path)?;
            let conf_rev = match gc.attr("confRev") {
                None => 0,
                Some(v) => v
                    .parse()
                    .map_err(|_| invalid(&format!("{path}/GSEControl[{name}]"), format!("confRev {v:?}")))?,
            };
            Ok(GooseControlBlock {
                app_id: optional(gc, "appID"),
                dat_set: optional(gc, "datSet"),
                conf_rev,
                extra: extra_of(gc, &["name", "appID", "datSet", "confRev"], &[]),
                name,
            })
        })
        .collect::<Result<_, SclError>>()?;

    Ok(LogicalNode {
        ln_type: optional(el, "lnType"),
        data_objects: el
            .children_named("DOI")
            .map(|d| DataObject { element: strip_spans(d) })
            .collect(),
        data_sets,
        report_controls,
        goose_controls,
        extra: extra_of(
            el,
            &["prefix", "lnClass", "inst", "lnType"],
            &["DOI", "DataSet", "ReportControl", "GSEControl"],
        ),
        prefix,
        ln_class,
        inst,
    })
}

fn p_params(el: Option<&Element>) -> Vec<(String, String)> {
    el.map(|a| {
        a.children_named("P")
            .map(|p| (optional(p, "type"), p.text.trim().to_string()))
            .collect()
    })
    .unwrap_or_default()
}

fn communication_from(el: &Element) -> Result<Communication, SclError> {
    let sub_networks = el
        .children_named("SubNetwork")
        .map(|sn| {
            let name = required(sn, "name", "SCL/Communication")?;
            let path = format!("Communication/SubNetwork[{name}]");
            let connected_aps = sn
                .children_named("ConnectedAP")
                .map(|cap| connected_ap_from(cap, &path))
                .collect::<Result<_, _>>()?;
            Ok(SubNetwork {
                net_type: optional(sn, "type"),
                connected_aps,
                extra: extra_of(sn, &["name", "type"], &["ConnectedAP"]),
                name,
            })
        })
        .collect::<Result<_, SclError>>()?;
    Ok(Communication {
        sub_networks,
        extra: extra_of(el, &[], &["SubNetwork"]),
    })
}

fn connected_ap_from(el: &Element, parent: &str) -> Result<ConnectedAp, SclError> {
    let ied_name = required(el, "iedName", parent)?;
    let ap_name = required(el, "apName", parent)?;
    let path = format!("{parent}/ConnectedAP[{ied_name}/{ap_name}]");
    let gse = el
        .children_named("GSE")
        .map(|g| {
            let mut params = p_params(g.child("Address"));
            let mut take = |key: &str| {
                params
                    .iter()
                    .position(|(k, _)| k == key)
                    .map(|i| params.remove(i).1)
            };
            let mac_address = take("MAC-Address").ok_or_else(|| SclError::MissingElement {
                path: format!("{path}/GSE[{}]", optional(g, "cbName")),
                element: "P[MAC-Address]".into(),
            })?;
            let app_id = take("APPID");
            let vlan_id = take("VLAN-ID");
            let vlan_priority = take("VLAN-PRIORITY");
            Ok(Gse {
                cb_name: optional(g, "cbName"),
                ld_inst: optional(g, "ldInst"),
                mac_address,
                app_id,
                vlan_id,
                vlan_priority,
                other_params: params,
                extra: extra_of(g, &["cbName", "ldInst"], &["Address"]),
            })
        })
        .collect::<Result<_, SclError>>()?;
    let phys_conns = el
        .children_named("PhysConn")
        .map(|pc| PhysConn {
            conn_type: optional(pc, "type"),
            params: pc
                .children_named("P")
                .map(|p| (optional(p, "type"), p.text.trim().to_string()))
                .collect(),
            extra: extra_of(pc, &["type"], &["P"]),
        })
        .collect();
    Ok(ConnectedAp {
        address: p_params(el.child("Address")),
        gse,
        phys_conns,
        extra: extra_of(el, &["iedName", "apName"], &["Address", "GSE", "PhysConn"]),
        ied_name,
        ap_name,
    })
}
