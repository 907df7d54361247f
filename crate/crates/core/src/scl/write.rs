use crate::xml::Element;

use super::model::*;
use super::{check_invariants, SclError};

/// Children that the schema places before any modelled content.
const LEADING: [&str; 4] = ["Text", "Private", "Services", "Authentication"];

/// Serialize a document that satisfies every type invariant.
///
/// Output is deterministic: modelled children are written in model order,
/// which is document order for parsed input.
pub fn serialize_scl(doc: &SclDocument) -> Result<Vec<u8>, SclError> {
    let violations = check_invariants(doc);
    if !violations.is_empty() {
        let msg = violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        return Err(SclError::InvariantViolation(msg));
    }
    Ok(render(doc).into_bytes())
}

/// Render without invariant checks. Used for intentionally broken documents
/// in tests and for diagnostics.
pub fn render(doc: &SclDocument) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<SCL");
    for (k, v) in &doc.root_attrs {
        out.push_str(&format!(" {}=\"{}\"", k, quick_xml::escape::escape(v.as_str())));
    }
    out.push_str(">\n");
    let (leading, trailing): (Vec<&Element>, Vec<&Element>) =
        doc.extra.iter().partition(|e| LEADING.contains(&e.local_name()));
    for e in leading {
        e.write_to(&mut out, 1);
    }
    header_el(&doc.header).write_to(&mut out, 1);
    for s in &doc.substations {
        substation_el(s).write_to(&mut out, 1);
    }
    if let Some(c) = &doc.communication {
        communication_el(c).write_to(&mut out, 1);
    }
    for ied in &doc.ieds {
        ied_el(ied).write_to(&mut out, 1);
    }
    if let Some(t) = &doc.data_type_templates {
        out.push_str("  ");
        out.push_str(t.verbatim.trim());
        out.push('\n');
    }
    for e in trailing {
        e.write_to(&mut out, 1);
    }
    out.push_str("</SCL>\n");
    out
}

fn assemble(mut el: Element, extra: &Extra, known: Vec<Element>) -> Element {
    el.attrs.extend(extra.attrs.iter().cloned());
    let (leading, trailing): (Vec<&Element>, Vec<&Element>) =
        extra.children.iter().partition(|e| LEADING.contains(&e.local_name()));
    el.children.extend(leading.into_iter().cloned());
    el.children.extend(known);
    el.children.extend(trailing.into_iter().cloned());
    el
}

fn header_el(h: &Header) -> Element {
    let mut el = Element::new("Header").with_attr("id", &h.id);
    if !h.version.is_empty() {
        el.set_attr("version", &h.version);
    }
    if !h.revision.is_empty() {
        el.set_attr("revision", &h.revision);
    }
    assemble(el, &h.extra, Vec::new())
}

fn lnode_el(l: &LNodeRef) -> Element {
    let el = Element::new("LNode")
        .with_attr("iedName", &l.ied_name)
        .with_attr("ldInst", &l.ld_inst)
        .with_attr("prefix", &l.prefix)
        .with_attr("lnClass", &l.ln_class)
        .with_attr("lnInst", &l.ln_inst);
    assemble(el, &l.extra, Vec::new())
}

fn terminal_el(t: &Terminal) -> Element {
    let mut el = Element::new("Terminal");
    if !t.name.is_empty() {
        el.set_attr("name", &t.name);
    }
    el.set_attr("connectivityNode", &t.connectivity_node);
    if let Some([s, v, b, n]) = t.path_segments() {
        el.set_attr("substationName", s);
        el.set_attr("voltageLevelName", v);
        el.set_attr("bayName", b);
        el.set_attr("cNodeName", n);
    }
    assemble(el, &t.extra, Vec::new())
}

pub(crate) fn substation_el(s: &Substation) -> Element {
    let mut known: Vec<Element> = s.lnodes.iter().map(lnode_el).collect();
    known.extend(s.power_transformers.iter().map(transformer_el));
    known.extend(s.voltage_levels.iter().map(voltage_level_el));
    assemble(Element::new("Substation").with_attr("name", &s.name), &s.extra, known)
}

fn transformer_el(t: &PowerTransformer) -> Element {
    let mut known: Vec<Element> = t.lnodes.iter().map(lnode_el).collect();
    known.extend(t.windings.iter().map(|w| {
        let mut wk: Vec<Element> = w.lnodes.iter().map(lnode_el).collect();
        wk.extend(w.terminals.iter().map(terminal_el));
        assemble(
            Element::new("TransformerWinding")
                .with_attr("name", &w.name)
                .with_attr("type", "PTW"),
            &w.extra,
            wk,
        )
    }));
    let el = Element::new("PowerTransformer")
        .with_attr("name", &t.name)
        .with_attr("type", "PTR");
    assemble(el, &t.extra, known)
}

fn voltage_level_el(v: &VoltageLevel) -> Element {
    let mut el = Element::new("VoltageLevel").with_attr("name", &v.name);
    if let Some(f) = v.nom_freq {
        el.set_attr("nomFreq", f.to_string());
    }
    if let Some(n) = v.num_phases {
        el.set_attr("numPhases", n.to_string());
    }
    let mut known = Vec::new();
    if let Some(volt) = &v.voltage {
        let factor = multiplier_factor(&volt.multiplier).unwrap_or(1.0);
        let mut ve = Element::new("Voltage").with_attr("unit", "V");
        if !volt.multiplier.is_empty() {
            ve.set_attr("multiplier", &volt.multiplier);
        }
        known.push(ve.with_text((volt.volts / factor).to_string()));
    }
    known.extend(v.lnodes.iter().map(lnode_el));
    known.extend(v.bays.iter().map(bay_el));
    assemble(el, &v.extra, known)
}

fn bay_el(b: &Bay) -> Element {
    let mut known: Vec<Element> = b.lnodes.iter().map(lnode_el).collect();
    known.extend(b.conducting_equipment.iter().map(|c| {
        let mut ck: Vec<Element> = c.lnodes.iter().map(lnode_el).collect();
        ck.extend(c.terminals.iter().map(terminal_el));
        assemble(
            Element::new("ConductingEquipment")
                .with_attr("name", &c.name)
                .with_attr("type", &c.ce_type),
            &c.extra,
            ck,
        )
    }));
    known.extend(b.connectivity_nodes.iter().map(|n| {
        assemble(
            Element::new("ConnectivityNode")
                .with_attr("name", &n.name)
                .with_attr("pathName", &n.path_name),
            &n.extra,
            Vec::new(),
        )
    }));
    assemble(Element::new("Bay").with_attr("name", &b.name), &b.extra, known)
}

fn p_el(key: &str, value: &str) -> Element {
    Element::new("P").with_attr("type", key).with_text(value)
}

fn communication_el(c: &Communication) -> Element {
    let known = c
        .sub_networks
        .iter()
        .map(|sn| {
            let mut el = Element::new("SubNetwork").with_attr("name", &sn.name);
            if !sn.net_type.is_empty() {
                el.set_attr("type", &sn.net_type);
            }
            let aps = sn.connected_aps.iter().map(connected_ap_el).collect();
            assemble(el, &sn.extra, aps)
        })
        .collect();
    assemble(Element::new("Communication"), &c.extra, known)
}

fn connected_ap_el(cap: &ConnectedAp) -> Element {
    let mut known = Vec::new();
    if !cap.address.is_empty() {
        let mut addr = Element::new("Address");
        addr.children = cap.address.iter().map(|(k, v)| p_el(k, v)).collect();
        known.push(addr);
    }
    for g in &cap.gse {
        let mut addr = Element::new("Address").with_child(p_el("MAC-Address", &g.mac_address));
        for (key, value) in [("APPID", &g.app_id), ("VLAN-ID", &g.vlan_id), ("VLAN-PRIORITY", &g.vlan_priority)] {
            if let Some(v) = value {
                addr.children.push(p_el(key, v));
            }
        }
        addr.children.extend(g.other_params.iter().map(|(k, v)| p_el(k, v)));
        let el = Element::new("GSE")
            .with_attr("ldInst", &g.ld_inst)
            .with_attr("cbName", &g.cb_name);
        known.push(assemble(el, &g.extra, vec![addr]));
    }
    for pc in &cap.phys_conns {
        let ps = pc.params.iter().map(|(k, v)| p_el(k, v)).collect();
        known.push(assemble(
            Element::new("PhysConn").with_attr("type", &pc.conn_type),
            &pc.extra,
            ps,
        ));
    }
    let el = Element::new("ConnectedAP")
        .with_attr("iedName", &cap.ied_name)
        .with_attr("apName", &cap.ap_name);
    assemble(el, &cap.extra, known)
}

fn ied_el(ied: &Ied) -> Element {
    let mut el = Element::new("IED").with_attr("name", &ied.name);
    if let Some(t) = &ied.ied_type {
        el.set_attr("type", t);
    }
    if let Some(m) = &ied.manufacturer {
        el.set_attr("manufacturer", m);
    }
    let aps = ied
        .access_points
        .iter()
        .map(|ap| {
            let server = ap.server.as_ref().map(|s| {
                let lds = s.logical_devices.iter().map(ldevice_el).collect();
                assemble(Element::new("Server"), &s.extra, lds)
            });
            assemble(
                Element::new("AccessPoint").with_attr("name", &ap.name),
                &ap.extra,
                server.into_iter().collect(),
            )
        })
        .collect();
    assemble(el, &ied.extra, aps)
}

fn ldevice_el(ld: &LogicalDevice) -> Element {
    let lns = ld.logical_nodes.iter().map(ln_el).collect();
    assemble(Element::new("LDevice").with_attr("inst", &ld.inst), &ld.extra, lns)
}

fn ln_el(ln: &LogicalNode) -> Element {
    let mut el = Element::new(if ln.is_ln0() { "LN0" } else { "LN" });
    if !ln.prefix.is_empty() {
        el.set_attr("prefix", &ln.prefix);
    }
    el.set_attr("lnClass", &ln.ln_class);
    el.set_attr("inst", &ln.inst);
    el.set_attr("lnType", &ln.ln_type);

    let mut known: Vec<Element> = ln
        .data_sets
        .iter()
        .map(|ds| {
            let fcdas = ds
                .entries
                .iter()
                .map(|f| {
                    let mut fe = Element::new("FCDA").with_attr("ldInst", &f.ld_inst);
                    if !f.prefix.is_empty() {
                        fe.set_attr("prefix", &f.prefix);
                    }
                    fe.set_attr("lnClass", &f.ln_class);
                    fe.set_attr("lnInst", &f.ln_inst);
                    fe.set_attr("doName", &f.do_name);
                    if !f.da_name.is_empty() {
                        fe.set_attr("daName", &f.da_name);
                    }
                    fe.set_attr("fc", &f.fc);
                    fe
                })
                .collect();
            assemble(Element::new("DataSet").with_attr("name", &ds.name), &ds.extra, fcdas)
        })
        .collect();
    known.extend(ln.report_controls.iter().map(|rc| {
        let mut e = Element::new("ReportControl")
            .with_attr("name", &rc.name)
            .with_attr("rptID", &rc.rpt_id)
            .with_attr("datSet", &rc.dat_set)
            .with_attr("buffered", rc.buffered.to_string());
        if let Some(p) = rc.integrity_period_ms {
            e.set_attr("intgPd", p.to_string());
        }
        let trg = Element::new("TrgOps")
            .with_attr("dchg", rc.trigger.data_change.to_string())
            .with_attr("qchg", rc.trigger.quality_change.to_string())
            .with_attr("period", rc.trigger.integrity_period.to_string());
        assemble(e, &rc.extra, vec![trg])
    }));
    known.extend(ln.data_objects.iter().map(|d| d.element.clone()));
    known.extend(ln.goose_controls.iter().map(|gc| {
        let e = Element::new("GSEControl")
            .with_attr("name", &gc.name)
            .with_attr("appID", &gc.app_id)
            .with_attr("datSet", &gc.dat_set)
            .with_attr("confRev", gc.conf_rev.to_string());
        assemble(e, &gc.extra, Vec::new())
    }));
    assemble(el, &ln.extra, known)
}
