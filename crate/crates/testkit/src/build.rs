//! Small builders for SCL model pieces.

use sgml_core::scl::{
    AccessPoint, Bay, ConductingEquipment, ConnectedAp, ConnectivityNode, DataSet, DataTypeTemplates, Fcda,
    GooseControlBlock, Gse, Ied, LNodeRef, LogicalDevice, LogicalNode, PhysConn, ReportControlBlock, Server,
    SubNetwork, Terminal, TriggerOptions,
};
use sgml_core::xml::Element;

type CdcAttrs = &'static [(&'static str, &'static str, &'static str)];

/// Attributes of each common data class: `(name, bType, fc)`. An empty
/// `bType` marks a sub data object of class `fc`.
const CDCS: &[(&str, CdcAttrs)] = &[
    ("ENC", &[("stVal", "INT32", "ST"), ("q", "Quality", "ST")]),
    ("ENS", &[("stVal", "INT32", "ST"), ("q", "Quality", "ST")]),
    ("MV", &[("mag", "FLOAT32", "MX"), ("q", "Quality", "MX")]),
    ("CMV", &[("cVal", "FLOAT32", "MX"), ("q", "Quality", "MX")]),
    ("WYE", &[("phsA", "", "CMV"), ("phsB", "", "CMV"), ("phsC", "", "CMV")]),
    ("DPC", &[("stVal", "Dbpos", "ST"), ("ctlVal", "BOOLEAN", "CO")]),
    ("SPS", &[("stVal", "BOOLEAN", "ST"), ("q", "Quality", "ST")]),
    ("ACD", &[("general", "BOOLEAN", "ST"), ("dirGeneral", "Enum", "ST")]),
    ("ACT", &[("general", "BOOLEAN", "ST"), ("q", "Quality", "ST")]),
    ("ASG", &[("setMag", "FLOAT32", "SP")]),
    ("LPL", &[("vendor", "VisString255", "DC")]),
];

/// Data objects of each logical node class with their data class.
pub const LN_CLASSES: &[(&str, &[(&str, &str)])] = &[
    ("LLN0", &[("Mod", "ENC"), ("Beh", "ENS"), ("NamPlt", "LPL")]),
    ("LPHD", &[("PhyHealth", "ENS")]),
    ("MMXU", &[("TotW", "MV"), ("Hz", "MV"), ("PhV", "WYE"), ("A", "WYE")]),
    ("XCBR", &[("Pos", "DPC"), ("BlkOpn", "SPS")]),
    ("CSWI", &[("Pos", "DPC")]),
    ("PTOC", &[("Str", "ACD"), ("Op", "ACT"), ("StrVal", "ASG")]),
    ("PTOV", &[("Str", "ACD"), ("Op", "ACT"), ("StrVal", "ASG")]),
    ("PTUV", &[("Str", "ACD"), ("Op", "ACT"), ("StrVal", "ASG")]),
    ("PDOP", &[("Str", "ACD"), ("Op", "ACT"), ("StrVal", "ASG")]),
    ("PDIF", &[("Str", "ACD"), ("Op", "ACT")]),
    ("GGIO", &[("Ind1", "SPS")]),
];

pub fn data_objects(ln_class: &str) -> &'static [(&'static str, &'static str)] {
    LN_CLASSES
        .iter()
        .find(|(c, _)| *c == ln_class)
        .map(|(_, d)| *d)
        .unwrap_or(&[])
}

/// Templates for the given classes, each with the listed data objects (all
/// of them when the list is empty). With `lean` set, every data class keeps
/// only its first attribute.
pub fn templates(classes: &[(&str, &[&str])], lean: bool) -> DataTypeTemplates {
    let mut root = Element::new("DataTypeTemplates");
    let mut cdcs: Vec<&str> = Vec::new();
    fn need<'a>(cdc: &'a str, lean: bool, cdcs: &mut Vec<&'a str>) {
        if cdcs.contains(&cdc) {
            return;
        }
        cdcs.push(cdc);
        let attrs = CDCS.iter().find(|(c, _)| *c == cdc).map(|(_, a)| *a).unwrap_or(&[]);
        let attrs = if lean { &attrs[..attrs.len().min(1)] } else { attrs };
        for (_, btype, fc) in attrs {
            if btype.is_empty() {
                need(fc, lean, cdcs);
            }
        }
    }
    for (class, dos) in classes {
        let mut t = Element::new("LNodeType").with_attr("id", format!("{class}_T")).with_attr("lnClass", *class);
        for (name, cdc) in data_objects(class) {
            if dos.is_empty() || dos.contains(name) {
                t.children
                    .push(Element::new("DO").with_attr("name", *name).with_attr("type", *cdc));
                need(cdc, lean, &mut cdcs);
            }
        }
        root.children.push(t);
    }
    for cdc in cdcs {
        let attrs = CDCS.iter().find(|(c, _)| *c == cdc).map(|(_, a)| *a).unwrap_or(&[]);
        let attrs = if lean { &attrs[..attrs.len().min(1)] } else { attrs };
        let mut t = Element::new("DOType").with_attr("id", cdc).with_attr("cdc", cdc);
        for (name, btype, fc) in attrs {
            t.children.push(if btype.is_empty() {
                Element::new("SDO").with_attr("name", *name).with_attr("type", *fc)
            } else {
                Element::new("DA")
                    .with_attr("name", *name)
                    .with_attr("bType", *btype)
                    .with_attr("fc", *fc)
            });
        }
        root.children.push(t);
    }
    DataTypeTemplates::from_element(root, None)
}

pub fn full_templates() -> DataTypeTemplates {
    let all: Vec<(&str, &[&str])> = LN_CLASSES.iter().map(|(c, _)| (*c, &[][..])).collect();
    templates(&all, false)
}

pub fn ln0() -> LogicalNode {
    LogicalNode::new("", "LLN0", "")
}

pub fn fcda(ld: &str, ln: &LogicalNode, do_name: &str, fc: &str) -> Fcda {
    Fcda {
        ld_inst: ld.into(),
        prefix: ln.prefix.clone(),
        ln_class: ln.ln_class.clone(),
        ln_inst: ln.inst.clone(),
        do_name: do_name.into(),
        da_name: String::new(),
        fc: fc.into(),
    }
}

pub fn data_set(name: &str, entries: Vec<Fcda>) -> DataSet {
    DataSet {
        name: name.into(),
        entries,
        ..DataSet::default()
    }
}

pub fn report_control(name: &str, data_set: &str, integrity_ms: Option<u32>) -> ReportControlBlock {
    ReportControlBlock {
        name: name.into(),
        rpt_id: format!("{name}_id"),
        dat_set: data_set.into(),
        buffered: true,
        trigger: TriggerOptions {
            data_change: true,
            quality_change: false,
            integrity_period: integrity_ms.is_some(),
        },
        integrity_period_ms: integrity_ms,
        ..ReportControlBlock::default()
    }
}

pub fn goose_control(name: &str, data_set: &str, app_id: &str) -> GooseControlBlock {
    GooseControlBlock {
        name: name.into(),
        app_id: app_id.into(),
        dat_set: data_set.into(),
        conf_rev: 1,
        ..GooseControlBlock::default()
    }
}

/// An IED with access point `S1` serving one logical device.
pub fn ied(name: &str, ld: LogicalDevice) -> Ied {
    Ied {
        manufacturer: Some("sgml".into()),
        access_points: vec![AccessPoint {
            name: "S1".into(),
            server: Some(Server {
                logical_devices: vec![ld],
                ..Server::default()
            }),
            ..AccessPoint::default()
        }],
        ..Ied::new(name)
    }
}

/// A network switch: an IED of type `Switch` with a bare access point.
pub fn switch(name: &str) -> Ied {
    Ied {
        ied_type: Some("Switch".into()),
        access_points: vec![AccessPoint {
            name: "P1".into(),
            ..AccessPoint::default()
        }],
        ..Ied::new(name)
    }
}

pub fn logical_device(inst: &str, nodes: Vec<LogicalNode>) -> LogicalDevice {
    LogicalDevice {
        inst: inst.into(),
        logical_nodes: nodes,
        ..LogicalDevice::default()
    }
}

pub fn connected_ap(ied: &str, ap: &str, ip: Option<&str>) -> ConnectedAp {
    let mut c = ConnectedAp {
        ied_name: ied.into(),
        ap_name: ap.into(),
        ..ConnectedAp::default()
    };
    if let Some(ip) = ip {
        c.address = vec![
            ("IP".into(), ip.into()),
            ("IP-SUBNET".into(), "255.255.255.0".into()),
        ];
    }
    c
}

pub fn gse(cb: &str, ld: &str, mac: &str, app_id: &str) -> Gse {
    Gse {
        cb_name: cb.into(),
        ld_inst: ld.into(),
        mac_address: mac.into(),
        app_id: Some(app_id.into()),
        vlan_id: Some("000".into()),
        vlan_priority: Some("4".into()),
        ..Gse::default()
    }
}

pub fn phys_conn(port: &str, cable: Option<&str>) -> PhysConn {
    let mut params = vec![("Type".to_string(), "RJ45".to_string()), ("Port".to_string(), port.to_string())];
    if let Some(c) = cable {
        params.push(("Cable".into(), c.into()));
    }
    PhysConn {
        conn_type: "Connection".into(),
        params,
        ..PhysConn::default()
    }
}

pub fn sub_network(name: &str, aps: Vec<ConnectedAp>) -> SubNetwork {
    SubNetwork {
        name: name.into(),
        net_type: "8-MMS".into(),
        connected_aps: aps,
        ..SubNetwork::default()
    }
}

/// Equipment with terminals `T1`, `T2`, ... on the given node paths.
pub fn equipment(name: &str, ce_type: &str, nodes: &[&str]) -> ConductingEquipment {
    let mut ce = ConductingEquipment::new(name, ce_type);
    ce.terminals = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| Terminal::new(format!("T{}", i + 1), *n))
        .collect();
    ce
}

/// A bay with its nodes; node paths are derived from the location.
pub fn bay(substation: &str, voltage_level: &str, name: &str, nodes: &[&str]) -> Bay {
    let mut b = Bay::new(name);
    b.connectivity_nodes = nodes
        .iter()
        .map(|n| ConnectivityNode::new(substation, voltage_level, name, n))
        .collect();
    b
}

pub fn lnode(ied: &str, ld: &str, ln: &LogicalNode) -> LNodeRef {
    LNodeRef {
        prefix: ln.prefix.clone(),
        ..LNodeRef::new(ied, ld, &ln.ln_class, &ln.inst)
    }
}
