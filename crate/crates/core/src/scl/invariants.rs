use std::collections::HashSet;
use std::fmt;
use std::net::Ipv4Addr;

use super::model::*;
use super::{classify_model, SclError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Duplicate { scope: String, name: String },
    Invalid { path: String, message: String },
}

impl Violation {
    pub(crate) fn into_parse_error(self) -> SclError {
        match self {
            Violation::Duplicate { scope, name } => SclError::DuplicateName { scope, name },
            other => SclError::InvariantViolation(other.to_string()),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Duplicate { scope, name } => write!(f, "duplicate name {name:?} in {scope}"),
            Violation::Invalid { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

#[derive(Default)]
struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn unique<'a>(&mut self, scope: &str, names: impl IntoIterator<Item = &'a str>) {
        let mut seen = HashSet::new();
        for n in names {
            if !seen.insert(n) {
                self.out.push(Violation::Duplicate {
                    scope: scope.to_string(),
                    name: n.to_string(),
                });
            }
        }
    }

    fn invalid(&mut self, path: &str, message: impl Into<String>) {
        self.out.push(Violation::Invalid {
            path: path.to_string(),
            message: message.into(),
        });
    }
}

/// Collect every type invariant the document violates, in document order.
pub fn check_invariants(doc: &SclDocument) -> Vec<Violation> {
    let mut c = Checker::default();
    if doc.header.id.trim().is_empty() {
        c.invalid("SCL/Header", "id is empty");
    }
    match classify_model(doc) {
        Ok(k) if k == doc.kind => {}
        Ok(k) => c.invalid("SCL", format!("declared kind {} but content is {k}", doc.kind)),
        Err(e) => c.invalid("SCL", e.to_string()),
    }

    c.unique("SCL/Substation", doc.substations.iter().map(|s| s.name.as_str()));
    for s in &doc.substations {
        check_substation(&mut c, s);
    }

    c.unique("SCL/IED", doc.ieds.iter().map(|i| i.name.as_str()));
    for ied in &doc.ieds {
        check_ied(&mut c, ied);
    }

    if let Some(comm) = &doc.communication {
        c.unique(
            "SCL/Communication/SubNetwork",
            comm.sub_networks.iter().map(|s| s.name.as_str()),
        );
        for sn in &comm.sub_networks {
            let scope = format!("Communication/SubNetwork[{}]", sn.name);
            let pairs: Vec<String> = sn
                .connected_aps
                .iter()
                .map(|a| format!("{}/{}", a.ied_name, a.ap_name))
                .collect();
            c.unique(&format!("{scope}/ConnectedAP"), pairs.iter().map(String::as_str));
            for cap in &sn.connected_aps {
                let path = format!("{scope}/ConnectedAP[{}/{}]", cap.ied_name, cap.ap_name);
                for (k, v) in &cap.address {
                    if matches!(k.as_str(), "IP" | "IP-SUBNET" | "IP-GATEWAY") && v.parse::<Ipv4Addr>().is_err() {
                        c.invalid(&path, format!("{k} {v:?} is not a dotted-quad address"));
                    }
                }
                for g in &cap.gse {
                    if !is_mac_address(&g.mac_address) {
                        c.invalid(
                            &format!("{path}/GSE[{}]", g.cb_name),
                            format!("MAC-Address {:?} is not six hex octets", g.mac_address),
                        );
                    }
                }
            }
        }
    }
    c.out
}

fn check_substation(c: &mut Checker, s: &Substation) {
    let sp = format!("Substation[{}]", s.name);
    c.unique(&format!("{sp}/VoltageLevel"), s.voltage_levels.iter().map(|v| v.name.as_str()));
    c.unique(
        &format!("{sp}/PowerTransformer"),
        s.power_transformers.iter().map(|t| t.name.as_str()),
    );
    for t in &s.power_transformers {
        let tp = format!("{sp}/PowerTransformer[{}]", t.name);
        if t.windings.is_empty() || t.windings.len() > 3 {
            c.invalid(&tp, format!("{} windings, expected 1 to 3", t.windings.len()));
        }
        for w in &t.windings {
            if w.terminals.len() > 2 {
                c.invalid(&tp, format!("winding {} has {} terminals", w.name, w.terminals.len()));
            }
            for term in &w.terminals {
                check_terminal(c, &tp, term);
            }
        }
    }
    for vl in &s.voltage_levels {
        let vp = format!("{sp}/VoltageLevel[{}]", vl.name);
        if let Some(v) = &vl.voltage {
            if !(v.volts.is_finite() && v.volts > 0.0) {
                c.invalid(&vp, format!("nominal voltage {} V is not positive", v.volts));
            }
        }
        c.unique(&format!("{vp}/Bay"), vl.bays.iter().map(|b| b.name.as_str()));
        for bay in &vl.bays {
            let bp = format!("{vp}/Bay[{}]", bay.name);
            c.unique(
                &format!("{bp}/ConductingEquipment"),
                bay.conducting_equipment.iter().map(|e| e.name.as_str()),
            );
            c.unique(
                &format!("{bp}/ConnectivityNode"),
                bay.connectivity_nodes.iter().map(|n| n.name.as_str()),
            );
            for node in &bay.connectivity_nodes {
                let expected = format!("{}/{}/{}/{}", s.name, vl.name, bay.name, node.name);
                if node.path_name != expected {
                    c.invalid(
                        &format!("{bp}/ConnectivityNode[{}]", node.name),
                        format!("pathName {:?} should be {expected:?}", node.path_name),
                    );
                }
            }
            for ce in &bay.conducting_equipment {
                let cp = format!("{bp}/ConductingEquipment[{}]", ce.name);
                if !(1..=2).contains(&ce.terminals.len()) {
                    c.invalid(&cp, format!("{} terminals, expected 1 or 2", ce.terminals.len()));
                }
                for term in &ce.terminals {
                    check_terminal(c, &cp, term);
                }
            }
        }
    }
}

fn check_terminal(c: &mut Checker, owner: &str, t: &Terminal) {
    if t.path_segments().is_none() {
        c.invalid(
            &format!("{owner}/Terminal[{}]", t.name),
            format!(
                "connectivityNode {:?} is not Substation/VoltageLevel/Bay/Node",
                t.connectivity_node
            ),
        );
    }
}

fn check_ied(c: &mut Checker, ied: &Ied) {
    let ip = format!("IED[{}]", ied.name);
    c.unique(&format!("{ip}/AccessPoint"), ied.access_point_names());
    c.unique(&format!("{ip}/LDevice"), ied.logical_devices().map(|l| l.inst.as_str()));
    for ld in ied.logical_devices() {
        let lp = format!("{ip}/LDevice[{}]", ld.inst);
        let keys: Vec<String> = ld
            .logical_nodes
            .iter()
            .map(|ln| format!("{}|{}|{}", ln.prefix, ln.ln_class, ln.inst))
            .collect();
        c.unique(&format!("{lp}/LN"), keys.iter().map(String::as_str));
        for ln in &ld.logical_nodes {
            let np = format!("{lp}/LN[{}]", ln.full_name());
            c.unique(&format!("{np}/DataSet"), ln.data_sets.iter().map(|d| d.name.as_str()));
            c.unique(&format!("{np}/ReportControl"), ln.report_controls.iter().map(|r| r.name.as_str()));
            c.unique(&format!("{np}/GSEControl"), ln.goose_controls.iter().map(|g| g.name.as_str()));
            for rc in &ln.report_controls {
                if rc.trigger.integrity_period != rc.integrity_period_ms.is_some() {
                    c.invalid(
                        &format!("{np}/ReportControl[{}]", rc.name),
                        "intgPd must be present exactly when the period trigger is set",
                    );
                }
            }
        }
    }
}

/// Six hexadecimal octets separated uniformly by `-` or `:`.
pub fn is_mac_address(s: &str) -> bool {
    let sep = if s.contains('-') { '-' } else { ':' };
    let parts: Vec<&str> = s.split(sep).collect();
    parts.len() == 6
        && parts
            .iter()
            .all(|p| p.len() == 2 && p.chars().all(|ch| ch.is_ascii_hexdigit()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_address_forms() {
        assert!(is_mac_address("01-0C-CD-01-00-01"));
        assert!(is_mac_address("01:0c:cd:01:00:01"));
        assert!(!is_mac_address("01-0C-CD-01-00"));
        assert!(!is_mac_address("01-0C:CD-01-00-01"));
        assert!(!is_mac_address("zz-0C-CD-01-00-01"));
    }

    #[test]
    fn duplicate_ieds_are_reported() {
        let mut doc = SclDocument::new(SclKind::Scd, Header::new("d"));
        doc.substations.push(Substation::new("S1"));
        doc.ieds.push(Ied::new("A"));
        doc.ieds.push(Ied::new("A"));
        let v = check_invariants(&doc);
        assert_eq!(
            v,
            vec![Violation::Duplicate {
                scope: "SCL/IED".into(),
                name: "A".into()
            }]
        );
    }

    #[test]
    fn kind_must_match_content() {
        let mut doc = SclDocument::new(SclKind::Scd, Header::new("d"));
        doc.substations.push(Substation::new("S1"));
        let v = check_invariants(&doc);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("declared kind SCD but content is SSD"));
    }

    #[test]
    fn report_period_consistency() {
        let mut doc = SclDocument::new(SclKind::Icd, Header::new("d"));
        let mut ln = LogicalNode::new("", "LLN0", "");
        ln.report_controls.push(ReportControlBlock {
            name: "R".into(),
            trigger: TriggerOptions {
                integrity_period: true,
                ..TriggerOptions::default()
            },
            ..ReportControlBlock::default()
        });
        let mut ied = Ied::new("I");
        ied.access_points.push(AccessPoint {
            name: "AP1".into(),
            server: Some(Server {
                logical_devices: vec![LogicalDevice {
                    inst: "LD".into(),
                    logical_nodes: vec![ln],
                    extra: Extra::default(),
                }],
                extra: Extra::default(),
            }),
            extra: Extra::default(),
        });
        doc.ieds.push(ied);
        assert_eq!(check_invariants(&doc).len(), 1);
    }
}
