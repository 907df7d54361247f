use std::collections::HashSet;

use super::model::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkKind {
    /// Terminal to connectivity node.
    Terminal,
    /// LNode allocation to an IED logical node (SCD documents only).
    LNode,
    /// Dataset entry to a data object of the owning IED.
    Fcda,
    /// Report or GOOSE control block to a dataset of the same logical node.
    DataSetRef,
    /// Connected access point to an IED access point.
    ConnectedAp,
    /// GSE address entry to a GOOSE control block.
    Gse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub kind: LinkKind,
    pub source_path: String,
    pub target: String,
    pub resolved: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReferenceReport {
    pub links: Vec<Link>,
}

impl ReferenceReport {
    pub fn dangling(&self) -> impl Iterator<Item = &Link> {
        self.links.iter().filter(|l| !l.resolved)
    }

    pub fn dangling_count(&self) -> usize {
        self.dangling().count()
    }

    pub fn is_consistent(&self) -> bool {
        self.dangling_count() == 0
    }
}

fn label(name: &str, idx: usize) -> String {
    if name.is_empty() {
        format!("#{idx}")
    } else {
        name.to_string()
    }
}

struct Walker<'a> {
    doc: &'a SclDocument,
    nodes: HashSet<&'a str>,
    links: Vec<Link>,
}

impl<'a> Walker<'a> {
    fn push(&mut self, kind: LinkKind, source_path: String, target: String, resolved: bool) {
        self.links.push(Link {
            kind,
            source_path,
            target,
            resolved,
        });
    }

    fn terminals(&mut self, owner: &str, terminals: &[Terminal]) {
        for (i, t) in terminals.iter().enumerate() {
            let resolved = self.nodes.contains(t.connectivity_node.as_str());
            self.push(
                LinkKind::Terminal,
                format!("{owner}/Terminal[{}]", label(&t.name, i)),
                t.connectivity_node.clone(),
                resolved,
            );
        }
    }

    fn lnodes(&mut self, owner: &str, lnodes: &[LNodeRef]) {
        if self.doc.kind != SclKind::Scd {
            return;
        }
        for l in lnodes {
            let resolved = self
                .doc
                .ied(&l.ied_name)
                .and_then(|ied| ied.logical_device(&l.ld_inst))
                .and_then(|ld| ld.logical_node(Some(&l.prefix), &l.ln_class, &l.ln_inst))
                .is_some();
            let target = format!("{}/{}/{}{}{}", l.ied_name, l.ld_inst, l.prefix, l.ln_class, l.ln_inst);
            self.push(LinkKind::LNode, format!("{owner}/LNode[{target}]"), target, resolved);
        }
    }

    fn substation(&mut self, s: &'a Substation) {
        let sp = format!("Substation[{}]", s.name);
        self.lnodes(&sp, &s.lnodes);
        for t in &s.power_transformers {
            let tp = format!("{sp}/PowerTransformer[{}]", t.name);
            self.lnodes(&tp, &t.lnodes);
            for w in &t.windings {
                let wp = format!("{tp}/TransformerWinding[{}]", w.name);
                self.lnodes(&wp, &w.lnodes);
                self.terminals(&wp, &w.terminals);
            }
        }
        for vl in &s.voltage_levels {
            let vp = format!("{sp}/VoltageLevel[{}]", vl.name);
            self.lnodes(&vp, &vl.lnodes);
            for bay in &vl.bays {
                let bp = format!("{vp}/Bay[{}]", bay.name);
                self.lnodes(&bp, &bay.lnodes);
                for ce in &bay.conducting_equipment {
                    let cp = format!("{bp}/ConductingEquipment[{}]", ce.name);
                    self.lnodes(&cp, &ce.lnodes);
                    self.terminals(&cp, &ce.terminals);
                }
            }
        }
    }

    fn ied(&mut self, ied: &'a Ied) {
        let ip = format!("IED[{}]", ied.name);
        for ld in ied.logical_devices() {
            let lp = format!("{ip}/LDevice[{}]", ld.inst);
            for ln in &ld.logical_nodes {
                let np = format!("{lp}/LN[{}]", ln.full_name());
                for ds in &ln.data_sets {
                    for (i, f) in ds.entries.iter().enumerate() {
                        let resolved = fcda_resolves(self.doc, ied, f);
                        let mut target = format!("{}/{}{}{}.{}", f.ld_inst, f.prefix, f.ln_class, f.ln_inst, f.do_name);
                        if !f.da_name.is_empty() {
                            target.push('.');
                            target.push_str(&f.da_name);
                        }
                        self.push(
                            LinkKind::Fcda,
                            format!("{np}/DataSet[{}]/FCDA[{i}]", ds.name),
                            target,
                            resolved,
                        );
                    }
                }
                let blocks = ln
                    .report_controls
                    .iter()
                    .map(|r| ("ReportControl", &r.name, &r.dat_set))
                    .chain(ln.goose_controls.iter().map(|g| ("GSEControl", &g.name, &g.dat_set)));
                for (tag, name, dat_set) in blocks {
                    if dat_set.is_empty() {
                        continue;
                    }
                    let resolved = ln.data_set(dat_set).is_some();
                    self.push(
                        LinkKind::DataSetRef,
                        format!("{np}/{tag}[{name}]"),
                        dat_set.clone(),
                        resolved,
                    );
                }
            }
        }
    }

    fn communication(&mut self, c: &'a Communication) {
        for sn in &c.sub_networks {
            let sp = format!("Communication/SubNetwork[{}]", sn.name);
            for cap in &sn.connected_aps {
                let cp = format!("{sp}/ConnectedAP[{}/{}]", cap.ied_name, cap.ap_name);
                let ied = self.doc.ied(&cap.ied_name);
                let resolved = ied.is_some_and(|i| i.access_point_names().any(|a| a == cap.ap_name));
                self.push(
                    LinkKind::ConnectedAp,
                    cp.clone(),
                    format!("{}/{}", cap.ied_name, cap.ap_name),
                    resolved,
                );
                for g in &cap.gse {
                    let resolved = ied
                        .and_then(|i| i.logical_device(&g.ld_inst))
                        .is_some_and(|ld| {
                            ld.logical_nodes
                                .iter()
                                .any(|ln| ln.goose_controls.iter().any(|gc| gc.name == g.cb_name))
                        });
                    self.push(
                        LinkKind::Gse,
                        format!("{cp}/GSE[{}]", g.cb_name),
                        format!("{}/{}/{}", cap.ied_name, g.ld_inst, g.cb_name),
                        resolved,
                    );
                }
            }
        }
    }
}

/// An FCDA resolves when its logical device and node exist in the owning
/// IED and the top-level data object is instantiated there or declared by
/// the node's type template.
fn fcda_resolves(doc: &SclDocument, ied: &Ied, f: &Fcda) -> bool {
    let Some(ln) = ied
        .logical_device(&f.ld_inst)
        .and_then(|ld| ld.logical_node(Some(&f.prefix), &f.ln_class, &f.ln_inst))
    else {
        return false;
    };
    let top = f.top_do();
    ln.data_object(top).is_some()
        || doc
            .data_type_templates
            .as_ref()
            .and_then(|t| t.lnode_type(&ln.ln_type))
            .is_some_and(|t| t.do_names.iter().any(|d| d == top))
}

/// Classify every cross-reference in the document as resolved or dangling.
pub fn resolve_references(doc: &SclDocument) -> ReferenceReport {
    let mut w = Walker {
        doc,
        nodes: doc.connectivity_node_paths().collect(),
        links: Vec::new(),
    };
    for s in &doc.substations {
        w.substation(s);
    }
    for ied in &doc.ieds {
        w.ied(ied);
    }
    if doc.kind != SclKind::Ssd {
        if let Some(c) = &doc.communication {
            w.communication(c);
        }
    }
    ReferenceReport { links: w.links }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_scd() -> SclDocument {
        let mut doc = SclDocument::new(SclKind::Scd, Header::new("t"));
        let mut bay = Bay::new("B1");
        bay.connectivity_nodes.push(ConnectivityNode::new("S1", "V1", "B1", "N1"));
        let mut cb = ConductingEquipment::new("CB1", "CBR");
        cb.terminals.push(Terminal::new("T1", "S1/V1/B1/N1"));
        cb.lnodes.push(LNodeRef::new("IED1", "LD0", "XCBR", "1"));
        bay.conducting_equipment.push(cb);
        let mut vl = VoltageLevel::new("V1");
        vl.bays.push(bay);
        let mut s = Substation::new("S1");
        s.voltage_levels.push(vl);
        doc.substations.push(s);

        let mut ied = Ied::new("IED1");
        ied.access_points.push(AccessPoint {
            name: "AP1".into(),
            server: Some(Server {
                logical_devices: vec![LogicalDevice {
                    inst: "LD0".into(),
                    logical_nodes: vec![LogicalNode::new("", "LLN0", ""), LogicalNode::new("", "XCBR", "1")],
                    extra: Extra::default(),
                }],
                extra: Extra::default(),
            }),
            extra: Extra::default(),
        });
        doc.ieds.push(ied);
        doc
    }

    #[test]
    fn consistent_scd_has_no_dangling_links() {
        let report = resolve_references(&minimal_scd());
        assert_eq!(report.links.len(), 2);
        assert_eq!(report.dangling_count(), 0);
    }

    #[test]
    fn missing_ied_is_reported_with_path() {
        let mut doc = minimal_scd();
        doc.substations[0].voltage_levels[0].bays[0].conducting_equipment[0].lnodes[0].ied_name = "GONE".into();
        let report = resolve_references(&doc);
        let dangling: Vec<_> = report.dangling().collect();
        assert_eq!(dangling.len(), 1);
        assert_eq!(dangling[0].kind, LinkKind::LNode);
        assert_eq!(
            dangling[0].source_path,
            "Substation[S1]/VoltageLevel[V1]/Bay[B1]/ConductingEquipment[CB1]/LNode[GONE/LD0/XCBR1]"
        );
    }

    #[test]
    fn terminal_to_unknown_node_dangles() {
        let mut doc = minimal_scd();
        doc.substations[0].voltage_levels[0].bays[0].conducting_equipment[0].terminals[0].connectivity_node =
            "S1/V1/B1/N9".into();
        let report = resolve_references(&doc);
        assert_eq!(report.dangling().next().unwrap().target, "S1/V1/B1/N9");
    }
}
