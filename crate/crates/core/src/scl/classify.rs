use std::collections::{BTreeMap, BTreeSet};

use crate::xml::{self, Element};

use super::model::{SclDocument, SclKind};
use super::SclError;

/// The content facts that decide a document's kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KindEvidence {
    pub substations: usize,
    pub ieds: usize,
    /// Some connected access point carries an IP address.
    pub configured_communication: bool,
    /// IED names allocated (through LNode references) under each substation.
    pub allocations: BTreeMap<String, BTreeSet<String>>,
    /// IED names of the connected access points of each subnetwork.
    pub subnet_members: Vec<BTreeSet<String>>,
}

impl KindEvidence {
    /// True when some subnetwork connects IEDs allocated to two different
    /// substations: the exchange pattern of a SED file.
    pub fn has_cross_substation_subnet(&self) -> bool {
        self.subnet_members.iter().any(|members| {
            self.allocations
                .values()
                .filter(|allocated| !allocated.is_disjoint(members))
                .count()
                >= 2
        })
    }

    pub fn decide(&self) -> Result<SclKind, SclError> {
        match (self.substations, self.ieds) {
            (s, 0) if s > 0 => Ok(SclKind::Ssd),
            (0, 1) if self.configured_communication => Ok(SclKind::Cid),
            (0, 1) => Ok(SclKind::Icd),
            (s, i) if s >= 2 && i > 0 && self.has_cross_substation_subnet() => Ok(SclKind::Sed),
            (s, i) if s > 0 && i > 0 => Ok(SclKind::Scd),
            (0, 0) => Err(SclError::UnclassifiableDocument(
                "no Substation and no IED section".into(),
            )),
            (_, i) => Err(SclError::UnclassifiableDocument(format!(
                "{i} IED sections without a Substation section"
            ))),
        }
    }
}

/// Classify raw document bytes by content; file extensions are not
/// consulted.
pub fn classify_kind(bytes: &[u8]) -> Result<SclKind, SclError> {
    let doc = xml::parse(bytes)?;
    if doc.root.local_name() != "SCL" {
        return Err(SclError::UnclassifiableDocument(format!(
            "root element is <{}>, expected <SCL>",
            doc.root.name
        )));
    }
    evidence_from_tree(&doc.root).decide()
}

/// Classify an in-memory model with the same rules as [`classify_kind`].
pub fn classify_model(doc: &SclDocument) -> Result<SclKind, SclError> {
    evidence_from_model(doc).decide()
}

fn evidence_from_tree(root: &Element) -> KindEvidence {
    let mut ev = KindEvidence::default();
    for child in &root.children {
        match child.local_name() {
            "Substation" => {
                ev.substations += 1;
                let name = child.attr("name").unwrap_or("").to_string();
                ev.allocations
                    .entry(name)
                    .or_default()
                    .extend(allocated_ieds(child));
            }
            "IED" => ev.ieds += 1,
            "Communication" => {
                for sn in child.children_named("SubNetwork") {
                    let mut members = BTreeSet::new();
                    for cap in sn.children_named("ConnectedAP") {
                        if let Some(ied) = cap.attr("iedName") {
                            members.insert(ied.to_string());
                        }
                        let has_ip = cap.child("Address").is_some_and(|a| {
                            a.children_named("P").any(|p| p.attr("type") == Some("IP"))
                        });
                        ev.configured_communication |= has_ip;
                    }
                    ev.subnet_members.push(members);
                }
            }
            _ => {}
        }
    }
    ev
}

fn allocated_ieds(substation: &Element) -> BTreeSet<String> {
    let mut allocated = BTreeSet::new();
    substation.walk(&mut |e| {
        if e.local_name() == "LNode" {
            if let Some(ied) = e.attr("iedName") {
                allocated.insert(ied.to_string());
            }
        }
    });
    allocated
}

fn evidence_from_model(doc: &SclDocument) -> KindEvidence {
    let mut ev = KindEvidence {
        substations: doc.substations.len(),
        ieds: doc.ieds.len(),
        ..KindEvidence::default()
    };
    for s in &doc.substations {
        // rendered so LNodes kept in unmodelled subtrees count as well
        let el = super::write::substation_el(s);
        ev.allocations
            .entry(s.name.clone())
            .or_default()
            .extend(allocated_ieds(&el));
    }
    for sn in doc.sub_networks() {
        ev.subnet_members
            .push(sn.connected_aps.iter().map(|c| c.ied_name.clone()).collect());
        ev.configured_communication |= sn.connected_aps.iter().any(|c| c.ip().is_some());
    }
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"<Header id="t"/>"#;

    fn scl(body: &str) -> Vec<u8> {
        format!(r#"<SCL xmlns="http://www.iec.ch/61850/2003/SCL">{HEADER}{body}</SCL>"#).into_bytes()
    }

    #[test]
    fn substation_only_is_ssd() {
        assert_eq!(classify_kind(&scl(r#"<Substation name="S1"/>"#)).unwrap(), SclKind::Ssd);
    }

    #[test]
    fn single_ied_with_addressed_communication_is_cid() {
        let body = r#"<Communication><SubNetwork name="SN"><ConnectedAP iedName="IED1" apName="AP1">
            <Address><P type="IP">10.0.0.1</P></Address></ConnectedAP></SubNetwork></Communication>
            <IED name="IED1"/>"#;
        assert_eq!(classify_kind(&scl(body)).unwrap(), SclKind::Cid);
    }

    #[test]
    fn single_ied_without_addresses_is_icd() {
        assert_eq!(classify_kind(&scl(r#"<IED name="IED1"/>"#)).unwrap(), SclKind::Icd);
    }

    #[test]
    fn substation_plus_ied_is_scd() {
        let body = r#"<Substation name="S1"/><IED name="A"/><IED name="B"/>"#;
        assert_eq!(classify_kind(&scl(body)).unwrap(), SclKind::Scd);
    }

    #[test]
    fn cross_substation_subnet_is_sed() {
        let body = r#"
          <Substation name="ADSC_SS1"><VoltageLevel name="66_1"><Bay name="L"><LNode iedName="PIED12" lnClass="PDIF" lnInst="1" ldInst="P"/></Bay></VoltageLevel></Substation>
          <Substation name="ADSC_SS3"><VoltageLevel name="66_1"><Bay name="L"><LNode iedName="PIED51" lnClass="PDIF" lnInst="1" ldInst="P"/></Bay></VoltageLevel></Substation>
          <Communication><SubNetwork name="SN1">
            <ConnectedAP iedName="PIED12" apName="AP1"/><ConnectedAP iedName="PIED51" apName="AP1"/>
          </SubNetwork></Communication>
          <IED name="PIED12"/><IED name="PIED51"/>"#;
        assert_eq!(classify_kind(&scl(body)).unwrap(), SclKind::Sed);
    }

    #[test]
    fn separate_subnets_stay_scd() {
        let body = r#"
          <Substation name="S1"><LNode iedName="A" lnClass="X" lnInst="1" ldInst="L"/></Substation>
          <Substation name="S2"><LNode iedName="B" lnClass="X" lnInst="1" ldInst="L"/></Substation>
          <Communication><SubNetwork name="N1"><ConnectedAP iedName="A" apName="AP"/></SubNetwork>
          <SubNetwork name="N2"><ConnectedAP iedName="B" apName="AP"/></SubNetwork></Communication>
          <IED name="A"/><IED name="B"/>"#;
        assert_eq!(classify_kind(&scl(body)).unwrap(), SclKind::Scd);
    }

    #[test]
    fn empty_or_foreign_documents_are_unclassifiable() {
        assert!(matches!(classify_kind(&scl("")), Err(SclError::UnclassifiableDocument(_))));
        assert!(matches!(
            classify_kind(&scl(r#"<IED name="A"/><IED name="B"/>"#)),
            Err(SclError::UnclassifiableDocument(_))
        ));
        assert!(matches!(classify_kind(b"<project/>"), Err(SclError::UnclassifiableDocument(_))));
        assert!(matches!(classify_kind(b"<SCL>"), Err(SclError::MalformedXml(_))));
    }
}
