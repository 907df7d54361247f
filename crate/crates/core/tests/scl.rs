use sgml_core::scl::{
    classify_kind, parse_scl, parse_scl_with, render, resolve_references, serialize_scl, Bay, Communication,
    Header, LNodeRef, LogicalNode, ParseOptions, SclDocument, SclError, SclKind, Substation, VoltageLevel,
};
use sgml_core::xml::{self, Element};
use sgml_testkit::build::{self, connected_ap, equipment, full_templates, sub_network};
use sgml_testkit::fixtures::Intersub;
use sgml_testkit::gen::{corpus, element_count};
use sgml_testkit::oracle::link_census;

fn reparse(doc: &SclDocument) -> SclDocument {
    parse_scl(&serialize_scl(doc).unwrap()).unwrap()
}

fn minimal_scd() -> SclDocument {
    let mut doc = SclDocument::new(SclKind::Scd, Header::new("tiny"));
    let mut bay = build::bay("S1", "V1", "B1", &["N1", "N2"]);
    let mut cb = equipment("CB1", "CBR", &["S1/V1/B1/N1", "S1/V1/B1/N2"]);
    cb.lnodes.push(LNodeRef::new("IED1", "LD0", "XCBR", "1"));
    bay.conducting_equipment.push(cb);
    let mut vl = VoltageLevel::new("V1");
    vl.bays.push(bay);
    let mut s = Substation::new("S1");
    s.voltage_levels.push(vl);
    doc.substations.push(s);
    doc.ieds.push(build::ied(
        "IED1",
        build::logical_device("LD0", vec![build::ln0(), LogicalNode::new("", "XCBR", "1")]),
    ));
    doc.data_type_templates = Some(full_templates());
    doc
}

#[test]
fn minimal_ssd_parses() {
    let bytes = br#"<?xml version="1.0"?>
<SCL xmlns="http://www.iec.ch/61850/2003/SCL"><Header id="min"/>
  <Substation name="S1"><VoltageLevel name="V1"><Bay name="B1"/></VoltageLevel></Substation>
</SCL>"#;
    let doc = parse_scl(bytes).unwrap();
    assert_eq!(doc.kind, SclKind::Ssd);
    assert_eq!(doc.substations.len(), 1);
    assert_eq!(doc.substations[0].name, "S1");
    assert_eq!(reparse(&doc), doc);
}

#[test]
fn icd_keeps_logical_device_inst() {
    let ld = build::logical_device("MEAS", vec![build::ln0(), LogicalNode::new("", "MMXU", "1")]);
    let mut doc = SclDocument::new(SclKind::Icd, Header::new("icd"));
    doc.ieds.push(build::ied("IED1", ld));
    doc.data_type_templates = Some(full_templates());
    let parsed = reparse(&doc);
    assert_eq!(parsed.kind, SclKind::Icd);
    let ld = parsed.ieds[0].logical_device("MEAS").unwrap();
    assert!(ld.logical_node(None, "MMXU", "1").is_some());
}

#[test]
fn empty_substation_round_trips() {
    let mut doc = SclDocument::new(SclKind::Ssd, Header::new("e"));
    doc.substations.push(Substation::new("S1"));
    let once = reparse(&doc);
    assert_eq!(reparse(&once), once);
    assert!(once.substations[0].voltage_levels.is_empty());
}

#[test]
fn scd_with_two_ieds_round_trips() {
    let mut doc = minimal_scd();
    doc.ieds.push(build::ied("IED2", build::logical_device("LD0", vec![build::ln0()])));
    doc.communication = Some(Communication {
        sub_networks: vec![sub_network(
            "SN1",
            vec![connected_ap("IED1", "S1", Some("10.0.0.1")), connected_ap("IED2", "S1", Some("10.0.0.2"))],
        )],
        ..Communication::default()
    });
    let once = reparse(&doc);
    assert_eq!(once.ieds.len(), 2);
    assert_eq!(once.sub_networks().len(), 1);
    assert_eq!(reparse(&once), once);
}

#[test]
fn duplicate_ied_names_are_rejected() {
    let mut doc = minimal_scd();
    doc.ieds.push(doc.ieds[0].clone());
    assert!(matches!(serialize_scl(&doc), Err(SclError::InvariantViolation(_))));
    assert!(parse_scl(render(&doc).as_bytes()).is_err());
}

#[test]
fn classification_examples() {
    let ssd = br#"<SCL><Header id="a"/><Substation name="S1"/></SCL>"#;
    assert_eq!(classify_kind(ssd).unwrap(), SclKind::Ssd);

    let mut cid = SclDocument::new(SclKind::Cid, Header::new("c"));
    cid.ieds.push(build::ied("IED1", build::logical_device("LD0", vec![build::ln0()])));
    cid.communication = Some(Communication {
        sub_networks: vec![sub_network("SN", vec![connected_ap("IED1", "S1", Some("10.0.0.5"))])],
        ..Communication::default()
    });
    cid.data_type_templates = Some(full_templates());
    assert_eq!(classify_kind(&serialize_scl(&cid).unwrap()).unwrap(), SclKind::Cid);

    let fx = Intersub::new("ADSC_SS1", "ADSC_SS3");
    let bytes = serialize_scl(&fx.sed).unwrap();
    assert_eq!(classify_kind(&bytes).unwrap(), SclKind::Sed);
}

#[test]
fn minimal_scd_has_no_dangling_references() {
    let doc = minimal_scd();
    assert!(resolve_references(&doc).is_consistent());
}

#[test]
fn lnode_naming_a_missing_ied_dangles_once() {
    let mut doc = minimal_scd();
    doc.substations[0].voltage_levels[0].bays[0].conducting_equipment[0]
        .lnodes
        .push(LNodeRef::new("GHOST", "LD0", "XCBR", "1"));
    let report = resolve_references(&doc);
    let dangling: Vec<_> = report.dangling().collect();
    assert_eq!(dangling.len(), 1);
    assert_eq!(
        dangling[0].source_path,
        "Substation[S1]/VoltageLevel[V1]/Bay[B1]/ConductingEquipment[CB1]/LNode[GHOST/LD0/XCBR1]"
    );
    assert!(matches!(
        parse_scl(render(&doc).as_bytes()),
        Err(SclError::UnresolvedReference { .. })
    ));
}

#[test]
fn generated_corpus_round_trips() {
    let docs = corpus(0x5c1, 500, 50);
    let mut kinds = std::collections::BTreeSet::new();
    for doc in &docs {
        assert!(element_count(doc) <= 50);
        let bytes = serialize_scl(doc).unwrap();
        let first = parse_scl(&bytes).unwrap();
        let again = parse_scl(&serialize_scl(&first).unwrap()).unwrap();
        assert_eq!(first, again, "{}", doc.header.id);
        assert_eq!(parse_scl(&bytes).unwrap(), first);
        assert_eq!(classify_kind(&bytes).unwrap(), first.kind);
        assert_eq!(classify_kind(&serialize_scl(&first).unwrap()).unwrap(), first.kind);
        assert!(resolve_references(&first).is_consistent());
        kinds.insert(first.kind);
    }
    assert!(kinds.len() >= 4);
}

/// Every element reachable from `root`, by child index path.
fn element_paths(root: &Element) -> Vec<Vec<usize>> {
    fn go(el: &Element, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for (i, c) in el.children.iter().enumerate() {
            prefix.push(i);
            out.push(prefix.clone());
            go(c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(root, &mut Vec::new(), &mut out);
    out
}

fn without(root: &Element, path: &[usize]) -> Element {
    let mut copy = root.clone();
    let mut el = &mut copy;
    for &i in &path[..path.len() - 1] {
        el = &mut el.children[i];
    }
    el.children.remove(path[path.len() - 1]);
    copy
}

fn check_deletions(doc: &SclDocument) -> (usize, usize) {
    let root = xml::parse(render(doc).as_bytes()).unwrap().root;
    let (mut checked, mut broken) = (0, 0);
    for path in element_paths(&root) {
        let mutated = without(&root, &path);
        let Ok(parsed) = parse_scl_with(mutated.to_xml_string().as_bytes(), ParseOptions::LENIENT) else {
            continue;
        };
        let report = resolve_references(&parsed);
        let census = link_census(&mutated, parsed.kind);
        assert_eq!(report.links.len(), census.total, "links after deleting {path:?}");
        let mut ours: Vec<&str> = report.dangling().map(|l| l.target.as_str()).collect();
        let mut theirs: Vec<&str> = census.dangling.iter().map(String::as_str).collect();
        ours.sort_unstable();
        theirs.sort_unstable();
        assert_eq!(ours, theirs, "dangling after deleting {path:?}");
        checked += 1;
        broken += usize::from(!census.dangling.is_empty());
    }
    (checked, broken)
}

#[test]
fn single_deletions_match_the_walker() {
    let fx = Intersub::new("S1", "S2");
    let mut total = (0, 0);
    for doc in [&fx.scd_a, &fx.scd_b, &minimal_scd()] {
        let (c, b) = check_deletions(doc);
        total = (total.0 + c, total.1 + b);
    }
    assert!(total.0 > 100, "{total:?}");
    assert!(total.1 > 10, "{total:?}");
}

#[test]
fn corpus_deletions_match_the_walker() {
    for doc in corpus(77, 40, 50) {
        check_deletions(&doc);
    }
}

#[test]
fn bay_without_nodes_renders() {
    let mut doc = SclDocument::new(SclKind::Ssd, Header::new("b"));
    let mut vl = VoltageLevel::new("V1");
    vl.bays.push(Bay::new("B1"));
    let mut s = Substation::new("S1");
    s.voltage_levels.push(vl);
    doc.substations.push(s);
    assert_eq!(reparse(&doc).substations[0].voltage_levels[0].bays[0].name, "B1");
}
