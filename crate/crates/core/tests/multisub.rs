use std::collections::HashSet;

use sgml_core::multisub::{check_intersub_consistency, merge_scd, merge_ssd_sed, CollisionPolicy, MergeError};
use sgml_core::scl::{
    parse_scl, parse_scl_with, render, resolve_references, serialize_scl, Communication, Header, ParseOptions,
    SclDocument, SclKind, Substation,
};
use sgml_core::xml::{self, Element};
use sgml_testkit::build;
use sgml_testkit::fixtures::Intersub;
use sgml_testkit::gen::random_multisub;
use sgml_testkit::oracle::link_census;

fn normalized(doc: &SclDocument) -> SclDocument {
    parse_scl(&serialize_scl(doc).unwrap()).unwrap()
}

fn assert_sound(doc: &SclDocument) {
    let report = resolve_references(doc);
    assert!(report.is_consistent(), "{:?}", report.dangling().collect::<Vec<_>>());
    let root = xml::parse(render(doc).as_bytes()).unwrap().root;
    let census = link_census(&root, doc.kind);
    assert!(census.dangling.is_empty(), "{:?}", census.dangling);
    assert_eq!(census.total, report.links.len());
}

#[test]
fn single_scd_is_returned_unchanged() {
    let fx = Intersub::new("S1", "S2");
    let (merged, report) = merge_scd(std::slice::from_ref(&fx.scd_a), CollisionPolicy::Prefix).unwrap();
    assert_eq!(normalized(&merged), normalized(&fx.scd_a));
    assert!(report.renames.is_empty());
    assert_eq!(report.source_documents.len(), 1);
}

#[test]
fn subnetworks_keep_input_order() {
    let fx = Intersub::new("S1", "S2");
    let mut a = fx.scd_a.clone();
    let mut b = fx.scd_b.clone();
    a.communication.as_mut().unwrap().sub_networks[0].name = "SN_A".into();
    b.communication.as_mut().unwrap().sub_networks[0].name = "SN_B".into();
    let (merged, report) = merge_scd(&[a, b], CollisionPolicy::Prefix).unwrap();
    let names: Vec<&str> = merged.sub_networks().iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["SN_A", "SN_B"]);
    assert_eq!(merged.header.id, "S1-scd+S2-scd");
    assert_eq!(merged.header.version, "1");
    assert!(report.renames.is_empty());
    assert_sound(&merged);
}

fn with_switch(doc: &SclDocument) -> SclDocument {
    let mut d = doc.clone();
    d.ieds.push(build::switch("SW1"));
    let sn = &mut d.communication.as_mut().unwrap().sub_networks[0];
    let mut ap = build::connected_ap("SW1", "P1", None);
    ap.phys_conns.push(build::phys_conn("P1", None));
    sn.connected_aps.push(ap);
    d
}

#[test]
fn colliding_switches_are_prefixed() {
    let fx = Intersub::new("SS1", "SS2");
    let docs = [with_switch(&fx.scd_a), with_switch(&fx.scd_b)];
    let (merged, report) = merge_scd(&docs, CollisionPolicy::Prefix).unwrap();
    let names: Vec<&str> = merged.ieds.iter().map(|i| i.name.as_str()).collect();
    assert!(names.contains(&"SS1_SW1") && names.contains(&"SS2_SW1"), "{names:?}");
    assert!(!names.contains(&"SW1"));
    let renamed: Vec<(usize, &str, &str)> = report
        .renames
        .iter()
        .map(|r| (r.document, r.old_name.as_str(), r.new_name.as_str()))
        .collect();
    assert_eq!(renamed, [(0, "SW1", "SS1_SW1"), (1, "SW1", "SS2_SW1")]);
    let aps: Vec<&str> = merged
        .sub_networks()
        .iter()
        .flat_map(|s| &s.connected_aps)
        .map(|c| c.ied_name.as_str())
        .collect();
    assert!(aps.contains(&"SS1_SW1") && aps.contains(&"SS2_SW1"));
    assert_sound(&merged);
    assert_eq!(normalized(&merged), merged);

    let err = merge_scd(&docs, CollisionPolicy::Error).unwrap_err();
    assert!(matches!(err, MergeError::NameCollision { ref name, .. } if name == "SW1"));
}

#[test]
fn merge_rejects_bad_input() {
    let fx = Intersub::new("S1", "S2");
    assert!(matches!(merge_scd(&[], CollisionPolicy::Prefix), Err(MergeError::EmptyInput)));
    assert!(matches!(
        merge_scd(&[fx.scd_a.clone(), fx.ssd_b.clone()], CollisionPolicy::Prefix),
        Err(MergeError::KindMismatch { index: 1, .. })
    ));
    assert!(matches!(
        merge_scd(&[fx.scd_a.clone(), fx.scd_a.clone()], CollisionPolicy::Prefix),
        Err(MergeError::NameCollision { .. })
    ));
}

#[test]
fn sed_bay_lands_under_matching_voltage_level() {
    let fx = Intersub::new("ADSC_SS1", "ADSC_SS3");
    let (merged, report) = merge_ssd_sed(&[fx.ssd_a.clone(), fx.ssd_b.clone()], std::slice::from_ref(&fx.sed)).unwrap();
    assert_eq!(merged.kind, SclKind::Ssd);
    let vl = merged.substation("ADSC_SS1").unwrap().voltage_level("66_1").unwrap();
    let l2 = vl.bay("L2").unwrap();
    assert_eq!(l2.connectivity_nodes[0].path_name, "ADSC_SS1/66_1/L2/N1");
    assert_eq!(report.grafted_bays.len(), 1);
    assert_eq!(report.grafted_bays[0].voltage_level_name, "66_1");
    assert_sound(&merged);
    let graph = sgml_core::power::build_document_graph(&merged).unwrap();
    assert_eq!(graph.connected_components(), 1);
}

#[test]
fn no_seds_concatenates_ssds() {
    let fx = Intersub::new("S1", "S2");
    let (merged, report) = merge_ssd_sed(&[fx.ssd_a.clone(), fx.ssd_b.clone()], &[]).unwrap();
    assert_eq!(merged.substations, [fx.ssd_a.substations.clone(), fx.ssd_b.substations.clone()].concat());
    assert!(report.grafted_bays.is_empty());
}

#[test]
fn unknown_voltage_level_is_reported() {
    let fx = Intersub::new("S1", "S2");
    let mut sed = fx.sed.clone();
    sed.substations[0].voltage_levels[0].name = "99_9".into();
    assert_eq!(
        merge_ssd_sed(&[fx.ssd_a.clone(), fx.ssd_b.clone()], &[sed]).unwrap_err(),
        MergeError::NoMatchingVoltageLevel("99_9".into())
    );
}

/// The merged SCD with its single-line diagram replaced by the SED graft.
fn merged_view(fx: &Intersub) -> SclDocument {
    let (mut scd, _) = merge_scd(&[fx.scd_a.clone(), fx.scd_b.clone()], CollisionPolicy::Prefix).unwrap();
    let (ssd, _) = merge_ssd_sed(&[fx.ssd_a.clone(), fx.ssd_b.clone()], std::slice::from_ref(&fx.sed)).unwrap();
    scd.substations = ssd.substations;
    scd
}

#[test]
fn linked_substations_are_consistent() {
    let fx = Intersub::new("S-1", "S-2");
    let view = merged_view(&fx);
    assert_sound(&view);
    let report = check_intersub_consistency(&view, std::slice::from_ref(&fx.sed));
    assert!(report.valid(), "{:?}", report.errors);
}

#[test]
fn missing_protection_ied_is_named() {
    let fx = Intersub::new("S-1", "S-2");
    let mut view = merged_view(&fx);
    view.ieds.retain(|i| i.name != "PIED12");
    for sn in &mut view.communication.as_mut().unwrap().sub_networks {
        sn.connected_aps.retain(|c| c.ied_name != "PIED12");
    }
    let report = check_intersub_consistency(&view, std::slice::from_ref(&fx.sed));
    assert_eq!(report.errors.len(), 1, "{:?}", report.errors);
    let e = &report.errors[0];
    assert_eq!(e.rule_id, "intersub-ied-missing");
    assert!(e.path.contains("PIED12"), "{}", e.path);
    assert_eq!(e.path, "SED[S-1-S-2-sed]/Communication/SubNetwork[S-1_WAN]/ConnectedAP[PIED12/S1]");
}

/// Expected error count: every distinct SED IED name without an IED and a
/// connected access point in the merged tree, plus every SED terminal that
/// lands neither in the SED nor in the merged tree.
fn consistency_oracle(merged: &Element, sed: &SclDocument) -> usize {
    let mut found_ieds = HashSet::new();
    let mut found_aps = HashSet::new();
    let mut nodes = HashSet::new();
    let mut any_cyber = false;
    merged.walk(&mut |e| match e.local_name() {
        "IED" => {
            found_ieds.insert(e.attr("name").unwrap_or("").to_string());
        }
        "ConnectedAP" => {
            found_aps.insert(e.attr("iedName").unwrap_or("").to_string());
        }
        "ConnectivityNode" => {
            nodes.insert(e.attr("pathName").unwrap_or("").to_string());
        }
        _ => {}
    });
    any_cyber |= merged.children.iter().any(|c| matches!(c.local_name(), "IED" | "Communication"));
    let mut errors = 0;
    if any_cyber {
        let mut seen = HashSet::new();
        for c in sed.sub_networks().iter().flat_map(|s| &s.connected_aps) {
            if seen.insert(c.ied_name.clone()) && !(found_ieds.contains(&c.ied_name) && found_aps.contains(&c.ied_name)) {
                errors += 1;
            }
        }
    }
    let own: HashSet<&str> = sed.connectivity_node_paths().collect();
    for s in &sed.substations {
        for vl in &s.voltage_levels {
            for bay in &vl.bays {
                for ce in &bay.conducting_equipment {
                    for t in &ce.terminals {
                        let cn = t.connectivity_node.as_str();
                        if !own.contains(cn) && !nodes.contains(cn) {
                            errors += 1;
                        }
                    }
                }
            }
        }
    }
    errors
}

#[test]
fn single_deletions_match_the_consistency_oracle() {
    let fx = Intersub::new("S1", "S2");
    let root = xml::parse(render(&merged_view(&fx)).as_bytes()).unwrap().root;
    let mut paths = Vec::new();
    fn collect(el: &Element, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for (i, c) in el.children.iter().enumerate() {
            prefix.push(i);
            out.push(prefix.clone());
            collect(c, prefix, out);
            prefix.pop();
        }
    }
    collect(&root, &mut Vec::new(), &mut paths);
    let (mut checked, mut failing) = (0, 0);
    for path in paths {
        let mut mutated = root.clone();
        let mut el = &mut mutated;
        for &i in &path[..path.len() - 1] {
            el = &mut el.children[i];
        }
        el.children.remove(path[path.len() - 1]);
        let Ok(doc) = parse_scl_with(mutated.to_xml_string().as_bytes(), ParseOptions::LENIENT) else {
            continue;
        };
        let report = check_intersub_consistency(&doc, std::slice::from_ref(&fx.sed));
        assert_eq!(report.errors.len(), consistency_oracle(&mutated, &fx.sed), "deleting {path:?}");
        checked += 1;
        failing += usize::from(!report.valid());
    }
    assert!(checked > 50 && failing > 5, "{checked} {failing}");
}

#[test]
fn random_multi_substation_merges_are_sound() {
    let mut rng = sgml_testkit::rng(0x3e7);
    for _ in 0..100 {
        let fx = random_multisub(&mut rng);
        let (scd, report) = merge_scd(&fx.scds, CollisionPolicy::Prefix).unwrap();
        assert_sound(&scd);
        assert_eq!(scd.ieds.len(), fx.scds.iter().map(|d| d.ieds.len()).sum::<usize>());
        assert!(report.renames.iter().any(|r| r.old_name == "SW1"));

        let (ssd, report) = merge_ssd_sed(&fx.ssds, &fx.seds).unwrap();
        assert_sound(&ssd);
        assert_eq!(report.grafted_bays.len(), fx.sed_bay_count());

        let mut view = scd.clone();
        view.substations = ssd.substations.clone();
        assert!(check_intersub_consistency(&view, &fx.seds).valid());
    }
}

fn strip_prefixes(doc: &SclDocument) -> String {
    let mut text = render(doc);
    for i in 1..=4 {
        text = text.replace(&format!("SS{i}_"), "");
    }
    text
}

#[test]
fn incremental_merge_matches_merging_all_at_once() {
    let mut rng = sgml_testkit::rng(41);
    let mut tried = 0;
    while tried < 20 {
        let fx = random_multisub(&mut rng);
        if fx.scds.len() < 3 {
            continue;
        }
        tried += 1;
        let (all, _) = merge_scd(&fx.scds, CollisionPolicy::Prefix).unwrap();
        let (head, _) = merge_scd(&fx.scds[..2], CollisionPolicy::Prefix).unwrap();
        let mut rest = vec![head];
        rest.extend_from_slice(&fx.scds[2..]);
        let (step, _) = merge_scd(&rest, CollisionPolicy::Prefix).unwrap();
        assert_eq!(all.header.id, step.header.id);
        assert_eq!(strip_prefixes(&all), strip_prefixes(&step));
        assert_sound(&step);
    }
}

#[test]
fn merge_report_serializes() {
    let fx = Intersub::new("S1", "S2");
    let (_, mut report) = merge_ssd_sed(&[fx.ssd_a.clone(), fx.ssd_b.clone()], std::slice::from_ref(&fx.sed)).unwrap();
    report.name_sources(&["a.ssd", "b.ssd", "link.sed"]);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["sourceDocuments"][2]["name"], "link.sed");
    assert_eq!(json["graftedBays"][0]["bayName"], "L2");
}

#[test]
fn empty_ssd_merge() {
    let mut a = SclDocument::new(SclKind::Ssd, Header::new("a"));
    a.substations.push(Substation::new("A"));
    let (merged, _) = merge_ssd_sed(&[a.clone()], &[]).unwrap();
    assert_eq!(merged.substations, a.substations);
    assert!(merged.communication.as_ref().is_none_or(|c: &Communication| c.sub_networks.is_empty()));
}
