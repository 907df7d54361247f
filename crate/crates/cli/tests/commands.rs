mod common;

use std::fs;

use common::{code, json, sgml, stderr};
use sgml_core::scl::{parse_scl, serialize_scl};
use sgml_testkit::fixtures::{minimal_files, settings_xml, write_inputs, Intersub};
use sgml_testkit::rules::{SCADA_OK, THRESHOLDS_OK};
use tempfile::tempdir;

#[test]
fn valid_thresholds_pass() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("t.xml"), THRESHOLDS_OK).unwrap();
    let o = sgml(&["validate", "t.xml"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&o.stdout);
    assert_eq!(report["valid"], true);
    assert_eq!(report["files"][0]["kind"], "thresholds");
}

#[test]
fn out_of_range_port_fails_validation() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("s.xml"), SCADA_OK.replacen(r#"port="502""#, r#"port="70000""#, 1)).unwrap();
    let o = sgml(&["validate", "s.xml", "--report", "r.json"], dir.path());
    assert_eq!(code(&o), 1);
    let report = json(&fs::read(dir.path().join("r.json")).unwrap());
    assert_eq!(report["valid"], false);
    let errors = report["files"][0]["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0]["ruleId"], "scada-port-range");
    assert!(stderr(&o).contains("scada-port-range"));
}

#[test]
fn missing_and_malformed_files_are_operational_errors() {
    let dir = tempdir().unwrap();
    assert_eq!(code(&sgml(&["validate", "nope.xml"], dir.path())), 2);
    fs::write(dir.path().join("bad.xml"), "<Settings><PTOV></Settings>").unwrap();
    assert_eq!(code(&sgml(&["validate", "bad.xml"], dir.path())), 2);
    fs::write(dir.path().join("other.xml"), "<Unknown/>").unwrap();
    assert_eq!(code(&sgml(&["validate", "other.xml"], dir.path())), 2);
}

#[test]
fn kind_flag_overrides_detection() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("t.xml"), THRESHOLDS_OK).unwrap();
    let o = sgml(&["validate", "--kind", "mapping", "t.xml"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn scl_files_are_validated() {
    let dir = tempdir().unwrap();
    write_inputs(dir.path(), &Intersub::new("S1", "S2").files()).unwrap();
    let o = sgml(&["validate", "a.scd", "b.scd", "link.sed"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(fs::read(dir.path().join("a.scd")).unwrap()).unwrap();
    fs::write(dir.path().join("broken.scd"), text.replace("iedName=\"PIED12\" ldInst", "iedName=\"GHOST\" ldInst")).unwrap();
    let o = sgml(&["validate", "broken.scd"], dir.path());
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let report = json(&o.stdout);
    assert_eq!(report["files"][0]["errors"][0]["ruleId"], "scl-reference");
}

#[test]
fn merging_one_scd_is_the_identity() {
    let dir = tempdir().unwrap();
    let fx = Intersub::new("S1", "S2");
    write_inputs(dir.path(), &fx.files()).unwrap();
    let o = sgml(&["merge-scd", "a.scd"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(parse_scl(&o.stdout).unwrap(), fx.scd_a);
    assert_eq!(o.stdout, serialize_scl(&fx.scd_a).unwrap());
}

#[test]
fn merging_two_scds_writes_a_report() {
    let dir = tempdir().unwrap();
    write_inputs(dir.path(), &Intersub::new("S1", "S2").files()).unwrap();
    let o = sgml(&["merge-scd", "a.scd", "b.scd", "--out", "m"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let merged = parse_scl(&fs::read(dir.path().join("m/merged.scd")).unwrap()).unwrap();
    assert_eq!(merged.substations.len(), 2);
    let report = json(&fs::read(dir.path().join("m/merge-report.json")).unwrap());
    assert_eq!(report["sourceDocuments"][1]["name"], "b.scd");

    let o = sgml(&["merge-scd", "a.scd", "a.scd", "--collision-policy", "error"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn merging_specifications_with_interconnection() {
    let dir = tempdir().unwrap();
    let fx = Intersub::new("S1", "S2");
    for (name, doc) in [("a.ssd", &fx.ssd_a), ("b.ssd", &fx.ssd_b), ("link.sed", &fx.sed)] {
        fs::write(dir.path().join(name), serialize_scl(doc).unwrap()).unwrap();
    }
    let o = sgml(&["merge-ssd", "a.ssd", "b.ssd", "link.sed", "--out", "m"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&fs::read(dir.path().join("m/merge-report.json")).unwrap());
    assert_eq!(report["graftedBays"].as_array().unwrap().len(), 1);
}

#[test]
fn topology_of_two_nodes() {
    let dir = tempdir().unwrap();
    let ssd = r#"<?xml version="1.0"?>
<SCL xmlns="http://www.iec.ch/61850/2003/SCL"><Header id="t"/>
  <Substation name="S1"><VoltageLevel name="V1"><Bay name="B1">
    <ConductingEquipment name="CB1" type="CBR">
      <Terminal name="T1" connectivityNode="S1/V1/B1/N1" substationName="S1" voltageLevelName="V1" bayName="B1" cNodeName="N1"/>
      <Terminal name="T2" connectivityNode="S1/V1/B1/N2" substationName="S1" voltageLevelName="V1" bayName="B1" cNodeName="N2"/>
    </ConductingEquipment>
    <ConnectivityNode name="N1" pathName="S1/V1/B1/N1"/>
    <ConnectivityNode name="N2" pathName="S1/V1/B1/N2"/>
  </Bay></VoltageLevel></Substation>
</SCL>"#;
    fs::write(dir.path().join("two.ssd"), ssd).unwrap();
    let o = sgml(&["topology", "two.ssd"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = json(&o.stdout);
    assert_eq!(g["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(g["edges"].as_array().unwrap().len(), 1);

    let params = r#"<Parameters><Equipment path="CB1"><Param name="closed" unit="bool" value="0"/></Equipment></Parameters>"#;
    fs::write(dir.path().join("p.xml"), params).unwrap();
    let o = sgml(&["topology", "two.ssd", "--params", "p.xml", "--out", "t"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("t/topology.json").is_file());
    let model = json(&fs::read(dir.path().join("t/power-model.json")).unwrap());
    assert_eq!(model["devices"].as_array().unwrap().len(), 1);
}

#[test]
fn empty_scada_project() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("s.xml"), "<project><dataSources/></project>").unwrap();
    let o = sgml(&["scada", "s.xml"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(o.stdout, br#"{"dataSources":[],"dataPoints":[]}"#);
}

#[test]
fn dangling_scada_source_is_a_validation_failure() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("s.xml"), SCADA_OK.replacen(r#"dataSourceXid="DS_2""#, r#"dataSourceXid="DS_9""#, 1)).unwrap();
    assert_eq!(code(&sgml(&["scada", "s.xml"], dir.path())), 1);
}

#[test]
fn plc_extraction_writes_files() {
    let dir = tempdir().unwrap();
    let files = minimal_files();
    write_inputs(dir.path(), &files).unwrap();
    let o = sgml(&["plc", "logic.xml", "--out", "plc"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("plc/GenSync.st").is_file());
    let skip = json(&fs::read(dir.path().join("plc/skip-report.json")).unwrap());
    assert_eq!(skip["skipped"][0]["pouName"], "Interlock");
    assert_eq!(code(&sgml(&["plc", "logic.xml"], dir.path())), 2);
}

#[test]
fn ied_bundle_from_an_icd() {
    let dir = tempdir().unwrap();
    write_inputs(dir.path(), &minimal_files()).unwrap();
    let o = sgml(
        &["ied", "--scl", "ied1.icd", "--mapping", "mapping.xml", "--settings", "ied1-settings.xml", "--out", "b"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["model.xml", "controls.json", "mapping.xml", "settings.xml"] {
        assert!(dir.path().join("b/IED1").join(f).is_file(), "{f}");
    }
    let controls = json(&fs::read(dir.path().join("b/IED1/controls.json")).unwrap());
    assert_eq!(controls["reportControls"].as_array().unwrap().len(), 1);
    assert_eq!(controls["gooseControls"].as_array().unwrap().len(), 1);

    fs::write(dir.path().join("other.xml"), settings_xml("IED9", 400.0, 10.0, 1.0, false)).unwrap();
    let o = sgml(&["ied", "--scl", "ied1.icd", "--settings", "other.xml", "--out", "b"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn multiplier_outside_range_is_rejected() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("t.xml"), THRESHOLDS_OK).unwrap();
    let o = sgml(&["validate", "t.xml", "--ptoc50-multiplier", "5"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("multiplier"));
}
