//! Hand-built input sets.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use sgml_core::scl::{
    classify_model, serialize_scl, Communication, DataObject, DataTypeTemplates, Header, Ied, LogicalNode, SclDocument,
    SclKind, Substation, Voltage, VoltageLevel,
};

use crate::build;

/// Files of a pipeline input directory, in a fixed order.
pub type InputFiles = Vec<(String, Vec<u8>)>;

pub fn write_inputs(dir: &Path, files: &InputFiles) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn scl_bytes(doc: &SclDocument) -> Vec<u8> {
    serialize_scl(doc).expect("fixture serializes")
}

fn finish(mut doc: SclDocument) -> SclDocument {
    doc.kind = classify_model(&doc).expect("fixture classifies");
    doc
}

/// A protection and control IED: measurement, breaker, control and the
/// protection functions, with a measurement report and a trip GOOSE.
pub fn protection_ied(name: &str) -> Ied {
    let mut mmxu = LogicalNode::new("", "MMXU", "1");
    mmxu.data_objects.push(DataObject::new("PhV", &["phsA.cVal"]));
    let nodes = vec![
        LogicalNode::new("", "LPHD", "1"),
        mmxu,
        LogicalNode::new("", "XCBR", "1"),
        LogicalNode::new("", "CSWI", "1"),
        LogicalNode::new("", "PTOC", "1"),
        LogicalNode::new("", "PTOV", "1"),
        LogicalNode::new("", "PTUV", "1"),
        LogicalNode::new("", "PDOP", "1"),
    ];
    let mut zero = build::ln0();
    zero.data_sets.push(build::data_set(
        "Meas",
        vec![
            build::fcda("LD0", &nodes[1], "TotW", "MX"),
            build::fcda("LD0", &nodes[1], "PhV", "MX"),
            build::fcda("LD0", &nodes[1], "A", "MX"),
        ],
    ));
    zero.data_sets.push(build::data_set(
        "Trip",
        vec![build::fcda("LD0", &nodes[4], "Op", "ST"), build::fcda("LD0", &nodes[5], "Op", "ST")],
    ));
    zero.report_controls.push(build::report_control("urcbMeas", "Meas", Some(1000)));
    zero.goose_controls.push(build::goose_control("gcbTrip", "Trip", &format!("{name}/Trip")));
    let mut all = vec![zero];
    all.extend(nodes);
    build::ied(name, build::logical_device("LD0", all))
}

fn mac(n: usize) -> String {
    format!("01-0C-CD-01-{:02X}-{:02X}", n / 256, n % 256)
}

/// Bay `name` under `vl`: node `N1`, breaker `CB_<name>` onto the voltage
/// level busbar and the bay's own device.
fn feeder(sub: &str, vl: &str, name: &str, device: &str, ce_type: &str, far: Option<&str>) -> sgml_core::scl::Bay {
    let mut bay = build::bay(sub, vl, name, &["N1"]);
    let here = format!("{sub}/{vl}/{name}/N1");
    let bus = format!("{sub}/{vl}/BUS/N1");
    bay.conducting_equipment
        .push(build::equipment(&format!("CB_{name}"), "CBR", &[bus.as_str(), here.as_str()]));
    let mut ends = vec![here.as_str()];
    if let Some(f) = far {
        ends.push(f);
    }
    bay.conducting_equipment.push(build::equipment(device, ce_type, &ends));
    bay
}

struct EpicBay {
    vl: &'static str,
    bay: &'static str,
    device: &'static str,
    ce_type: &'static str,
    far: Option<&'static str>,
    ied: &'static str,
}

const EPIC_BAYS: &[EpicBay] = &[
    EpicBay { vl: "GEN", bay: "G1", device: "GEN1", ce_type: "GEN", far: None, ied: "GIED1" },
    EpicBay { vl: "GEN", bay: "G2", device: "GEN2", ce_type: "GEN", far: None, ied: "GIED2" },
    EpicBay { vl: "GEN", bay: "G3", device: "GEN3", ce_type: "GEN", far: None, ied: "GIED3" },
    EpicBay { vl: "GEN", bay: "GT", device: "LINE_GT", ce_type: "IFL", far: Some("EPIC/TRANS/BUS/N1"), ied: "GIED4" },
    EpicBay { vl: "TRANS", bay: "T1", device: "LINE_T1", ce_type: "IFL", far: Some("EPIC/MICRO/BUS/N1"), ied: "TIED1" },
    EpicBay { vl: "TRANS", bay: "T2", device: "LINE_T2", ce_type: "IFL", far: Some("EPIC/SMART/BUS/N1"), ied: "TIED2" },
    EpicBay { vl: "TRANS", bay: "T3", device: "LOAD_T3", ce_type: "LOAD", far: None, ied: "TIED3" },
    EpicBay { vl: "TRANS", bay: "T4", device: "MOT_T4", ce_type: "MOT", far: None, ied: "TIED4" },
    EpicBay { vl: "MICRO", bay: "M1", device: "PV_M1", ce_type: "GEN", far: None, ied: "MIED1" },
    EpicBay { vl: "MICRO", bay: "M2", device: "LOAD_M2", ce_type: "LOAD", far: None, ied: "MIED2" },
    EpicBay { vl: "SMART", bay: "S1", device: "LOAD_S1", ce_type: "LOAD", far: None, ied: "SIED1" },
    EpicBay { vl: "SMART", bay: "S2", device: "LOAD_S2", ce_type: "LOAD", far: None, ied: "SIED2" },
];

/// (subnetwork, third IP octet, switches)
const EPIC_LANS: &[(&str, u8, &[&str])] = &[
    ("GEN_LAN", 1, &["SW1", "SW2", "SW3"]),
    ("TRANS_LAN", 2, &["SW4", "SW5", "SW6"]),
    ("MICRO_LAN", 3, &["SW7", "SW8"]),
    ("SMART_LAN", 4, &["SW9", "SW10"]),
];

fn lan_of(vl: &str) -> usize {
    match vl {
        "GEN" => 0,
        "TRANS" => 1,
        "MICRO" => 2,
        _ => 3,
    }
}

fn nominal_volts(vl: &str) -> f64 {
    match vl {
        "GEN" => 400.0,
        "TRANS" => 400.0,
        _ => 230.0,
    }
}

/// Protection settings for one IED in the usual two-stage form: over- and
/// under-voltage with alarm and trip stages, time-delayed and instantaneous
/// over-current, and reverse power for generating bays.
pub fn settings_xml(ied: &str, volts: f64, amps: f64, watts: f64, reverse_power: bool) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<Settings iedName=\"{ied}\" nominalVoltage=\"{volts}\" nominalCurrent=\"{amps}\" nominalPower=\"{watts}\">"
    );
    let v = format!("{ied}.MMXU1.PhV.phsA.cVal");
    let a = format!("{ied}.MMXU1.A.phsA.cVal");
    let trip = format!("{ied}.XCBR1.Pos");
    let _ = writeln!(
        s,
        "  <PTOV instance=\"1\" monitored=\"{v}\" tripTarget=\"{trip}\">\n    <AlarmThreshold pu=\"1.1\" period=\"10\"/>\n    <TripThreshold pu=\"1.2\" period=\"2\"/>\n  </PTOV>"
    );
    let _ = writeln!(
        s,
        "  <PTUV instance=\"1\" monitored=\"{v}\" tripTarget=\"{trip}\">\n    <AlarmThreshold pu=\"0.8\" period=\"10\"/>\n    <TripThreshold pu=\"0.7\" period=\"2\"/>\n  </PTUV>"
    );
    let _ = writeln!(s, "  <PTOC type=\"51\" instance=\"1\" monitored=\"{a}\" tripTarget=\"{trip}\"/>");
    let _ = writeln!(s, "  <PTOC type=\"50\" instance=\"2\" monitored=\"{a}\" tripTarget=\"{trip}\" multiplier=\"3.5\"/>");
    if reverse_power {
        let _ = writeln!(
            s,
            "  <PDOP instance=\"1\" monitored=\"{ied}.MMXU1.TotW.mag.f\" tripTarget=\"{trip}\" epsilon=\"0.01\"/>"
        );
    }
    s.push_str("</Settings>\n");
    s
}

fn mapping_entries(out: &mut String, device: &str, ied: &str) {
    for (phys, cyber) in [
        ("Voltage.phsA", "MMXU1.PhV.phsA.cVal"),
        ("Current.phsA", "MMXU1.A.phsA.cVal"),
        ("ActivePower", "MMXU1.TotW.mag.f"),
        ("Closed", "XCBR1.Pos.stVal"),
    ] {
        let _ = writeln!(out, "  <Entry physicalAttr=\"{device}.{phys}\" cyberAttr=\"{ied}.{cyber}\"/>");
    }
}

fn scada_source(out: &mut String, n: usize, ied: &str, ip: &str) {
    let _ = writeln!(
        out,
        "    <dataSource xid=\"DS_{ied}\" name=\"{ied}\" type=\"MODBUS_IP\" updatePeriodType=\"SECONDS\" updatePeriods=\"1\" transportType=\"TCP\" host=\"{ip}\" port=\"502\">"
    );
    for (k, (name, units)) in [("Va", "VOLTS"), ("Ia", "AMPS"), ("P", "WATTS")].iter().enumerate() {
        let _ = writeln!(
            out,
            "      <dataPoint xid=\"DP_{n}_{k}\" name=\"{ied} {name}\" range=\"HOLDING_REGISTER\" offset=\"{}\" modbusDataType=\"FOUR_BYTE_FLOAT\" engineeringUnits=\"{units}\" dataSourceXid=\"DS_{ied}\" deviceName=\"{ied}\"/>",
            k * 2
        );
    }
    out.push_str("    </dataSource>\n");
}

pub const PLC_PROGRAMS: &[(&str, &str)] = &[
    (
        "GenSync",
        "IF gen_ready AND bus_live THEN\n  close_cmd := ABS(slip) < 0.1;\nEND_IF;\n",
    ),
    ("LoadShed", "shed := freq < 49.5;\n(* shed the smart home loads first *)\n"),
    ("Microgrid", "island := NOT grid_ok;\npv_limit := SEL(island, 1.0, 0.6);\n"),
    ("Tie", "tie_open := fault OR manual_open;\n"),
    ("Watchdog", "count := count + 1;\nIF count > 100 THEN count := 0; END_IF;\n"),
];

/// A PLCopen project with the given ST programs and one ladder POU.
pub fn plcopen_xml(programs: &[(&str, &str)]) -> String {
    let mut s = String::from(
        "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<project xmlns=\"http://www.plcopen.org/xml/tc6_0201\" xmlns:xhtml=\"http://www.w3.org/1999/xhtml\">\n  <fileHeader companyName=\"\" productName=\"OpenPLC\" productVersion=\"1\" creationDateTime=\"2024-01-01T00:00:00\"/>\n  <contentHeader name=\"plant\"><coordinateInfo/></contentHeader>\n  <types>\n    <dataTypes/>\n    <pous>\n",
    );
    for (name, body) in programs {
        let _ = write!(
            s,
            "      <pou name=\"{name}\" pouType=\"program\">\n        <interface>\n          <inputVars><variable name=\"in1\" address=\"%IX0.0\"><type><BOOL/></type></variable></inputVars>\n          <localVars><variable name=\"count\"><type><INT/></type></variable></localVars>\n        </interface>\n        <body><ST><xhtml:p><![CDATA[{body}]]></xhtml:p></ST></body>\n      </pou>\n"
        );
    }
    s.push_str(
        "      <pou name=\"Interlock\" pouType=\"functionBlock\">\n        <interface><inputVars><variable name=\"a\"><type><BOOL/></type></variable></inputVars></interface>\n        <body><LD/></body>\n      </pou>\n    </pous>\n  </types>\n  <instances><configurations/></instances>\n</project>\n",
    );
    s
}

/// The EPIC testbed model: one substation with generation, transmission,
/// micro-grid and smart-home voltage levels, twelve IEDs and ten switches.
pub struct Epic {
    pub scd: SclDocument,
}

impl Epic {
    pub const IEDS: usize = 12;
    pub const SWITCHES: usize = 10;

    pub fn new() -> Self {
        let mut sub = Substation::new("EPIC");
        for (vl_name, kv) in [("GEN", 0.4), ("TRANS", 0.4), ("MICRO", 0.23), ("SMART", 0.23)] {
            let mut vl = VoltageLevel::new(vl_name);
            vl.voltage = Some(Voltage::kilovolts(kv));
            vl.bays.push(build::bay("EPIC", vl_name, "BUS", &["N1"]));
            sub.voltage_levels.push(vl);
        }
        let mut ieds = Vec::new();
        for b in EPIC_BAYS {
            let mut bay = feeder("EPIC", b.vl, b.bay, b.device, b.ce_type, b.far);
            let ied = protection_ied(b.ied);
            let ld = ied.logical_device("LD0").unwrap();
            for class in ["XCBR", "CSWI", "PTOC"] {
                let ln = ld.logical_nodes.iter().find(|l| l.ln_class == class).unwrap();
                bay.lnodes.push(build::lnode(b.ied, "LD0", ln));
            }
            sub.voltage_levels[lan_of(b.vl)].bays.push(bay);
            ieds.push(ied);
        }
        let mut subnets = Vec::new();
        let mut mac_n = 0;
        for (li, (lan, octet, switches)) in EPIC_LANS.iter().enumerate() {
            let mut aps = Vec::new();
            let local: Vec<&EpicBay> = EPIC_BAYS.iter().filter(|b| lan_of(b.vl) == li).collect();
            for (k, b) in local.iter().enumerate() {
                let mut ap = build::connected_ap(b.ied, "S1", Some(&format!("10.0.{octet}.{}", k + 11)));
                mac_n += 1;
                ap.gse.push(build::gse("gcbTrip", "LD0", &mac(mac_n), &format!("{mac_n:04X}")));
                let sw = switches[k % switches.len()];
                ap.phys_conns.push(build::phys_conn("P1", Some(&format!("{}-{}", b.ied, sw))));
                aps.push(ap);
            }
            for (k, sw) in switches.iter().enumerate() {
                let mut ap = build::connected_ap(sw, "P1", Some(&format!("10.0.{octet}.{}", k + 201)));
                let mut port = 1;
                for (j, b) in local.iter().enumerate() {
                    if switches[j % switches.len()] == *sw {
                        ap.phys_conns.push(build::phys_conn(&format!("P{port}"), Some(&format!("{}-{sw}", b.ied))));
                        port += 1;
                    }
                }
                if k + 1 < switches.len() {
                    let next = switches[k + 1];
                    ap.phys_conns.push(build::phys_conn(&format!("P{port}"), Some(&format!("{sw}-{next}"))));
                    port += 1;
                }
                if k > 0 {
                    let prev = switches[k - 1];
                    ap.phys_conns.push(build::phys_conn(&format!("P{port}"), Some(&format!("{prev}-{sw}"))));
                    port += 1;
                }
                // first switch of each LAN uplinks to the first GEN_LAN switch
                if k == 0 && li > 0 {
                    ap.phys_conns.push(build::phys_conn(&format!("P{port}"), Some(&format!("SW1-{sw}"))));
                }
                if *sw == "SW1" {
                    for (_, _, others) in &EPIC_LANS[1..] {
                        ap.phys_conns.push(build::phys_conn(&format!("U{}", others[0]), Some(&format!("SW1-{}", others[0]))));
                    }
                }
                aps.push(ap);
            }
            subnets.push(build::sub_network(lan, aps));
        }
        let mut scd = SclDocument::new(SclKind::Scd, Header::new("EPIC"));
        scd.substations.push(sub);
        scd.communication = Some(Communication {
            sub_networks: subnets,
            ..Communication::default()
        });
        for (_, _, switches) in EPIC_LANS {
            for sw in *switches {
                ieds.push(build::switch(sw));
            }
        }
        scd.ieds = ieds;
        scd.data_type_templates = Some(build::full_templates());
        Epic { scd: finish(scd) }
    }

    fn ip_of(&self, ied: &str) -> String {
        self.scd
            .sub_networks()
            .iter()
            .flat_map(|s| s.connected_aps.iter())
            .find(|c| c.ied_name == ied)
            .and_then(|c| c.ip())
            .unwrap_or("127.0.0.1")
            .to_string()
    }

    pub fn parameters_xml(&self) -> String {
        let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Parameters>\n");
        for b in EPIC_BAYS {
            let path = format!("EPIC/{}/{}/{}", b.vl, b.bay, b.device);
            let _ = writeln!(s, "  <Equipment path=\"{path}\">");
            match b.ce_type {
                "GEN" => {
                    let _ = writeln!(s, "    <Param name=\"ratedPower\" unit=\"kW\" value=\"15\"/>");
                    let _ = writeln!(s, "    <Param name=\"voltageSetpoint\" unit=\"pu\" value=\"1.0\"/>");
                }
                "IFL" => {
                    let _ = writeln!(s, "    <Param name=\"resistance\" unit=\"Ohm\" value=\"0.12\"/>");
                    let _ = writeln!(s, "    <Param name=\"reactance\" unit=\"Ohm\" value=\"0.31\"/>");
                }
                _ => {
                    let _ = writeln!(s, "    <Param name=\"activePower\" unit=\"kW\" value=\"4.5\"/>");
                    let _ = writeln!(s, "    <Param name=\"reactivePower\" unit=\"kvar\" value=\"1.2\"/>");
                }
            }
            s.push_str("  </Equipment>\n");
            let _ = writeln!(
                s,
                "  <Equipment path=\"EPIC/{}/{}/CB_{}\">\n    <Param name=\"closed\" unit=\"bool\" value=\"1\"/>\n  </Equipment>",
                b.vl, b.bay, b.bay
            );
        }
        s.push_str("</Parameters>\n");
        s
    }

    pub fn mapping_xml(&self) -> String {
        let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Mapping>\n");
        for b in EPIC_BAYS {
            mapping_entries(&mut s, b.device, b.ied);
        }
        s.push_str("</Mapping>\n");
        s
    }

    pub fn scada_xml(&self) -> String {
        let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<project>\n  <dataSources>\n");
        for (n, b) in EPIC_BAYS.iter().enumerate() {
            scada_source(&mut s, n + 1, b.ied, &self.ip_of(b.ied));
        }
        s.push_str("  </dataSources>\n</project>\n");
        s
    }

    pub fn files(&self) -> InputFiles {
        let mut files: InputFiles = vec![
            ("epic.scd".into(), scl_bytes(&self.scd)),
            ("parameters.xml".into(), self.parameters_xml().into_bytes()),
            ("mapping.xml".into(), self.mapping_xml().into_bytes()),
            ("scada.xml".into(), self.scada_xml().into_bytes()),
            ("plant.plcopen.xml".into(), plcopen_xml(PLC_PROGRAMS).into_bytes()),
        ];
        for b in EPIC_BAYS {
            files.push((
                format!("{}-settings.xml", b.ied),
                settings_xml(b.ied, nominal_volts(b.vl), 20.0, 15_000.0, b.ce_type == "GEN").into_bytes(),
            ));
        }
        files
    }
}

impl Default for Epic {
    fn default() -> Self {
        Epic::new()
    }
}

/// Smallest complete input set: an SSD with one feeder, an ICD for its
/// IED, parameters, mapping, settings, a SCADA project and a PLC program.
pub fn minimal_files() -> InputFiles {
    let mut sub = Substation::new("S1");
    let mut vl = VoltageLevel::new("V1");
    vl.voltage = Some(Voltage::kilovolts(11.0));
    vl.bays.push(build::bay("S1", "V1", "BUS", &["N1"]));
    vl.bays.push(feeder("S1", "V1", "F1", "LOAD1", "LOAD", None));
    let mut src = build::bay("S1", "V1", "G1", &["N1"]);
    src.conducting_equipment
        .push(build::equipment("GRID", "IFL", &["S1/V1/G1/N1", "S1/V1/BUS/N1"]));
    vl.bays.push(src);
    sub.voltage_levels.push(vl);
    let mut ssd = SclDocument::new(SclKind::Ssd, Header::new("minimal"));
    ssd.substations.push(sub);

    let ied = protection_ied("IED1");
    let mut icd = SclDocument::new(SclKind::Icd, Header::new("IED1"));
    let mut ap = build::connected_ap("IED1", "S1", Some("192.168.1.10"));
    ap.gse.push(build::gse("gcbTrip", "LD0", &mac(1), "0001"));
    icd.communication = Some(Communication {
        sub_networks: vec![build::sub_network("StationBus", vec![ap])],
        ..Communication::default()
    });
    icd.ieds.push(ied);
    icd.data_type_templates = Some(build::full_templates());
    let icd = finish(icd);

    let mut mapping = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Mapping>\n");
    mapping_entries(&mut mapping, "LOAD1", "IED1");
    mapping.push_str("</Mapping>\n");
    let params = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Parameters>\n  <Equipment path=\"S1/V1/F1/LOAD1\">\n    <Param name=\"activePower\" unit=\"kW\" value=\"250\"/>\n  </Equipment>\n  <Equipment path=\"S1/V1/F1/CB_F1\">\n    <Param name=\"closed\" unit=\"bool\" value=\"1\"/>\n  </Equipment>\n</Parameters>\n";
    let mut scada = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<project>\n  <dataSources>\n");
    scada_source(&mut scada, 1, "IED1", "192.168.1.10");
    scada.push_str("  </dataSources>\n</project>\n");
    vec![
        ("minimal.ssd".into(), scl_bytes(&finish(ssd))),
        ("ied1.icd".into(), scl_bytes(&icd)),
        ("parameters.xml".into(), params.as_bytes().to_vec()),
        ("mapping.xml".into(), mapping.into_bytes()),
        ("ied1-settings.xml".into(), settings_xml("IED1", 11_000.0, 100.0, 1.0e6, false).into_bytes()),
        ("scada.xml".into(), scada.into_bytes()),
        ("logic.xml".into(), plcopen_xml(&PLC_PROGRAMS[..1]).into_bytes()),
    ]
}

/// Two substations linked by line `L2` in voltage level `66_1`, with
/// differential protection across it: merging units `MIED12` and `MIED51`
/// publish to the protection IEDs `PIED12` and `PIED51` of both ends.
pub struct Intersub {
    pub scd_a: SclDocument,
    pub scd_b: SclDocument,
    pub ssd_a: SclDocument,
    pub ssd_b: SclDocument,
    pub sed: SclDocument,
}

fn differential_ied(name: &str, merging_unit: bool) -> Ied {
    let class = if merging_unit { "MMXU" } else { "PDIF" };
    let node = LogicalNode::new("", class, "1");
    let mut zero = build::ln0();
    let (ds, do_name) = if merging_unit { ("SvData", "A") } else { ("DifTrip", "Op") };
    zero.data_sets.push(build::data_set(ds, vec![build::fcda("LD0", &node, do_name, "MX")]));
    zero.goose_controls.push(build::goose_control(&format!("gcb{ds}"), ds, &format!("{name}/{ds}")));
    build::ied(name, build::logical_device("LD0", vec![zero, LogicalNode::new("", "LPHD", "1"), node]))
}

fn end_substation(name: &str) -> Substation {
    let mut sub = Substation::new(name);
    let mut vl = VoltageLevel::new("66_1");
    vl.voltage = Some(Voltage::kilovolts(66.0));
    vl.bays.push(build::bay(name, "66_1", "BB", &["N1"]));
    vl.bays.push(feeder(name, "66_1", "F1", "LOAD1", "LOAD", None));
    // feeder() puts its breaker on BUS; this substation's busbar bay is BB
    for ce in &mut vl.bays[1].conducting_equipment {
        for t in &mut ce.terminals {
            t.connectivity_node = t.connectivity_node.replace("/BUS/", "/BB/");
        }
    }
    sub.voltage_levels.push(vl);
    sub
}

fn intersub_templates() -> DataTypeTemplates {
    build::templates(
        &[("LLN0", &[]), ("LPHD", &[]), ("MMXU", &[]), ("PDIF", &[])],
        false,
    )
}

impl Intersub {
    pub fn new(a: &str, b: &str) -> Self {
        let ends = [(a, "MIED12", "PIED12", 1u8), (b, "MIED51", "PIED51", 2u8)];
        let mut scds = Vec::new();
        let mut ssds = Vec::new();
        let mut all_ieds = Vec::new();
        for (sub_name, mu, prot, octet) in ends {
            let mut sub = end_substation(sub_name);
            let mu_ied = differential_ied(mu, true);
            let prot_ied = differential_ied(prot, false);
            for ied in [&mu_ied, &prot_ied] {
                let ln = ied.logical_device("LD0").unwrap().logical_nodes.last().unwrap();
                sub.voltage_levels[0].bays[1].lnodes.push(build::lnode(&ied.name, "LD0", ln));
            }
            let mut ssd = SclDocument::new(SclKind::Ssd, Header::new(format!("{sub_name}-ssd")));
            ssd.substations.push(sub.clone());
            ssds.push(finish(ssd));

            let mut scd = SclDocument::new(SclKind::Scd, Header::new(format!("{sub_name}-scd")));
            scd.substations.push(sub);
            let mut aps = Vec::new();
            for (k, ied) in [&mu_ied, &prot_ied].iter().enumerate() {
                let mut ap = build::connected_ap(&ied.name, "S1", Some(&format!("10.{octet}.0.{}", k + 1)));
                let zero = ied.logical_device("LD0").unwrap().ln0().unwrap();
                let g = &zero.goose_controls[0];
                ap.gse.push(build::gse(&g.name, "LD0", &mac(usize::from(octet) * 16 + k), &format!("{octet}{k:03}")));
                aps.push(ap);
            }
            scd.communication = Some(Communication {
                sub_networks: vec![build::sub_network(&format!("{sub_name}_Station"), aps)],
                ..Communication::default()
            });
            scd.ieds = vec![mu_ied.clone(), prot_ied.clone()];
            scd.data_type_templates = Some(intersub_templates());
            scds.push(finish(scd));
            all_ieds.push((sub_name, mu_ied, prot_ied, octet));
        }

        // electrical link: bay L2 under the first substation
        let mut link_a = Substation::new(a);
        let mut vl = VoltageLevel::new("66_1");
        let mut l2 = build::bay(a, "66_1", "L2", &["N1"]);
        let here = format!("{a}/66_1/L2/N1");
        l2.conducting_equipment
            .push(build::equipment("CB_L2", "CBR", &[format!("{a}/66_1/BB/N1").as_str(), here.as_str()]));
        l2.conducting_equipment
            .push(build::equipment("L2", "IFL", &[here.as_str(), format!("{b}/66_1/BB/N1").as_str()]));
        vl.bays.push(l2);
        link_a.voltage_levels.push(vl);
        let mut link_b = Substation::new(b);
        link_b.voltage_levels.push(VoltageLevel::new("66_1"));
        for (sub, (_, mu, prot, _)) in [&mut link_a, &mut link_b].into_iter().zip(&all_ieds) {
            for ied in [mu, prot] {
                let ln = ied.logical_device("LD0").unwrap().logical_nodes.last().unwrap();
                sub.lnodes.push(build::lnode(&ied.name, "LD0", ln));
            }
        }
        // each end's subnet also carries the far end's IEDs
        let mut subnets = Vec::new();
        for (i, (sub_name, _, _, _)) in all_ieds.iter().enumerate() {
            let mut aps = Vec::new();
            for (_, mu, prot, octet) in [&all_ieds[i], &all_ieds[1 - i]] {
                for (k, ied) in [mu, prot].into_iter().enumerate() {
                    let mut ap = build::connected_ap(&ied.name, "S1", Some(&format!("10.{octet}.0.{}", k + 1)));
                    let g = &ied.logical_device("LD0").unwrap().ln0().unwrap().goose_controls[0];
                    ap.gse.push(build::gse(&g.name, "LD0", &mac(usize::from(*octet) * 16 + k), &format!("{octet}{k:03}")));
                    aps.push(ap);
                }
            }
            subnets.push(build::sub_network(&format!("{sub_name}_WAN"), aps));
        }
        let mut sed = SclDocument::new(SclKind::Sed, Header::new(format!("{a}-{b}-sed")));
        sed.substations = vec![link_a, link_b];
        sed.communication = Some(Communication {
            sub_networks: subnets,
            ..Communication::default()
        });
        sed.ieds = all_ieds
            .iter()
            .flat_map(|(_, mu, prot, _)| [mu.clone(), prot.clone()])
            .collect();
        sed.data_type_templates = Some(intersub_templates());

        let mut scds = scds.into_iter();
        let mut ssds = ssds.into_iter();
        Intersub {
            scd_a: scds.next().unwrap(),
            scd_b: scds.next().unwrap(),
            ssd_a: ssds.next().unwrap(),
            ssd_b: ssds.next().unwrap(),
            sed: finish(sed),
        }
    }

    pub fn files(&self) -> InputFiles {
        vec![
            ("a.scd".into(), scl_bytes(&self.scd_a)),
            ("b.scd".into(), scl_bytes(&self.scd_b)),
            ("link.sed".into(), scl_bytes(&self.sed)),
        ]
    }
}
