//! Seeded random models. Every generator returns documents that satisfy
//! the SCL invariants and resolve all of their references.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use sgml_core::scl::{
    classify_model, render, Communication, DataObject, Header, Ied, LogicalNode, PowerTransformer, SclDocument,
    SclKind, Substation, Terminal, TransformerWinding, Voltage, VoltageLevel,
};
use sgml_core::scada::{DataPoint, DataSource, ScadaProject};
use sgml_core::xml;

use crate::build::{self, data_objects};
use crate::Rng;

const CE_TYPES: &[&str] = &["CBR", "DIS", "IFL", "LOAD", "GEN", "CTR", "VTR", "CAP"];
const FUNCTION_CLASSES: &[&str] = &["MMXU", "XCBR", "CSWI", "PTOC", "PTOV", "GGIO"];

/// Number of XML elements in the serialized document.
pub fn element_count(doc: &SclDocument) -> usize {
    xml::parse(render(doc).as_bytes())
        .map(|d| d.root.element_count())
        .unwrap_or(usize::MAX)
}

struct IedPlan {
    ied: Ied,
    /// (class, data objects used) for the templates.
    used: Vec<(&'static str, Vec<&'static str>)>,
}

/// An IED with LLN0 and up to `max_nodes` function nodes. With a function
/// node present, LLN0 carries a dataset over it and a report block; the
/// GOOSE block, when asked for, publishes the same dataset.
fn random_ied(rng: &mut Rng, name: &str, goose: bool, min_nodes: usize, max_nodes: usize) -> IedPlan {
    let mut classes: Vec<&'static str> = FUNCTION_CLASSES.to_vec();
    classes.shuffle(rng);
    let n = rng.gen_range(min_nodes..=max_nodes);
    let mut used: Vec<(&'static str, Vec<&'static str>)> = vec![("LLN0", vec!["Mod"])];
    let mut nodes = Vec::new();
    for class in classes.into_iter().take(n) {
        let mut ln = LogicalNode::new(if rng.gen_bool(0.3) { "Q0" } else { "" }, class, "1");
        let first = data_objects(class)[0].0;
        if rng.gen_bool(0.4) {
            ln.data_objects.push(DataObject::new(first, &["q"]));
        }
        used.push((class, vec![first]));
        nodes.push(ln);
    }
    let mut zero = build::ln0();
    let zero_ref = zero.clone();
    let (target, do_name) = match nodes.first() {
        Some(t) => (t, data_objects(&t.ln_class)[0].0),
        None => (&zero_ref, "Mod"),
    };
    if !nodes.is_empty() || goose {
        zero.data_sets
            .push(build::data_set("DS1", vec![build::fcda("LD0", target, do_name, "ST")]));
    }
    if !nodes.is_empty() {
        let integrity = rng.gen_bool(0.5).then(|| rng.gen_range(1..=10) * 1000);
        zero.report_controls.push(build::report_control("rcb1", "DS1", integrity));
    }
    if goose {
        zero.goose_controls.push(build::goose_control("gcb1", "DS1", &format!("{name}_G1")));
    }
    let mut all = vec![zero];
    all.extend(nodes);
    IedPlan {
        ied: build::ied(name, build::logical_device("LD0", all)),
        used,
    }
}

fn lean_templates(plans: &[&IedPlan]) -> sgml_core::scl::DataTypeTemplates {
    let mut by_class: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in plans {
        for (c, dos) in &p.used {
            let e = by_class.entry(c).or_default();
            for d in dos {
                if !e.contains(d) {
                    e.push(d);
                }
            }
        }
    }
    let spec: Vec<(&str, &[&str])> = by_class.iter().map(|(c, d)| (*c, d.as_slice())).collect();
    build::templates(&spec, true)
}

/// A small random substation: voltage levels, bays, nodes and equipment
/// wired to nodes anywhere in the substation. The total of conducting
/// equipment and transformers stays within `max_equipment`.
pub fn random_substation(rng: &mut Rng, name: &str, max_equipment: usize) -> Substation {
    let mut sub = Substation::new(name);
    let mut nodes: Vec<String> = Vec::new();
    for v in 0..rng.gen_range(1..=3) {
        let vl_name = format!("V{}", v + 1);
        let mut vl = VoltageLevel::new(&vl_name);
        vl.voltage = Some(Voltage::kilovolts([66.0, 22.0, 11.0][v % 3]));
        for b in 0..rng.gen_range(1..=3) {
            let bay_name = format!("B{}", b + 1);
            let names: Vec<String> = (0..rng.gen_range(1..=4)).map(|n| format!("N{}", n + 1)).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let bay = build::bay(name, &vl_name, &bay_name, &refs);
            nodes.extend(bay.connectivity_nodes.iter().map(|c| c.path_name.clone()));
            vl.bays.push(bay);
        }
        sub.voltage_levels.push(vl);
    }
    let total = rng.gen_range(1..=max_equipment.max(1));
    let transformers = if total >= 2 && rng.gen_bool(0.3) { 1 } else { 0 };
    if transformers == 1 {
        let windings = (0..2)
            .map(|w| TransformerWinding {
                name: format!("W{}", w + 1),
                terminals: vec![Terminal::new("T1", nodes.choose(rng).unwrap().clone())],
                ..TransformerWinding::default()
            })
            .collect();
        sub.power_transformers.push(PowerTransformer {
            name: "TR1".into(),
            windings,
            ..PowerTransformer::default()
        });
    }
    let mut counter = 0;
    for _ in 0..total - transformers {
        let v = rng.gen_range(0..sub.voltage_levels.len());
        let vl = &mut sub.voltage_levels[v];
        let b = rng.gen_range(0..vl.bays.len());
        counter += 1;
        let ce_type = *CE_TYPES.choose(rng).unwrap();
        let terms = if matches!(ce_type, "LOAD" | "GEN" | "CAP") || rng.gen_bool(0.1) { 1 } else { 2 };
        let picks: Vec<&str> = (0..terms).map(|_| nodes.choose(rng).unwrap().as_str()).collect();
        vl.bays[b]
            .conducting_equipment
            .push(build::equipment(&format!("{ce_type}{counter}"), ce_type, &picks));
    }
    sub
}

/// One substation with a single interconnect-ready voltage level `66_1`
/// and a busbar bay `BB` whose node `N1` other documents may point at.
fn small_substation(rng: &mut Rng, name: &str) -> Substation {
    let mut sub = Substation::new(name);
    let mut vl = VoltageLevel::new("66_1");
    vl.voltage = Some(Voltage::kilovolts(66.0));
    let mut bb = build::bay(name, "66_1", "BB", &["N1"]);
    let bus = format!("{name}/66_1/BB/N1");
    for i in 0..rng.gen_range(1..=2) {
        let node = format!("F{}", i + 1);
        let mut feeder = build::bay(name, "66_1", &format!("Q{}", i + 1), &[node.as_str()]);
        let here = feeder.connectivity_nodes[0].path_name.clone();
        feeder
            .conducting_equipment
            .push(build::equipment("CB1", "CBR", &[bus.as_str(), here.as_str()]));
        feeder.conducting_equipment.push(build::equipment("LD1", "LOAD", &[here.as_str()]));
        vl.bays.push(feeder);
    }
    bb.conducting_equipment.push(build::equipment("VT1", "VTR", &[bus.as_str()]));
    vl.bays.insert(0, bb);
    sub.voltage_levels.push(vl);
    sub
}

fn finish(mut doc: SclDocument) -> SclDocument {
    doc.kind = classify_model(&doc).expect("generated documents classify");
    doc
}

fn random_ssd(rng: &mut Rng, id: usize) -> SclDocument {
    let mut doc = SclDocument::new(SclKind::Ssd, Header::new(format!("ssd{id}")));
    for s in 0..rng.gen_range(1..=2) {
        doc.substations.push(random_substation(rng, &format!("S{}", s + 1), 4));
    }
    finish(doc)
}

fn random_single_ied(rng: &mut Rng, id: usize, configured: bool) -> SclDocument {
    let goose = configured && rng.gen_bool(0.5);
    let plan = random_ied(rng, &format!("IED{id}"), goose, 1, 2);
    let mut doc = SclDocument::new(SclKind::Icd, Header::new(format!("ied{id}")));
    doc.data_type_templates = Some(lean_templates(&[&plan]));
    let mut ap = build::connected_ap(&plan.ied.name, "S1", configured.then_some("10.0.0.10"));
    if configured {
        let zero = plan.ied.logical_device("LD0").and_then(|ld| ld.ln0()).unwrap();
        if let Some(g) = zero.goose_controls.first() {
            ap.gse.push(build::gse(&g.name, "LD0", "01-0C-CD-01-00-01", "0001"));
        }
    }
    doc.communication = Some(Communication {
        sub_networks: vec![build::sub_network("SN1", vec![ap])],
        ..Communication::default()
    });
    doc.ieds.push(plan.ied);
    finish(doc)
}

fn allocate(sub: &mut Substation, ied: &Ied) {
    let ld = ied.logical_device("LD0").unwrap();
    let ln = ld.logical_nodes.iter().find(|l| !l.is_ln0()).unwrap_or(&ld.logical_nodes[0]);
    let bay = sub
        .voltage_levels
        .iter_mut()
        .flat_map(|v| v.bays.iter_mut())
        .last()
        .unwrap();
    bay.lnodes.push(build::lnode(&ied.name, "LD0", ln));
}

fn random_scd(rng: &mut Rng, id: usize) -> SclDocument {
    let mut doc = SclDocument::new(SclKind::Scd, Header::new(format!("scd{id}")));
    let mut sub = random_substation(rng, "S1", 2);
    let goose = rng.gen_bool(0.5);
    let plan = random_ied(rng, "IED1", goose, 0, 2);
    allocate(&mut sub, &plan.ied);
    doc.substations.push(sub);
    doc.data_type_templates = Some(lean_templates(&[&plan]));
    doc.communication = Some(Communication {
        sub_networks: vec![build::sub_network("SN1", vec![build::connected_ap("IED1", "S1", Some("10.0.0.1"))])],
        ..Communication::default()
    });
    doc.ieds.push(plan.ied);
    finish(doc)
}

fn random_sed(rng: &mut Rng, id: usize) -> SclDocument {
    let mut doc = SclDocument::new(SclKind::Sed, Header::new(format!("sed{id}")));
    let mut a = Substation::new("SA");
    let mut vl = VoltageLevel::new("66_1");
    let mut line = build::bay("SA", "66_1", "L1", &["N1"]);
    line.conducting_equipment
        .push(build::equipment("LN1", "IFL", &["SA/66_1/L1/N1", "SB/66_1/BB/N1"]));
    vl.bays.push(line);
    a.voltage_levels.push(vl);
    let mut b = Substation::new("SB");
    let mut vl = VoltageLevel::new("66_1");
    vl.bays.push(build::bay("SB", "66_1", "BB", &["N1"]));
    b.voltage_levels.push(vl);
    let pa = random_ied(rng, "PA", false, 0, 1);
    let pb = random_ied(rng, "PB", false, 0, 1);
    allocate(&mut a, &pa.ied);
    allocate(&mut b, &pb.ied);
    doc.substations = vec![a, b];
    doc.data_type_templates = Some(lean_templates(&[&pa, &pb]));
    doc.communication = Some(Communication {
        sub_networks: vec![build::sub_network(
            "X1",
            vec![
                build::connected_ap("PA", "S1", Some("10.1.0.1")),
                build::connected_ap("PB", "S1", Some("10.1.0.2")),
            ],
        )],
        ..Communication::default()
    });
    doc.ieds = vec![pa.ied, pb.ied];
    finish(doc)
}

/// A document of the given kind with at most `max_elements` elements.
pub fn random_document(rng: &mut Rng, kind: SclKind, id: usize, max_elements: usize) -> SclDocument {
    loop {
        let doc = match kind {
            SclKind::Ssd => random_ssd(rng, id),
            SclKind::Icd => random_single_ied(rng, id, false),
            SclKind::Cid => random_single_ied(rng, id, true),
            SclKind::Scd => random_scd(rng, id),
            SclKind::Sed => random_sed(rng, id),
        };
        if element_count(&doc) <= max_elements {
            return doc;
        }
    }
}

/// A mixed corpus: kinds in rotation, contents random.
pub fn corpus(seed: u64, size: usize, max_elements: usize) -> Vec<SclDocument> {
    let kinds = [SclKind::Ssd, SclKind::Icd, SclKind::Scd, SclKind::Sed, SclKind::Cid];
    let mut rng = crate::rng(seed);
    (0..size)
        .map(|i| random_document(&mut rng, kinds[i % kinds.len()], i, max_elements))
        .collect()
}

/// Inputs for multi-substation merging: one SCD and one SSD per substation
/// plus one SED per neighbouring pair. Every substation has a switch named
/// `SW1` and a subnetwork named `StationBus`, so merging has to rename.
pub struct MultiSub {
    pub scds: Vec<SclDocument>,
    pub ssds: Vec<SclDocument>,
    pub seds: Vec<SclDocument>,
}

impl MultiSub {
    pub fn sed_bay_count(&self) -> usize {
        self.seds
            .iter()
            .flat_map(|d| d.substations.iter())
            .flat_map(|s| s.voltage_levels.iter())
            .map(|v| v.bays.len())
            .sum()
    }
}

pub fn random_multisub(rng: &mut Rng) -> MultiSub {
    let n = rng.gen_range(2..=4);
    let names: Vec<String> = (1..=n).map(|i| format!("SS{i}")).collect();
    let mut subs = Vec::new();
    let mut protection = Vec::new();
    let mut scds = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let mut sub = small_substation(rng, name);
        let plan = random_ied(rng, &format!("P{}", i + 1), true, 1, 2);
        allocate(&mut sub, &plan.ied);
        let sw = build::switch("SW1");
        let mut doc = SclDocument::new(SclKind::Scd, Header::new(format!("{name}-scd")));
        doc.substations.push(sub.clone());
        doc.data_type_templates = Some(lean_templates(&[&plan]));
        let mut ap = build::connected_ap(&plan.ied.name, "S1", Some(&format!("10.{}.0.1", i + 1)));
        ap.gse.push(build::gse("gcb1", "LD0", &format!("01-0C-CD-01-00-{:02X}", i + 1), &format!("{:04X}", i + 1)));
        ap.phys_conns.push(build::phys_conn("P1", Some(&format!("{name}-c1"))));
        let mut sw_ap = build::connected_ap("SW1", "P1", None);
        sw_ap.phys_conns.push(build::phys_conn("P1", Some(&format!("{name}-c1"))));
        doc.communication = Some(Communication {
            sub_networks: vec![build::sub_network("StationBus", vec![ap, sw_ap])],
            ..Communication::default()
        });
        doc.ieds = vec![plan.ied.clone(), sw];
        scds.push(finish(doc));
        subs.push(sub);
        protection.push(plan);
    }
    let ssds = subs
        .iter()
        .map(|s| {
            let mut d = SclDocument::new(SclKind::Ssd, Header::new(format!("{}-ssd", s.name)));
            d.substations.push(s.clone());
            d
        })
        .collect();
    let mut seds = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (&names[i], &names[i + 1]);
        let mut sa = Substation::new(a);
        let mut vl = VoltageLevel::new("66_1");
        let bays = rng.gen_range(1..=2);
        for k in 0..bays {
            let bay_name = format!("L{}{}", i + 1, k + 1);
            let mut line = build::bay(a, "66_1", &bay_name, &["N1"]);
            let here = format!("{a}/66_1/{bay_name}/N1");
            line.conducting_equipment
                .push(build::equipment("CB1", "CBR", &[format!("{a}/66_1/BB/N1").as_str(), here.as_str()]));
            line.conducting_equipment
                .push(build::equipment("LN1", "IFL", &[here.as_str(), format!("{b}/66_1/BB/N1").as_str()]));
            vl.bays.push(line);
        }
        sa.voltage_levels.push(vl);
        let mut sb = Substation::new(b);
        sb.voltage_levels.push(VoltageLevel::new("66_1"));
        let (pa, pb) = (&protection[i], &protection[i + 1]);
        allocate_top(&mut sa, &pa.ied);
        allocate_top(&mut sb, &pb.ied);
        let mut doc = SclDocument::new(SclKind::Sed, Header::new(format!("{a}-{b}-sed")));
        doc.substations = vec![sa, sb];
        doc.data_type_templates = Some(lean_templates(&[pa, pb]));
        doc.communication = Some(Communication {
            sub_networks: vec![build::sub_network(
                &format!("X{}", i + 1),
                vec![
                    build::connected_ap(&pa.ied.name, "S1", Some(&format!("10.{}.0.1", i + 1))),
                    build::connected_ap(&pb.ied.name, "S1", Some(&format!("10.{}.0.1", i + 2))),
                ],
            )],
            ..Communication::default()
        });
        doc.ieds = vec![pa.ied.clone(), pb.ied.clone()];
        seds.push(finish(doc));
    }
    MultiSub { scds, ssds, seds }
}

fn allocate_top(sub: &mut Substation, ied: &Ied) {
    let ln = ied
        .logical_device("LD0")
        .and_then(|ld| ld.logical_nodes.iter().find(|l| !l.is_ln0()))
        .unwrap();
    sub.lnodes.push(build::lnode(&ied.name, "LD0", ln));
}

const HOSTS: &[&str] = &["scada-gw", "rtu.local", "plc-1.example.net"];
const NAMES: &[&str] = &["Va", "Ia", "P & Q", "Breaker <1>", "f \"Hz\""];

/// A valid SCADA project with up to `max_sources` sources and
/// `max_points` points in total.
pub fn random_scada_project(rng: &mut Rng, max_sources: usize, max_points: usize) -> ScadaProject {
    let n = rng.gen_range(0..=max_sources);
    let mut project = ScadaProject::default();
    let mut budget = if n == 0 { 0 } else { rng.gen_range(0..=max_points) };
    let mut point_id = 0;
    for i in 0..n {
        let mut extra = BTreeMap::new();
        if rng.gen_bool(0.3) {
            extra.insert("slaveId".to_string(), rng.gen_range(1..=247).to_string());
        }
        let host = if rng.gen_bool(0.7) {
            format!("10.{}.{}.{}", rng.gen_range(0..=255), rng.gen_range(0..=255), rng.gen_range(1..=254))
        } else {
            HOSTS.choose(rng).unwrap().to_string()
        };
        let name = format!("IED{}", i + 1);
        let take = if i + 1 == n { budget } else { rng.gen_range(0..=budget) };
        budget -= take;
        let data_points = (0..take)
            .map(|_| {
                point_id += 1;
                DataPoint {
                    xid: format!("DP_{point_id}"),
                    name: format!("{} {point_id}", NAMES.choose(rng).unwrap()),
                    range: ["HOLDING_REGISTER", "INPUT_REGISTER", "COIL_STATUS"].choose(rng).unwrap().to_string(),
                    offset: rng.gen_range(0..=65535),
                    modbus_data_type: ["FOUR_BYTE_FLOAT", "TWO_BYTE_INT_UNSIGNED", "BINARY"].choose(rng).unwrap().to_string(),
                    engineering_units: ["VOLTS", "AMPS", "WATTS", ""].choose(rng).unwrap().to_string(),
                    data_source_xid: format!("DS_{}", i + 1),
                    device_name: name.clone(),
                    extra: BTreeMap::new(),
                }
            })
            .collect();
        project.data_sources.push(DataSource {
            xid: format!("DS_{}", i + 1),
            name,
            source_type: "MODBUS_IP".into(),
            update_period_type: ["MILLISECONDS", "SECONDS", "MINUTES"].choose(rng).unwrap().to_string(),
            update_periods: rng.gen_range(1..=1000),
            transport_type: ["TCP", "UDP"].choose(rng).unwrap().to_string(),
            host,
            port: rng.gen_range(1..=65535),
            extra,
            data_points,
        });
    }
    project
}

/// A piecewise-constant signal: `(time, value)` steps. Steps fall on a
/// 10 ms grid shifted by half a millisecond, values come from `levels`.
pub fn step_signal(rng: &mut Rng, steps: usize, max_gap_steps: u32, levels: &[f64]) -> Vec<(f64, f64)> {
    let mut k: u64 = 0;
    (0..steps)
        .map(|i| {
            if i > 0 {
                k += u64::from(rng.gen_range(1..=max_gap_steps));
            }
            (k as f64 * 0.01 + 0.0005, *levels.choose(rng).unwrap())
        })
        .collect()
}
