use proptest::prelude::*;
use rand::Rng as _;
use sgml_core::ied::{
    evaluate_protection, events_to_jsonl, generate_ied_config, parse_mapping, parse_settings, validate_mapping,
    CyberPhysicalMapping, EventKind, IedError, MappingEntry, Measurement, ProtectionClass, ProtectionFunction,
    ProtectionSettings, ThresholdPair,
};
use sgml_core::power::{merge_parameters, ParameterSpec};
use sgml_core::scl::{Header, SclDocument, SclKind, Substation, VoltageLevel};
use sgml_testkit::build::{self, equipment, full_templates};
use sgml_testkit::fixtures::{protection_ied, settings_xml};
use sgml_testkit::gen::step_signal;
use sgml_testkit::oracle::{dense_protection, same_events};

const VOLTS: f64 = 400.0;

fn icd() -> SclDocument {
    let mut doc = SclDocument::new(SclKind::Icd, Header::new("IED1"));
    doc.ieds.push(protection_ied("IED1"));
    doc.data_type_templates = Some(full_templates());
    doc
}

fn mapping() -> CyberPhysicalMapping {
    parse_mapping(
        br#"<Mapping>
  <Entry physicalAttr="Load0.Voltage.phsA" cyberAttr="IED1.MMXU1.PhV.phsA.cVal"/>
  <Entry physicalAttr="Load0.Current.phsA" cyberAttr="IED1.MMXU1.A.phsA.cVal"/>
  <Entry physicalAttr="Load0.ActivePower" cyberAttr="IED1.MMXU1.TotW.mag.f"/>
</Mapping>"#,
    )
    .unwrap()
}

fn ptov_only() -> ProtectionSettings {
    let mut s = parse_settings(settings_xml("IED1", VOLTS, 100.0, 1e6, false).as_bytes()).unwrap();
    s.functions.retain(|f| f.class == ProtectionClass::Ptov);
    s
}

fn voltage(samples: &[(f64, f64)]) -> Vec<Measurement> {
    samples
        .iter()
        .map(|&(t, pu)| Measurement::new(t, "Load0.Voltage.phsA", pu * VOLTS))
        .collect()
}

fn kinds_at(events: &[sgml_core::ied::ProtectionEvent]) -> Vec<(f64, EventKind)> {
    events.iter().map(|e| (e.timestamp, e.kind)).collect()
}

#[test]
fn trip_at_two_seconds_for_1_25_pu() {
    let ev = evaluate_protection(&ptov_only(), &voltage(&[(0.0, 1.25), (30.0, 1.25)]), &mapping()).unwrap();
    assert_eq!(kinds_at(&ev), vec![(2.0, EventKind::Trip)]);
    assert_eq!(ev[0].target.as_deref(), Some("IED1.XCBR1.Pos"));
    assert_eq!(ev[0].class, ProtectionClass::Ptov);
}

#[test]
fn nominal_voltage_is_quiet() {
    let stream: Vec<(f64, f64)> = (0..600).map(|i| (i as f64 * 0.1, 1.0)).collect();
    assert!(evaluate_protection(&ptov_only(), &voltage(&stream), &mapping())
        .unwrap()
        .is_empty());
}

#[test]
fn alarm_only_for_1_15_pu_held_twelve_seconds() {
    let ev = evaluate_protection(&ptov_only(), &voltage(&[(0.0, 1.15), (12.0, 1.0)]), &mapping()).unwrap();
    assert_eq!(kinds_at(&ev), vec![(10.0, EventKind::Alarm)]);
    assert_eq!(ev[0].target, None);
    assert_eq!(
        events_to_jsonl(&ev),
        "{\"t\":10.0,\"ied\":\"IED1\",\"fn\":\"PTOV\",\"inst\":1,\"kind\":\"ALARM\",\"target\":null}\n"
    );
}

#[test]
fn threshold_table_is_parsed() {
    let s = parse_settings(settings_xml("IED1", VOLTS, 100.0, 1e6, true).as_bytes()).unwrap();
    let get = |c: ProtectionClass| s.functions.iter().find(|f| f.class == c).unwrap();
    let pair = |value, period_seconds| ThresholdPair { value, period_seconds };
    assert_eq!(get(ProtectionClass::Ptov).alarm, Some(pair(1.1, 10.0)));
    assert_eq!(get(ProtectionClass::Ptov).trip, pair(1.2, 2.0));
    assert_eq!(get(ProtectionClass::Ptuv).alarm, Some(pair(0.8, 10.0)));
    assert_eq!(get(ProtectionClass::Ptuv).trip, pair(0.7, 2.0));
    assert_eq!(get(ProtectionClass::Ptoc51).trip.value, 1.05);
    assert_eq!(get(ProtectionClass::Ptoc50).trip.value, 3.5);
    assert_eq!(get(ProtectionClass::Pdop).trip.value, 0.01);

    let empty = parse_settings(br#"<Settings iedName="IED1"/>"#).unwrap();
    assert!(empty.functions.is_empty());
}

/// Function settings and the levels a random signal draws from.
fn class_case(class: ProtectionClass) -> (ProtectionFunction, Vec<f64>, u32) {
    let pair = |value, period_seconds| ThresholdPair { value, period_seconds };
    let (alarm, trip, levels, gap) = match class {
        ProtectionClass::Ptoc50 => (None, pair(3.5, 0.0), vec![0.5, 1.0, 3.4, 3.5, 3.6, 5.0], 60),
        ProtectionClass::Ptoc51 => (None, pair(1.05, 1.0), vec![0.9, 1.0, 1.04, 1.05, 1.1, 2.0], 150),
        ProtectionClass::Ptov => (
            Some(pair(1.1, 10.0)),
            pair(1.2, 2.0),
            vec![1.0, 1.05, 1.1, 1.15, 1.2, 1.3],
            1200,
        ),
        ProtectionClass::Ptuv => (
            Some(pair(0.8, 10.0)),
            pair(0.7, 2.0),
            vec![1.0, 0.85, 0.8, 0.75, 0.7, 0.5],
            1200,
        ),
        ProtectionClass::Pdop => (None, pair(0.01, 0.0), vec![0.5, 0.0, -0.005, -0.01, -0.02, -0.5], 60),
    };
    let f = ProtectionFunction {
        class,
        instance: 1,
        alarm,
        trip,
        monitored: "IED1.MMXU1.X".into(),
        trip_target: None,
    };
    (f, levels, gap)
}

#[test]
fn engine_matches_dense_sampling() {
    let mut rng = sgml_testkit::rng(0xd3);
    for class in ProtectionClass::ALL {
        let (f, levels, gap) = class_case(class);
        let settings = ProtectionSettings {
            ied_name: "IED1".into(),
            nominal_current: Some(1.0),
            nominal_voltage: Some(1.0),
            nominal_power: Some(1.0),
            functions: vec![f.clone()],
        };
        let map = CyberPhysicalMapping {
            entries: vec![MappingEntry::new("Dev.X", "IED1.MMXU1.X")],
        };
        let mut with_events = 0;
        for _ in 0..1000 {
            let steps = rng.gen_range(1..=8);
            let signal = step_signal(&mut rng, steps, gap, &levels);
            let stream: Vec<Measurement> = signal.iter().map(|&(t, v)| Measurement::new(t, "Dev.X", v)).collect();
            let got = kinds_at(&evaluate_protection(&settings, &stream, &map).unwrap());
            let horizon = signal.last().unwrap().0 + 12.0;
            let want = dense_protection(&f, &signal, horizon);
            assert!(
                same_events(&got, &want, 0.001),
                "{class}: {signal:?}\nengine {got:?}\noracle {want:?}"
            );
            with_events += usize::from(!got.is_empty());
        }
        assert!(with_events > 50, "{class}: only {with_events} signals fired");
    }
}

fn arb_signal() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1u32..1500, 0.5f64..1.5), 1..8).prop_map(|steps| {
        let mut t = 0.0;
        steps
            .into_iter()
            .map(|(gap, v)| {
                let out = (t, v);
                t += f64::from(gap) * 0.01;
                out
            })
            .collect()
    })
}

fn voltage_settings() -> ProtectionSettings {
    let mut s = parse_settings(settings_xml("IED1", VOLTS, 100.0, 1e6, false).as_bytes()).unwrap();
    s.functions
        .retain(|f| matches!(f.class, ProtectionClass::Ptov | ProtectionClass::Ptuv));
    s
}

proptest! {
    #[test]
    fn events_are_ordered_and_deterministic(signal in arb_signal()) {
        let s = voltage_settings();
        let stream = voltage(&signal);
        let a = evaluate_protection(&s, &stream, &mapping()).unwrap();
        let b = evaluate_protection(&s, &stream, &mapping()).unwrap();
        prop_assert_eq!(&a, &b);
        for w in a.windows(2) {
            prop_assert!(w[0].timestamp <= w[1].timestamp);
        }
        if let Some(e) = a.first() {
            prop_assert!(e.timestamp >= signal[0].0);
        }
    }

    #[test]
    fn per_unit_scaling_is_invisible(signal in arb_signal(), factor in 0.01f64..1000.0) {
        let s = voltage_settings();
        let avoid = [0.7, 0.8, 1.1, 1.2];
        prop_assume!(signal.iter().all(|(_, v)| avoid.iter().all(|a| (v - a).abs() > 1e-6)));
        let mut scaled = s.clone();
        scaled.nominal_voltage = Some(VOLTS * factor);
        let stream = voltage(&signal);
        let scaled_stream: Vec<Measurement> = stream
            .iter()
            .map(|m| Measurement::new(m.timestamp, m.physical_attr.clone(), m.value * factor))
            .collect();
        prop_assert_eq!(
            evaluate_protection(&s, &stream, &mapping()).unwrap(),
            evaluate_protection(&scaled, &scaled_stream, &mapping()).unwrap()
        );
    }

    #[test]
    fn alarm_band_never_trips(signal in arb_signal()) {
        let band: Vec<(f64, f64)> = signal
            .iter()
            .map(|&(t, v)| (t, if v >= 1.0 { 1.1 + (v - 1.0) * 0.19 } else { 0.71 + (v - 0.5) * 0.18 }))
            .collect();
        let ev = evaluate_protection(&voltage_settings(), &voltage(&band), &mapping()).unwrap();
        prop_assert!(ev.iter().all(|e| e.kind == EventKind::Alarm));
    }

    #[test]
    fn trips_follow_a_full_period(signal in arb_signal()) {
        let s = voltage_settings();
        let ev = evaluate_protection(&s, &voltage(&signal), &mapping()).unwrap();
        for e in ev.iter().filter(|e| e.kind == EventKind::Trip) {
            let f = s.functions.iter().find(|f| f.class == e.class).unwrap();
            let start = e.timestamp - f.trip.period_seconds;
            let held = signal
                .iter()
                .enumerate()
                .filter(|(i, (t, _))| signal.get(i + 1).is_none_or(|n| n.0 > start + 1e-9) && *t < e.timestamp)
                .all(|(_, (_, v))| f.class.violates(*v, f.trip.value));
            prop_assert!(held, "{:?}", e);
        }
    }
}

#[test]
fn unmapped_monitored_attribute_is_an_error() {
    let err = evaluate_protection(&ptov_only(), &voltage(&[(0.0, 1.0)]), &CyberPhysicalMapping::default()).unwrap_err();
    assert!(matches!(err, IedError::UnmappedAttribute(_)));
}

#[test]
fn phase_voltage_mapping_has_three_entries() {
    let map = parse_mapping(
        br#"<Mapping>
  <Entry physicalAttr="Load0.Voltage.phsA" cyberAttr="IED1.MMXU.PhV.phsA.cVal"/>
  <Entry physicalAttr="Load0.Voltage.phsB" cyberAttr="IED1.MMXU.PhV.phsB.cVal"/>
  <Entry physicalAttr="Load0.Voltage.phsC" cyberAttr="IED1.MMXU.PhV.phsC.cVal"/>
</Mapping>"#,
    )
    .unwrap();
    assert_eq!(map.entries.len(), 3);
    assert_eq!(map.entries[1].device(), "Load0");
    assert_eq!(map.entries[1].ied(), "IED1");
    assert!(parse_mapping(b"<Mapping/>").unwrap().entries.is_empty());
    let dup = parse_mapping(
        br#"<Mapping><Entry physicalAttr="L.V" cyberAttr="I.M.A"/><Entry physicalAttr="L.V" cyberAttr="I.M.B"/></Mapping>"#,
    );
    assert_eq!(dup.unwrap_err(), IedError::DuplicateAttr("L.V".into()));
}

fn power_model() -> sgml_core::power::PowerSystemModel {
    let mut ssd = SclDocument::new(SclKind::Ssd, Header::new("p"));
    let mut bay = build::bay("S1", "V1", "F1", &["N1"]);
    bay.conducting_equipment.push(equipment("Load0", "LOAD", &["S1/V1/F1/N1"]));
    let mut vl = VoltageLevel::new("V1");
    vl.bays.push(bay);
    let mut s = Substation::new("S1");
    s.voltage_levels.push(vl);
    ssd.substations.push(s);
    merge_parameters(&ssd, &ParameterSpec::default()).unwrap()
}

#[test]
fn mapping_validation() {
    let model = power_model();
    assert!(validate_mapping(&mapping(), &icd(), &model).valid());

    let mut bad = mapping();
    bad.entries[0].cyber_attr = "IED1.MMXU99.PhV.phsA.cVal".into();
    let report = validate_mapping(&bad, &icd(), &model);
    assert_eq!(report.errors.len(), 1);
    assert_eq!(report.errors[0].rule_id, "mapping-cyber-target");
    assert_eq!(report.errors[0].path, "/Mapping/Entry[1]/@cyberAttr");
}

#[test]
fn one_corrupted_entry_gives_one_error() {
    let model = power_model();
    let mut rng = sgml_testkit::rng(9);
    for _ in 0..200 {
        let mut map = mapping();
        let i = rng.gen_range(0..map.entries.len());
        let e = &mut map.entries[i];
        match rng.gen_range(0..4) {
            0 => e.physical_attr = e.physical_attr.replacen("Load0", "Ghost", 1),
            1 => e.cyber_attr = e.cyber_attr.replacen("IED1", "IED9", 1),
            2 => e.cyber_attr = e.cyber_attr.replacen("MMXU1", "MMXU7", 1),
            _ => e.cyber_attr = e.cyber_attr.replacen(".A.", ".Bogus.", 1).replacen(".PhV.", ".Bogus.", 1).replacen("TotW", "Bogus", 1),
        }
        let report = validate_mapping(&map, &icd(), &model);
        assert_eq!(report.errors.len(), 1, "{map:?}");
        assert!(report.errors[0].path.starts_with(&format!("/Mapping/Entry[{}]", i + 1)));
    }
}

#[test]
fn config_for_ptov_only_settings() {
    let mut map = mapping();
    map.entries.truncate(1);
    let cfg = generate_ied_config(&icd(), &map, &ptov_only()).unwrap();
    assert_eq!(cfg.settings.functions.len(), 1);
    assert_eq!(cfg.mapping.entries.len(), 1);
    assert_eq!(cfg.server_model.ieds.len(), 1);
}

#[test]
fn config_carries_both_control_block_kinds() {
    let cfg = generate_ied_config(&icd(), &mapping(), &ptov_only()).unwrap();
    assert_eq!(cfg.controls.report_controls.len(), 1);
    assert_eq!(cfg.controls.goose_controls.len(), 1);
    assert!(!cfg.controls.report_controls[0].data_set.is_empty());
    let files = cfg.bundle_files().unwrap();
    let names: Vec<&str> = files.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, ["model.xml", "controls.json", "mapping.xml", "settings.xml"]);
    let controls = std::str::from_utf8(&files[1].1).unwrap();
    assert!(controls.contains("urcbMeas") && controls.contains("gcbTrip"));
}

#[test]
fn settings_for_another_ied_are_inconsistent() {
    let mut s = ptov_only();
    s.ied_name = "IED7".into();
    assert!(matches!(
        generate_ied_config(&icd(), &mapping(), &s),
        Err(IedError::InconsistentInputs(_))
    ));
}

