//! End-to-end acceptance checks, one PASS/FAIL line each.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng as _;
use sgml_core::ied::{
    evaluate_protection, parse_mapping, parse_settings, EventKind, Measurement, MappingEntry, CyberPhysicalMapping,
    ProtectionClass, ProtectionFunction, ProtectionSettings, ThresholdPair,
};
use sgml_core::multisub::{merge_scd, merge_ssd_sed, CollisionPolicy};
use sgml_core::power::{build_topology_graph, SwitchState};
use sgml_core::scada::{parse_scada_xml, scada_from_json, scada_to_json, ScadaProject};
use sgml_core::scl::{classify_kind, parse_scl, render, resolve_references, serialize_scl, SclDocument, Substation};
use sgml_core::validate::{list_rules, validate_proprietary, DocumentKind, Severity};
use sgml_core::xml;
use sgml_testkit::fixtures::{settings_xml, write_inputs, Epic};
use sgml_testkit::gen::{corpus, element_count, random_multisub, random_scada_project, random_substation, step_signal};
use sgml_testkit::oracle::{dense_protection, island_count, link_census, same_events};
use sgml_testkit::rules::rule_cases;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scl_round_trip() -> Outcome {
    let start = Instant::now();
    let docs = corpus(0xacc1, 500, 50);
    for doc in &docs {
        ensure(element_count(doc) <= 50, || format!("{} exceeds 50 elements", doc.header.id))?;
        let bytes = serialize_scl(doc).map_err(|e| e.to_string())?;
        let first = parse_scl(&bytes).map_err(|e| format!("{}: {e}", doc.header.id))?;
        let again = parse_scl(&serialize_scl(&first).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(first == again, || format!("{} changes on a second round trip", doc.header.id))?;
        ensure(classify_kind(&bytes).ok() == Some(first.kind), || format!("{} changes kind", doc.header.id))?;
        ensure(resolve_references(&first).is_consistent(), || format!("{} has dangling references", doc.header.id))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!("{} documents in {:.2?}", docs.len(), took))
}

fn class_case(class: ProtectionClass) -> (ProtectionFunction, Vec<f64>, u32) {
    let pair = |value, period_seconds| ThresholdPair { value, period_seconds };
    let (alarm, trip, levels, gap) = match class {
        ProtectionClass::Ptoc50 => (None, pair(3.5, 0.0), vec![0.5, 1.0, 3.4, 3.5, 3.6, 5.0], 60),
        ProtectionClass::Ptoc51 => (None, pair(1.05, 1.0), vec![0.9, 1.0, 1.04, 1.05, 1.1, 2.0], 150),
        ProtectionClass::Ptov => (Some(pair(1.1, 10.0)), pair(1.2, 2.0), vec![1.0, 1.05, 1.1, 1.15, 1.2, 1.3], 1200),
        ProtectionClass::Ptuv => (Some(pair(0.8, 10.0)), pair(0.7, 2.0), vec![1.0, 0.85, 0.8, 0.75, 0.7, 0.5], 1200),
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

fn protection_oracle() -> Outcome {
    let mut rng = sgml_testkit::rng(0xacc2);
    let map = CyberPhysicalMapping {
        entries: vec![MappingEntry::new("Dev.X", "IED1.MMXU1.X")],
    };
    let mut fired = Vec::new();
    for class in ProtectionClass::ALL {
        let (f, levels, gap) = class_case(class);
        let settings = ProtectionSettings {
            ied_name: "IED1".into(),
            nominal_current: Some(1.0),
            nominal_voltage: Some(1.0),
            nominal_power: Some(1.0),
            functions: vec![f.clone()],
        };
        let mut with_events = 0;
        for _ in 0..1000 {
            let steps = rng.gen_range(1..=8);
            let signal = step_signal(&mut rng, steps, gap, &levels);
            let stream: Vec<Measurement> = signal.iter().map(|&(t, v)| Measurement::new(t, "Dev.X", v)).collect();
            let events = evaluate_protection(&settings, &stream, &map).map_err(|e| e.to_string())?;
            let got: Vec<(f64, EventKind)> = events.iter().map(|e| (e.timestamp, e.kind)).collect();
            let want = dense_protection(&f, &signal, signal.last().unwrap().0 + 12.0);
            ensure(same_events(&got, &want, 0.001), || {
                format!("{class}: {signal:?} engine {got:?} oracle {want:?}")
            })?;
            with_events += usize::from(!got.is_empty());
        }
        ensure(with_events > 50, || format!("{class}: only {with_events} signals produced events"))?;
        fired.push(format!("{class} {with_events}"));
    }
    Ok(format!("1000 signals per class agree within 1 ms ({} with events)", fired.join(", ")))
}

fn table_timelines() -> Outcome {
    let mut settings = parse_settings(settings_xml("IED1", 400.0, 100.0, 1.0e6, false).as_bytes()).map_err(|e| e.to_string())?;
    settings.functions.retain(|f| matches!(f.class, ProtectionClass::Ptov | ProtectionClass::Ptuv));
    let map = parse_mapping(br#"<Mapping><Entry physicalAttr="Load0.Voltage.phsA" cyberAttr="IED1.MMXU1.PhV.phsA.cVal"/></Mapping>"#)
        .map_err(|e| e.to_string())?;
    let run = |steps: &[(f64, f64)]| -> Result<Vec<(f64, EventKind, ProtectionClass)>, String> {
        let stream: Vec<Measurement> = steps
            .iter()
            .map(|&(t, pu)| Measurement::new(t, "Load0.Voltage.phsA", pu * 400.0))
            .collect();
        let events = evaluate_protection(&settings, &stream, &map).map_err(|e| e.to_string())?;
        Ok(events.iter().map(|e| (e.timestamp, e.kind, e.class)).collect())
    };
    let trip = run(&[(0.0, 1.25), (30.0, 1.25)])?;
    ensure(trip == [(2.0, EventKind::Trip, ProtectionClass::Ptov)], || format!("1.25 p.u.: {trip:?}"))?;
    let quiet = run(&[(0.0, 1.0), (60.0, 1.0)])?;
    ensure(quiet.is_empty(), || format!("1.0 p.u.: {quiet:?}"))?;
    let alarm = run(&[(0.0, 1.15), (12.0, 1.0), (40.0, 1.0)])?;
    ensure(alarm == [(10.0, EventKind::Alarm, ProtectionClass::Ptov)], || format!("1.15 p.u. for 12 s: {alarm:?}"))?;
    Ok("trip at 2 s, no event at 1.0 p.u., single alarm at 10 s".into())
}

fn switch_paths(s: &Substation) -> Vec<String> {
    let mut out = Vec::new();
    for vl in &s.voltage_levels {
        for b in &vl.bays {
            for ce in &b.conducting_equipment {
                if ce.is_switch() && ce.terminals.len() > 1 {
                    out.push(format!("{}/{}/{}/{}", s.name, vl.name, b.name, ce.name));
                }
            }
        }
    }
    out
}

fn topology_oracle() -> Outcome {
    let mut rng = sgml_testkit::rng(0xacc4);
    let mut split = 0;
    for i in 0..200 {
        let s = random_substation(&mut rng, &format!("S{i}"), 30);
        let mut g = build_topology_graph(&s).map_err(|e| e.to_string())?;
        let closed = g.connected_components();
        ensure(closed == island_count(&s, &HashSet::new()), || format!("S{i}: closed components differ"))?;
        let mut switches = switch_paths(&s);
        switches.shuffle(&mut rng);
        let mut open = HashSet::new();
        let mut last = closed;
        for p in switches.iter().take(rng.gen_range(0..=switches.len())) {
            g.set_switch(p, SwitchState::Open);
            open.insert(p.clone());
            let now = g.connected_components();
            ensure(now >= last, || format!("S{i}: opening {p} merged islands"))?;
            ensure(now == island_count(&s, &open), || format!("S{i}: components differ after opening {p}"))?;
            last = now;
        }
        split += usize::from(last > closed);
    }
    Ok(format!("200 substations agree with union-find, {split} split by opening switches"))
}

fn sound(doc: &SclDocument) -> Result<(), String> {
    let report = resolve_references(doc);
    let census = link_census(&xml::parse(render(doc).as_bytes()).map_err(|e| e.to_string())?.root, doc.kind);
    ensure(report.is_consistent() && census.dangling.is_empty(), || {
        format!("{}: dangling {:?}", doc.header.id, census.dangling)
    })?;
    ensure(census.total == report.links.len(), || format!("{}: link counts differ", doc.header.id))
}

fn merge_soundness() -> Outcome {
    let mut rng = sgml_testkit::rng(0xacc5);
    let mut grafted = 0;
    for n in 0..100 {
        let fx = random_multisub(&mut rng);
        let (scd, _) = merge_scd(&fx.scds, CollisionPolicy::Prefix).map_err(|e| format!("fixture {n}: {e}"))?;
        sound(&scd)?;
        let (ssd, report) = merge_ssd_sed(&fx.ssds, &fx.seds).map_err(|e| format!("fixture {n}: {e}"))?;
        sound(&ssd)?;
        ensure(report.grafted_bays.len() == fx.sed_bay_count(), || {
            format!("fixture {n}: {} grafted, {} in SEDs", report.grafted_bays.len(), fx.sed_bay_count())
        })?;
        grafted += report.grafted_bays.len();
        let (single, _) = merge_scd(&fx.scds[..1], CollisionPolicy::Prefix).map_err(|e| e.to_string())?;
        let expect = parse_scl(&serialize_scl(&fx.scds[0]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(single == expect, || format!("fixture {n}: single-input merge changed the document"))?;
    }
    Ok(format!("100 fixtures with no dangling links, {grafted} bays grafted"))
}

fn scada_round_trip() -> Outcome {
    let empty = scada_to_json(&ScadaProject::default());
    ensure(empty == br#"{"dataSources":[],"dataPoints":[]}"#, || String::from_utf8_lossy(&empty).into_owned())?;
    let mut rng = sgml_testkit::rng(0xacc6);
    let mut points = 0;
    for _ in 0..300 {
        let project = random_scada_project(&mut rng, 20, 200);
        ensure(project.data_sources.len() <= 20 && project.point_count() <= 200, || "project too large".into())?;
        let parsed = parse_scada_xml(project.to_xml().as_bytes()).map_err(|e| e.to_string())?;
        let back = scada_from_json(&scada_to_json(&parsed)).map_err(|e| e.to_string())?;
        ensure(back == project, || "project changed through XML and JSON".into())?;
        points += project.point_count();
    }
    Ok(format!("300 projects ({points} points) survive XML and JSON"))
}

fn epic_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_inputs(&dir.path().join("in"), &Epic::new().files()).map_err(|e| e.to_string())?;
    let mut manifests = Vec::new();
    let mut slowest = Duration::ZERO;
    for out in ["run1", "run2"] {
        let start = Instant::now();
        let o = Command::new(env!("CARGO_BIN_EXE_sgml"))
            .args(["pipeline", "in", "--out", out])
            .current_dir(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        manifests.push(fs::read(dir.path().join(out).join("manifest.json")).map_err(|e| e.to_string())?);
    }
    ensure(manifests[0] == manifests[1], || "manifests differ between runs".into())?;
    let topo: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("run1/cyber-topology.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let nodes = topo["nodes"].as_array().ok_or("no nodes")?;
    let count = |k: &str| nodes.iter().filter(|n| n["kind"] == k).count();
    ensure(count("ied") == 12 && count("switch") == 10, || {
        format!("{} IED nodes, {} switch nodes", count("ied"), count("switch"))
    })?;
    ensure(slowest < Duration::from_secs(10), || format!("slowest run took {slowest:?}"))?;
    Ok(format!("12 IEDs, 10 switches, identical manifests, slowest run {slowest:.2?}"))
}

fn rule_fixtures() -> Outcome {
    let mut covered = BTreeSet::new();
    for c in rule_cases() {
        let rule = list_rules(c.kind)
            .into_iter()
            .find(|r| r.rule_id == c.rule_id)
            .ok_or_else(|| format!("{} is not a {} rule", c.rule_id, c.kind))?;
        let ok = validate_proprietary(c.kind, c.passing.as_bytes()).map_err(|e| e.to_string())?;
        ensure(ok.errors.is_empty() && ok.warnings.is_empty(), || format!("{}: passing fixture reports {ok:?}", c.rule_id))?;
        let bad = validate_proprietary(c.kind, c.failing.as_bytes()).map_err(|e| e.to_string())?;
        let findings = match rule.severity {
            Severity::Error => &bad.errors,
            Severity::Warning => &bad.warnings,
        };
        ensure(findings.iter().any(|f| f.rule_id == c.rule_id && f.path == c.path), || {
            format!("{} not reported at {}: {bad:?}", c.rule_id, c.path)
        })?;
        covered.insert(c.rule_id);
    }
    let all: BTreeSet<&str> = DocumentKind::ALL.into_iter().flat_map(list_rules).map(|r| r.rule_id).collect();
    ensure(covered == all, || format!("uncovered rules: {:?}", all.difference(&covered).collect::<Vec<_>>()))?;
    Ok(format!("{} rules each pass and fail at the expected path", all.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("SCL round trip", scl_round_trip),
        ("protection timing against dense sampling", protection_oracle),
        ("threshold table timelines", table_timelines),
        ("topology against union-find", topology_oracle),
        ("multi-substation merge soundness", merge_soundness),
        ("SCADA XML and JSON round trip", scada_round_trip),
        ("EPIC pipeline", epic_pipeline),
        ("validation rule fixtures", rule_fixtures),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
