use std::collections::HashSet;

use crate::xml::Element;

use super::{attr_path, finite, indexed_children, is_dotted_path, ValidationReport};

const BASES: [&str; 3] = ["nominalCurrent", "nominalVoltage", "nominalPower"];

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Over,
    Under,
    Reverse,
}

struct FunctionShape {
    class: String,
    direction: Direction,
    base: &'static str,
    needs_trip: bool,
}

fn shape(el: &Element) -> Option<FunctionShape> {
    let name = el.local_name();
    let (direction, base, needs_trip) = match name {
        "PTOV" => (Direction::Over, "nominalVoltage", true),
        "PTUV" => (Direction::Under, "nominalVoltage", true),
        "PTOC" => (Direction::Over, "nominalCurrent", false),
        "PDOP" => (Direction::Reverse, "nominalPower", false),
        _ => return None,
    };
    let class = match (name, el.attr("type")) {
        ("PTOC", Some(t)) => format!("PTOC{t}"),
        _ => name.to_string(),
    };
    Some(FunctionShape {
        class,
        direction,
        base,
        needs_trip,
    })
}

pub(super) fn check(root: &Element, root_path: &str, r: &mut ValidationReport) {
    let ied = root.attr("iedName").filter(|n| !n.trim().is_empty());
    if ied.is_none() {
        r.error("threshold-root", attr_path(root_path, "iedName"), "Settings without iedName");
    }
    let mut bases = [None; 3];
    for (slot, attr) in bases.iter_mut().zip(BASES) {
        if let Some(v) = root.attr(attr) {
            match finite(v).filter(|x| *x > 0.0) {
                Some(x) => *slot = Some(x),
                None => r.error(
                    "threshold-base-positive",
                    attr_path(root_path, attr),
                    format!("{attr} {v:?} is not a positive number"),
                ),
            }
        }
    }
    let mut keys = HashSet::new();
    for (fp, f) in indexed_children(root, root_path) {
        let Some(shape) = shape(f) else {
            r.warning("threshold-unknown-element", &fp, format!("unexpected element <{}>", f.name));
            continue;
        };
        if f.local_name() == "PTOC" && !matches!(f.attr("type"), Some("50" | "51")) {
            r.error("threshold-ptoc-type", attr_path(&fp, "type"), "PTOC type must be 50 or 51");
        }
        let base_index = BASES.iter().position(|b| *b == shape.base).unwrap_or(0);
        if root.attr(shape.base).is_none() {
            r.error(
                "threshold-base-required",
                &fp,
                format!("{} needs {} on Settings", shape.class, shape.base),
            );
        }
        let base = bases[base_index];

        match f.attr("instance") {
            Some(i) if i.trim().parse::<u32>().is_ok_and(|n| n >= 1) => {
                if !keys.insert((shape.class.clone(), i.trim().to_string())) {
                    r.error(
                        "threshold-instance-unique",
                        attr_path(&fp, "instance"),
                        format!("{} instance {i} configured twice", shape.class),
                    );
                }
            }
            other => r.error(
                "threshold-instance",
                attr_path(&fp, "instance"),
                format!("instance {other:?} is not a positive integer"),
            ),
        }

        match f.attr("monitored") {
            Some(m) if is_dotted_path(m) && ied.is_none_or(|n| m.split('.').next() == Some(n)) => {}
            other => r.error(
                "threshold-monitored-ied",
                attr_path(&fp, "monitored"),
                format!("monitored {other:?} is not a dotted path inside the IED"),
            ),
        }
        if let Some(t) = f.attr("tripTarget") {
            if !is_dotted_path(t) {
                r.error("threshold-trip-target", attr_path(&fp, "tripTarget"), format!("{t:?} is not a dotted path"));
            }
        }
        for attr in ["multiplier", "epsilon"] {
            if let Some(v) = f.attr(attr) {
                if finite(v).is_none_or(|x| x <= 0.0) {
                    r.error("threshold-value-positive", attr_path(&fp, attr), format!("{attr} {v:?} is not positive"));
                }
            }
        }

        let mut alarm = None;
        let mut trip = None;
        let mut alarms = 0;
        let mut trips = 0;
        for (tp, t) in indexed_children(f, &fp) {
            let slot = match t.local_name() {
                "AlarmThreshold" => {
                    alarms += 1;
                    &mut alarm
                }
                "TripThreshold" => {
                    trips += 1;
                    &mut trip
                }
                _ => {
                    r.warning("threshold-unknown-element", &tp, format!("unexpected element <{}>", t.name));
                    continue;
                }
            };
            if let Some(pu) = threshold_value(t, &tp, base, r) {
                slot.get_or_insert((tp.clone(), pu));
            }
            if let Some(p) = t.attr("period") {
                if finite(p).is_none_or(|x| x < 0.0) {
                    r.error("threshold-period-nonneg", attr_path(&tp, "period"), format!("period {p:?} is not >= 0"));
                }
            }
        }
        if alarms > 1 || trips > 1 || (shape.needs_trip && trips == 0) {
            r.error(
                "threshold-trip-present",
                &fp,
                format!("{alarms} alarm and {trips} trip thresholds"),
            );
        }

        if let (Some((_, a)), Some((tp, t))) = (&alarm, &trip) {
            let bad = match shape.direction {
                Direction::Over => t < a,
                Direction::Under => t > a,
                Direction::Reverse => false,
            };
            if bad {
                r.error(
                    "trip-beyond-alarm",
                    tp,
                    format!("trip level {t} p.u. is less extreme than alarm level {a} p.u."),
                );
            }
        }
        if shape.class == "PTOC50" {
            let effective = trip
                .as_ref()
                .map(|(tp, v)| (tp.clone(), Some(*v)))
                .or_else(|| f.attr("multiplier").map(|m| (attr_path(&fp, "multiplier"), finite(m))));
            if let Some((path, Some(m))) = effective {
                if !(3.0..=4.0).contains(&m) {
                    r.warning("threshold-multiplier-range", path, format!("multiplier {m} outside 3..=4"));
                }
            }
        }
    }
}

/// Per-unit level of an alarm or trip threshold, reporting malformed
/// values. Absolute `value`s are divided by `base` when it is known.
fn threshold_value(t: &Element, tp: &str, base: Option<f64>, r: &mut ValidationReport) -> Option<f64> {
    let (attr, raw) = match (t.attr("pu"), t.attr("value")) {
        (Some(p), None) => ("pu", p),
        (None, Some(v)) => ("value", v),
        (Some(_), Some(_)) => {
            r.error("threshold-value-positive", attr_path(tp, "value"), "give either pu or value, not both");
            return None;
        }
        (None, None) => {
            r.error("threshold-value-positive", attr_path(tp, "pu"), "threshold without pu or value");
            return None;
        }
    };
    match finite(raw).filter(|x| *x > 0.0) {
        None => {
            r.error("threshold-value-positive", attr_path(tp, attr), format!("{raw:?} is not a positive number"));
            None
        }
        Some(x) if attr == "pu" => Some(x),
        Some(x) => base.map(|b| x / b),
    }
}
