use std::collections::HashSet;

use crate::xml::Element;

use super::{attr_path, finite, indexed_children, ValidationReport};

/// Units accepted in parameter files. `bool` carries switch states as 0/1.
pub const KNOWN_UNITS: &[&str] = &[
    "V", "kV", "MV", "A", "kA", "W", "kW", "MW", "var", "kvar", "Mvar", "VA", "kVA", "MVA", "Ohm", "pu", "%", "Hz",
    "s", "bool",
];

/// Bare name, `Substation/Transformer` or `Substation/VoltageLevel/Bay/Equipment`.
pub fn is_equipment_path(p: &str) -> bool {
    let segs: Vec<&str> = p.split('/').collect();
    matches!(segs.len(), 1 | 2 | 4) && segs.iter().all(|s| !s.trim().is_empty())
}

pub(super) fn check(root: &Element, root_path: &str, r: &mut ValidationReport) {
    let mut paths = HashSet::new();
    for (ep, eq) in indexed_children(root, root_path) {
        if eq.local_name() != "Equipment" {
            r.warning("param-unknown-element", &ep, format!("unexpected element <{}>", eq.name));
            continue;
        }
        match eq.attr("path") {
            None => r.error("param-attrs", attr_path(&ep, "path"), "Equipment without path"),
            Some(p) if !is_equipment_path(p) => {
                r.error("param-equipment-path", attr_path(&ep, "path"), format!("malformed equipment path {p:?}"))
            }
            Some(p) => {
                if !paths.insert(p) {
                    r.error("param-path-unique", attr_path(&ep, "path"), format!("equipment {p:?} listed twice"));
                }
            }
        }
        let mut names = HashSet::new();
        for (pp, param) in indexed_children(eq, &ep) {
            if param.local_name() != "Param" {
                r.warning("param-unknown-element", &pp, format!("unexpected element <{}>", param.name));
                continue;
            }
            for attr in ["name", "unit", "value"] {
                if param.attr(attr).is_none() {
                    r.error("param-attrs", attr_path(&pp, attr), format!("Param without {attr}"));
                }
            }
            if let Some(name) = param.attr("name") {
                if !names.insert(name) {
                    r.error("param-name-unique", attr_path(&pp, "name"), format!("parameter {name:?} repeated"));
                }
            }
            if let Some(v) = param.attr("value") {
                if finite(v).is_none() {
                    r.error("param-value-finite", attr_path(&pp, "value"), format!("{v:?} is not a finite number"));
                }
            }
            if let Some(u) = param.attr("unit") {
                if !KNOWN_UNITS.contains(&u) {
                    r.error("param-unit-known", attr_path(&pp, "unit"), format!("unknown unit {u:?}"));
                }
            }
        }
    }
}
