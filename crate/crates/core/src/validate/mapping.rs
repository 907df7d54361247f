use std::collections::HashSet;

use crate::xml::Element;

use super::{attr_path, indexed_children, is_dotted_path, ValidationReport};

pub(super) fn check(root: &Element, root_path: &str, r: &mut ValidationReport) {
    let mut physical = HashSet::new();
    let mut cyber = HashSet::new();
    for (ep, entry) in indexed_children(root, root_path) {
        if entry.local_name() != "Entry" {
            r.warning("map-unknown-element", &ep, format!("unexpected element <{}>", entry.name));
            continue;
        }
        for (attr, seen, rule) in [
            ("physicalAttr", &mut physical, "map-physical-unique"),
            ("cyberAttr", &mut cyber, "map-cyber-unique"),
        ] {
            let path = attr_path(&ep, attr);
            match entry.attr(attr) {
                None => r.error("map-attrs", path, format!("Entry without {attr}")),
                Some(v) if !is_dotted_path(v) => {
                    r.error("map-dotted-path", path, format!("{v:?} is not a dotted path"))
                }
                Some(v) => {
                    if !seen.insert(v) {
                        r.error(rule, path, format!("{v:?} mapped twice"));
                    }
                }
            }
        }
        for (cp, c) in indexed_children(entry, &ep) {
            r.warning("map-unknown-element", cp, format!("unexpected element <{}>", c.name));
        }
    }
}
