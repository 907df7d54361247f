use std::collections::{HashMap, HashSet};
use std::net::Ipv4Addr;

use crate::xml::Element;

use super::{attr_path, indexed_children, ValidationReport};

pub const SOURCE_ATTRS: [&str; 8] = [
    "xid",
    "name",
    "type",
    "updatePeriodType",
    "updatePeriods",
    "transportType",
    "host",
    "port",
];

pub const POINT_ATTRS: [&str; 8] = [
    "xid",
    "name",
    "range",
    "offset",
    "modbusDataType",
    "engineeringUnits",
    "dataSourceXid",
    "deviceName",
];

pub const PERIOD_TYPES: [&str; 4] = ["MILLISECONDS", "SECONDS", "MINUTES", "HOURS"];

/// RFC 1123 hostname or dotted-quad IPv4 address.
pub fn is_host(h: &str) -> bool {
    if h.parse::<Ipv4Addr>().is_ok() {
        return true;
    }
    if h.is_empty() || h.len() > 253 || h.split('.').all(|l| l.chars().all(|c| c.is_ascii_digit())) {
        return false;
    }
    h.split('.').all(|label| {
        !label.is_empty()
            && label.len() <= 63
            && !label.starts_with('-')
            && !label.ends_with('-')
            && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
    })
}

struct PointCheck<'a> {
    path: String,
    el: &'a Element,
    /// `(xid, name)` of the enclosing dataSource for nested points.
    owner: Option<(&'a str, &'a str)>,
}

pub(super) fn check(root: &Element, root_path: &str, r: &mut ValidationReport) {
    if root.child("dataSources").is_none() {
        r.error("scada-root", root_path, "project without dataSources");
    }
    let mut xids: HashSet<&str> = HashSet::new();
    let mut sources: HashMap<&str, &str> = HashMap::new();
    let mut points = Vec::new();

    for (cp, child) in indexed_children(root, root_path) {
        match child.local_name() {
            "dataSources" => {
                for (sp, src) in indexed_children(child, &cp) {
                    if src.local_name() != "dataSource" {
                        r.warning("scada-unknown-element", &sp, format!("unexpected element <{}>", src.name));
                        continue;
                    }
                    check_source(src, &sp, r);
                    if let Some(x) = src.attr("xid") {
                        if !xids.insert(x) {
                            r.error("xid-unique", attr_path(&sp, "xid"), format!("xid {x:?} reused"));
                        }
                        sources.entry(x).or_insert(src.attr("name").unwrap_or(""));
                    }
                    let owner = src.attr("xid").map(|x| (x, src.attr("name").unwrap_or("")));
                    for (pp, p) in indexed_children(src, &sp) {
                        if p.local_name() == "dataPoint" {
                            points.push(PointCheck { path: pp, el: p, owner });
                        } else {
                            r.warning("scada-unknown-element", &pp, format!("unexpected element <{}>", p.name));
                        }
                    }
                }
            }
            "dataPoints" => {
                for (pp, p) in indexed_children(child, &cp) {
                    if p.local_name() == "dataPoint" {
                        points.push(PointCheck { path: pp, el: p, owner: None });
                    } else {
                        r.warning("scada-unknown-element", &pp, format!("unexpected element <{}>", p.name));
                    }
                }
            }
            _ => r.warning("scada-unknown-element", &cp, format!("unexpected element <{}>", child.name)),
        }
    }

    for pc in &points {
        let (p, pp) = (pc.el, pc.path.as_str());
        for attr in POINT_ATTRS {
            if p.attr(attr).is_none() {
                r.error("scada-point-attrs", attr_path(pp, attr), format!("dataPoint without {attr}"));
            }
        }
        if let Some(x) = p.attr("xid") {
            if !xids.insert(x) {
                r.error("xid-unique", attr_path(pp, "xid"), format!("xid {x:?} reused"));
            }
        }
        if let Some(o) = p.attr("offset") {
            if o.trim().parse::<u32>().is_err() {
                r.error("scada-offset", attr_path(pp, "offset"), format!("offset {o:?} is not a non-negative integer"));
            }
        }
        let Some(ds) = p.attr("dataSourceXid") else { continue };
        let expected_name = match pc.owner {
            Some((owner_xid, owner_name)) if ds == owner_xid => Some(owner_name),
            _ if !sources.contains_key(ds) => {
                r.error("scada-point-source", attr_path(pp, "dataSourceXid"), format!("no dataSource {ds:?}"));
                None
            }
            Some((owner_xid, _)) => {
                r.error(
                    "scada-point-owner",
                    attr_path(pp, "dataSourceXid"),
                    format!("point nested in {owner_xid:?} refers to {ds:?}"),
                );
                None
            }
            None => sources.get(ds).copied(),
        };
        if let (Some(expected), Some(dev)) = (expected_name, p.attr("deviceName")) {
            if dev != expected {
                r.error(
                    "scada-point-owner",
                    attr_path(pp, "deviceName"),
                    format!("deviceName {dev:?} differs from source name {expected:?}"),
                );
            }
        }
    }
}

fn check_source(src: &Element, sp: &str, r: &mut ValidationReport) {
    for attr in SOURCE_ATTRS {
        if src.attr(attr).is_none() {
            r.error("scada-source-attrs", attr_path(sp, attr), format!("dataSource without {attr}"));
        }
    }
    if let Some(p) = src.attr("port") {
        if !p.trim().parse::<u32>().is_ok_and(|n| (1..=65535).contains(&n)) {
            r.error("scada-port-range", attr_path(sp, "port"), format!("port {p:?} outside 1..=65535"));
        }
    }
    if let Some(h) = src.attr("host") {
        if !is_host(h) {
            r.error("scada-host", attr_path(sp, "host"), format!("{h:?} is neither an IPv4 address nor a hostname"));
        }
    }
    if let Some(u) = src.attr("updatePeriods") {
        if !u.trim().parse::<u32>().is_ok_and(|n| n > 0) {
            r.error(
                "scada-update-periods",
                attr_path(sp, "updatePeriods"),
                format!("updatePeriods {u:?} is not a positive integer"),
            );
        }
    }
    if let Some(t) = src.attr("updatePeriodType") {
        if !PERIOD_TYPES.contains(&t) {
            r.warning("scada-period-type", attr_path(sp, "updatePeriodType"), format!("unknown period type {t:?}"));
        }
    }
}
