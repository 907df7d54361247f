//! Brute-force reference implementations used to cross-check the library.

use std::collections::{HashMap, HashSet};

use sgml_core::ied::{EventKind, ProtectionFunction};
use sgml_core::scl::{SclKind, Substation};
use sgml_core::xml::Element;

/// Links found by walking the raw element tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkCensus {
    pub total: usize,
    pub dangling: Vec<String>,
}

fn descendants<'a>(el: &'a Element, name: &str) -> Vec<&'a Element> {
    let mut out = Vec::new();
    el.walk(&mut |e| {
        if e.local_name() == name {
            out.push(e);
        }
    });
    out
}

fn attr<'a>(el: &'a Element, key: &str) -> &'a str {
    el.attr(key).unwrap_or("")
}

fn is_ln(el: &Element) -> bool {
    matches!(el.local_name(), "LN" | "LN0")
}

/// Logical nodes keyed by `(ied, ld, prefix, class, inst)`.
type LnKey = (String, String, String, String, String);

struct Index<'a> {
    ieds: HashMap<&'a str, &'a Element>,
    lns: HashMap<LnKey, &'a Element>,
    lnode_types: HashMap<&'a str, &'a Element>,
}

fn ln_key(ied: &str, ld: &str, ln: &Element) -> LnKey {
    (
        ied.to_string(),
        ld.to_string(),
        attr(ln, "prefix").to_string(),
        attr(ln, "lnClass").to_string(),
        attr(ln, "inst").to_string(),
    )
}

fn index(root: &Element) -> Index<'_> {
    let mut ix = Index {
        ieds: HashMap::new(),
        lns: HashMap::new(),
        lnode_types: HashMap::new(),
    };
    for ied in root.children_named("IED") {
        let name = attr(ied, "name");
        ix.ieds.insert(name, ied);
        for ld in descendants(ied, "LDevice") {
            for ln in ld.children.iter().filter(|c| is_ln(c)) {
                ix.lns.insert(ln_key(name, attr(ld, "inst"), ln), ln);
            }
        }
    }
    for t in root.children_named("DataTypeTemplates") {
        for lt in t.children_named("LNodeType") {
            ix.lnode_types.insert(attr(lt, "id"), lt);
        }
    }
    ix
}

/// Count every cross reference of a document and list the unresolved
/// ones, working on the element tree alone.
pub fn link_census(root: &Element, kind: SclKind) -> LinkCensus {
    let ix = index(root);
    let mut census = LinkCensus::default();
    let mut check = |ok: bool, target: String| {
        census.total += 1;
        if !ok {
            census.dangling.push(target);
        }
    };

    let subs: Vec<&Element> = root.children_named("Substation").collect();
    let nodes: HashSet<&str> = subs
        .iter()
        .flat_map(|s| descendants(s, "ConnectivityNode"))
        .map(|n| attr(n, "pathName"))
        .collect();
    for s in &subs {
        for t in descendants(s, "Terminal") {
            let cn = attr(t, "connectivityNode");
            check(nodes.contains(cn), cn.to_string());
        }
        if kind == SclKind::Scd {
            for l in descendants(s, "LNode") {
                let key = (
                    attr(l, "iedName").to_string(),
                    attr(l, "ldInst").to_string(),
                    attr(l, "prefix").to_string(),
                    attr(l, "lnClass").to_string(),
                    attr(l, "lnInst").to_string(),
                );
                let target = format!("{}/{}/{}{}{}", key.0, key.1, key.2, key.3, key.4);
                check(ix.lns.contains_key(&key), target);
            }
        }
    }

    for (ied_name, ied) in &ix.ieds {
        for ld in descendants(ied, "LDevice") {
            for ln in ld.children.iter().filter(|c| is_ln(c)) {
                let sets: HashSet<&str> = ln.children_named("DataSet").map(|d| attr(d, "name")).collect();
                for ds in ln.children_named("DataSet") {
                    for f in ds.children_named("FCDA") {
                        let key = (
                            ied_name.to_string(),
                            attr(f, "ldInst").to_string(),
                            attr(f, "prefix").to_string(),
                            attr(f, "lnClass").to_string(),
                            attr(f, "lnInst").to_string(),
                        );
                        let top = attr(f, "doName").split('.').next().unwrap_or("");
                        let ok = ix.lns.get(&key).is_some_and(|target| {
                            target.children_named("DOI").any(|d| attr(d, "name") == top)
                                || ix
                                    .lnode_types
                                    .get(attr(target, "lnType"))
                                    .is_some_and(|t| t.children_named("DO").any(|d| attr(d, "name") == top))
                        });
                        check(ok, format!("{}/{}{}{}.{}", key.1, key.2, key.3, key.4, attr(f, "doName")));
                    }
                }
                for cb in ln.children.iter().filter(|c| matches!(c.local_name(), "ReportControl" | "GSEControl")) {
                    let ds = attr(cb, "datSet");
                    if !ds.is_empty() {
                        check(sets.contains(ds), ds.to_string());
                    }
                }
            }
        }
    }

    if kind != SclKind::Ssd {
        for comm in root.children_named("Communication") {
            for cap in descendants(comm, "ConnectedAP") {
                let ied_name = attr(cap, "iedName");
                let ap = attr(cap, "apName");
                let ied = ix.ieds.get(ied_name);
                check(
                    ied.is_some_and(|i| i.children_named("AccessPoint").any(|a| attr(a, "name") == ap)),
                    format!("{ied_name}/{ap}"),
                );
                for g in cap.children_named("GSE") {
                    let ld_inst = attr(g, "ldInst");
                    let cb = attr(g, "cbName");
                    let ok = ied.is_some_and(|i| {
                        descendants(i, "LDevice")
                            .into_iter()
                            .filter(|ld| attr(ld, "inst") == ld_inst)
                            .any(|ld| descendants(ld, "GSEControl").iter().any(|c| attr(c, "name") == cb))
                    });
                    check(ok, format!("{ied_name}/{ld_inst}/{cb}"));
                }
            }
        }
    }
    census
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Electrical islands of a substation, with the named equipment
/// (`sub/vl/bay/ce`) treated as open.
pub fn island_count(sub: &Substation, open: &HashSet<String>) -> usize {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    for vl in &sub.voltage_levels {
        for bay in &vl.bays {
            for cn in &bay.connectivity_nodes {
                let n = ids.len();
                ids.entry(cn.path_name.as_str()).or_insert(n);
            }
        }
    }
    let mut uf = UnionFind::new(ids.len());
    let mut join = |nodes: Vec<&str>| {
        let found: Vec<usize> = nodes.iter().filter_map(|n| ids.get(n).copied()).collect();
        for w in found.windows(2) {
            uf.union(w[0], w[1]);
        }
    };
    for t in &sub.power_transformers {
        join(
            t.windings
                .iter()
                .flat_map(|w| w.terminals.iter())
                .map(|x| x.connectivity_node.as_str())
                .collect(),
        );
    }
    for vl in &sub.voltage_levels {
        for bay in &vl.bays {
            for ce in &bay.conducting_equipment {
                let path = format!("{}/{}/{}/{}", sub.name, vl.name, bay.name, ce.name);
                if !open.contains(&path) {
                    join(ce.terminals.iter().map(|x| x.connectivity_node.as_str()).collect());
                }
            }
        }
    }
    let n = ids.len();
    (0..n).filter(|&i| uf.find(i) == i).count()
}

/// Sampling step of the dense protection oracle, in seconds.
pub const TICK: f64 = 0.001;

/// Evaluate one function by sampling a piecewise-constant per-unit signal
/// every millisecond up to `horizon`.
pub fn dense_protection(f: &ProtectionFunction, samples: &[(f64, f64)], horizon: f64) -> Vec<(f64, EventKind)> {
    let mut out = Vec::new();
    let Some(first) = samples.first() else { return out };
    let mut i = 0;
    let mut in_episode = false;
    let (mut alarmed, mut tripped) = (false, false);
    let (mut alarm_since, mut trip_since): (Option<f64>, Option<f64>) = (None, None);
    let start_tick = (first.0 / TICK).ceil() as u64;
    let end_tick = (horizon / TICK).ceil() as u64;
    for k in start_tick..=end_tick {
        let t = k as f64 * TICK;
        while i + 1 < samples.len() && samples[i + 1].0 <= t {
            i += 1;
        }
        let x = samples[i].1;
        let a = f.alarm.is_some_and(|p| f.class.violates(x, p.value));
        let c = f.class.violates(x, f.trip.value);
        if !(a || c) {
            in_episode = false;
            alarm_since = None;
            trip_since = None;
            continue;
        }
        if !in_episode {
            in_episode = true;
            alarmed = false;
            tripped = false;
        }
        alarm_since = if a { alarm_since.or(Some(t)) } else { None };
        trip_since = if c { trip_since.or(Some(t)) } else { None };
        if tripped {
            continue;
        }
        if let (false, Some(p), Some(s)) = (alarmed, f.alarm, alarm_since) {
            if t - s >= p.period_seconds - 1e-9 {
                out.push((t, EventKind::Alarm));
                alarmed = true;
            }
        }
        if let Some(s) = trip_since {
            if t - s >= f.trip.period_seconds - 1e-9 {
                out.push((t, EventKind::Trip));
                tripped = true;
            }
        }
    }
    out
}

/// Whether two event sequences agree kind for kind with timestamps no
/// more than `tolerance` apart.
pub fn same_events(a: &[(f64, EventKind)], b: &[(f64, EventKind)], tolerance: f64) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|(x, y)| x.1 == y.1 && (x.0 - y.0).abs() <= tolerance + 1e-9)
}
