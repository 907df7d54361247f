use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::scl::{SclDocument, Substation, Terminal};

use super::PowerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchState {
    #[serde(rename = "open")]
    Open,
    #[serde(rename = "closed")]
    Closed,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl SwitchState {
    pub fn conducts(self) -> bool {
        self != SwitchState::Open
    }
}

/// One piece of multi-terminal equipment joining its terminal nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Edge {
    pub equipment_path: String,
    pub ce_type: String,
    pub endpoints: Vec<String>,
    pub switch_state: SwitchState,
}

/// Single-terminal equipment hanging off one vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Leaf {
    pub equipment_path: String,
    pub ce_type: String,
    pub vertex: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
    pub leaves: Vec<Leaf>,
}

/// A piece of equipment with its terminal node paths, as found in the
/// single-line diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Placed {
    pub path: String,
    pub ce_type: String,
    pub nodes: Vec<String>,
}

pub(crate) fn placed_equipment(s: &Substation) -> Vec<Placed> {
    let nodes = |ts: &mut dyn Iterator<Item = &Terminal>| ts.map(|t| t.connectivity_node.clone()).collect();
    let mut out = Vec::new();
    for t in &s.power_transformers {
        out.push(Placed {
            path: format!("{}/{}", s.name, t.name),
            ce_type: "PTR".into(),
            nodes: nodes(&mut t.terminals()),
        });
    }
    for vl in &s.voltage_levels {
        for bay in &vl.bays {
            for ce in &bay.conducting_equipment {
                out.push(Placed {
                    path: format!("{}/{}/{}/{}", s.name, vl.name, bay.name, ce.name),
                    ce_type: ce.ce_type.clone(),
                    nodes: nodes(&mut ce.terminals.iter()),
                });
            }
        }
    }
    out
}

fn node_paths(s: &Substation) -> impl Iterator<Item = &str> {
    s.voltage_levels
        .iter()
        .flat_map(|v| v.bays.iter())
        .flat_map(|b| b.connectivity_nodes.iter())
        .map(|n| n.path_name.as_str())
}

fn assemble(vertices: Vec<String>, equipment: Vec<Placed>) -> Result<TopologyGraph, PowerError> {
    let known: HashSet<&str> = vertices.iter().map(String::as_str).collect();
    let mut edges = Vec::new();
    let mut leaves = Vec::new();
    for p in equipment {
        if let Some(bad) = p.nodes.iter().find(|n| !known.contains(n.as_str())) {
            return Err(PowerError::DanglingTerminal {
                equipment: p.path,
                node: bad.clone(),
            });
        }
        match p.nodes.len() {
            0 => {}
            1 => leaves.push(Leaf {
                equipment_path: p.path,
                ce_type: p.ce_type,
                vertex: p.nodes[0].clone(),
            }),
            _ => edges.push(Edge {
                switch_state: if matches!(p.ce_type.as_str(), "CBR" | "DIS") {
                    SwitchState::Closed
                } else {
                    SwitchState::NotApplicable
                },
                equipment_path: p.path,
                ce_type: p.ce_type,
                endpoints: p.nodes,
            }),
        }
    }
    Ok(TopologyGraph {
        vertices,
        edges,
        leaves,
    })
}

/// Electrical connectivity of one substation. Every terminal must land on
/// a connectivity node of the same substation; switches start closed.
pub fn build_topology_graph(sub: &Substation) -> Result<TopologyGraph, PowerError> {
    assemble(node_paths(sub).map(str::to_string).collect(), placed_equipment(sub))
}

/// Connectivity across every substation of a document, so interconnecting
/// lines may join nodes of different substations.
pub fn build_document_graph(doc: &SclDocument) -> Result<TopologyGraph, PowerError> {
    let vertices = doc.substations.iter().flat_map(node_paths).map(str::to_string).collect();
    let equipment = doc.substations.iter().flat_map(placed_equipment).collect();
    assemble(vertices, equipment)
}

impl TopologyGraph {
    pub fn edge(&self, equipment_path: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.equipment_path == equipment_path)
    }

    /// Connected components over the vertices, joining the endpoints of
    /// every conducting edge. Leaves never join anything.
    pub fn connected_components(&self) -> usize {
        self.components_where(|e| e.switch_state.conducts())
    }

    /// Components counted with a custom conduction predicate.
    pub fn components_where(&self, conducts: impl Fn(&Edge) -> bool) -> usize {
        let index: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in self.edges.iter().filter(|e| conducts(e)) {
            let ids: Vec<usize> = e.endpoints.iter().filter_map(|v| index.get(v.as_str()).copied()).collect();
            for pair in ids.windows(2) {
                adj[pair[0]].push(pair[1]);
                adj[pair[1]].push(pair[0]);
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut count = 0;
        for start in 0..self.vertices.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        count
    }

    /// Set the state of a switch edge. Returns false if no such switch.
    pub fn set_switch(&mut self, equipment_path: &str, state: SwitchState) -> bool {
        match self
            .edges
            .iter_mut()
            .find(|e| e.equipment_path == equipment_path && e.switch_state != SwitchState::NotApplicable)
        {
            Some(e) => {
                e.switch_state = state;
                true
            }
            None => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scl::{Bay, ConductingEquipment, ConnectivityNode, VoltageLevel};

    fn one_bay() -> Substation {
        let mut bay = Bay::new("B1");
        bay.connectivity_nodes.push(ConnectivityNode::new("S1", "V1", "B1", "N1"));
        bay.connectivity_nodes.push(ConnectivityNode::new("S1", "V1", "B1", "N2"));
        let mut cb = ConductingEquipment::new("CB1", "CBR");
        cb.terminals.push(Terminal::new("T1", "S1/V1/B1/N1"));
        cb.terminals.push(Terminal::new("T2", "S1/V1/B1/N2"));
        bay.conducting_equipment.push(cb);
        let mut vl = VoltageLevel::new("V1");
        vl.bays.push(bay);
        let mut s = Substation::new("S1");
        s.voltage_levels.push(vl);
        s
    }

    #[test]
    fn breaker_between_two_nodes() {
        let g = build_topology_graph(&one_bay()).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].equipment_path, "S1/V1/B1/CB1");
        assert_eq!(g.edges[0].switch_state, SwitchState::Closed);
        assert_eq!(g.connected_components(), 1);
    }

    #[test]
    fn opening_the_breaker_splits_the_graph() {
        let mut g = build_topology_graph(&one_bay()).unwrap();
        assert!(g.set_switch("S1/V1/B1/CB1", SwitchState::Open));
        assert_eq!(g.connected_components(), 2);
    }

    #[test]
    fn foreign_terminal_is_dangling() {
        let mut s = one_bay();
        s.voltage_levels[0].bays[0].conducting_equipment[0].terminals[1].connectivity_node = "S2/V1/B1/N1".into();
        assert!(matches!(build_topology_graph(&s), Err(PowerError::DanglingTerminal { .. })));
    }
}
