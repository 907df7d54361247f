use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use sgml_core::scl::{ConnectedAp, SclDocument};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CyberTopology {
    pub sub_networks: Vec<SubNetworkView>,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    /// Cable identifiers that do not join exactly two ports.
    pub unpaired_cables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SubNetworkView {
    pub name: String,
    #[serde(rename = "type")]
    pub net_type: String,
    pub connected_aps: Vec<AccessPointView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AccessPointView {
    pub ied_name: String,
    pub ap_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ip: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mac_address: Option<String>,
    pub address: BTreeMap<String, String>,
    pub gse: Vec<GseView>,
    pub ports: Vec<PortView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GseView {
    pub cb_name: String,
    pub ld_inst: String,
    pub mac_address: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub app_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vlan_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PortView {
    #[serde(rename = "type")]
    pub conn_type: String,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Ied,
    Switch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    pub sub_networks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Endpoint {
    pub node: String,
    pub port: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub cable: String,
    pub ends: [Endpoint; 2],
}

impl CyberTopology {
    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }
}

fn ap_view(ap: &ConnectedAp) -> AccessPointView {
    AccessPointView {
        ied_name: ap.ied_name.clone(),
        ap_name: ap.ap_name.clone(),
        ip: ap.ip().map(str::to_string),
        mac_address: ap.address_param("MAC-Address").map(str::to_string),
        address: ap.address.iter().cloned().collect(),
        gse: ap
            .gse
            .iter()
            .map(|g| GseView {
                cb_name: g.cb_name.clone(),
                ld_inst: g.ld_inst.clone(),
                mac_address: g.mac_address.clone(),
                app_id: g.app_id.clone(),
                vlan_id: g.vlan_id.clone(),
            })
            .collect(),
        ports: ap
            .phys_conns
            .iter()
            .map(|p| PortView {
                conn_type: p.conn_type.clone(),
                params: p.params.iter().cloned().collect(),
            })
            .collect(),
    }
}

/// Network view of `docs`, earlier documents taking precedence: subnetworks
/// of the same name are combined, and an access point already listed is
/// not repeated. Links pair the two ports that name the same cable.
pub fn build_cyber_topology(docs: &[&SclDocument]) -> CyberTopology {
    let mut subnets: Vec<SubNetworkView> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut node_index: HashMap<String, usize> = HashMap::new();
    let mut cables: BTreeMap<String, Vec<Endpoint>> = BTreeMap::new();

    let mut add_node = |nodes: &mut Vec<Node>, name: &str, switch: bool| -> usize {
        *node_index.entry(name.to_string()).or_insert_with(|| {
            nodes.push(Node {
                name: name.to_string(),
                kind: if switch { NodeKind::Switch } else { NodeKind::Ied },
                sub_networks: Vec::new(),
            });
            nodes.len() - 1
        })
    };

    let is_switch = |name: &str| docs.iter().find_map(|d| d.ied(name)).is_some_and(|i| i.is_switch());

    for doc in docs {
        for ied in &doc.ieds {
            add_node(&mut nodes, &ied.name, ied.is_switch());
        }
    }
    for doc in docs {
        for sn in doc.sub_networks() {
            let si = match subnets.iter().position(|s| s.name == sn.name) {
                Some(i) => i,
                None => {
                    subnets.push(SubNetworkView {
                        name: sn.name.clone(),
                        net_type: sn.net_type.clone(),
                        connected_aps: Vec::new(),
                    });
                    subnets.len() - 1
                }
            };
            for ap in &sn.connected_aps {
                let view = &mut subnets[si];
                if view
                    .connected_aps
                    .iter()
                    .any(|a| a.ied_name == ap.ied_name && a.ap_name == ap.ap_name)
                {
                    continue;
                }
                view.connected_aps.push(ap_view(ap));
                let ni = add_node(&mut nodes, &ap.ied_name, is_switch(&ap.ied_name));
                if !nodes[ni].sub_networks.contains(&sn.name) {
                    nodes[ni].sub_networks.push(sn.name.clone());
                }
                for pc in &ap.phys_conns {
                    if let Some(cable) = pc.cable() {
                        let port = pc.port().or(pc.plug()).unwrap_or(&ap.ap_name);
                        cables.entry(cable.to_string()).or_default().push(Endpoint {
                            node: ap.ied_name.clone(),
                            port: port.to_string(),
                        });
                    }
                }
            }
        }
    }

    let mut links = Vec::new();
    let mut unpaired_cables = Vec::new();
    for (cable, ends) in cables {
        match <[Endpoint; 2]>::try_from(ends) {
            Ok(ends) => links.push(Link { cable, ends }),
            Err(_) => unpaired_cables.push(cable),
        }
    }
    CyberTopology {
        sub_networks: subnets,
        nodes,
        links,
        unpaired_cables,
    }
}
