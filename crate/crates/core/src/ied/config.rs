use serde::Serialize;

use crate::scl::{
    classify_model, serialize_scl, Communication, DataSet, Fcda, Gse, Header, Ied, SclDocument, SclKind, SubNetwork,
    TriggerOptions,
};

use super::mapping::{resolve_cyber_attr, CyberPhysicalMapping};
use super::settings::ProtectionSettings;
use super::IedError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportControlEntry {
    pub ld_inst: String,
    pub ln: String,
    pub name: String,
    #[serde(rename = "rptID")]
    pub rpt_id: String,
    pub dat_set: String,
    pub buffered: bool,
    pub trg_ops: TriggerOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intg_pd: Option<u32>,
    pub data_set: Vec<Fcda>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GooseAddress {
    pub mac_address: String,
    #[serde(rename = "appID", skip_serializing_if = "Option::is_none")]
    pub app_id: Option<String>,
    #[serde(rename = "vlanID", skip_serializing_if = "Option::is_none")]
    pub vlan_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vlan_priority: Option<String>,
}

impl From<&Gse> for GooseAddress {
    fn from(g: &Gse) -> Self {
        GooseAddress {
            mac_address: g.mac_address.clone(),
            app_id: g.app_id.clone(),
            vlan_id: g.vlan_id.clone(),
            vlan_priority: g.vlan_priority.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GooseControlEntry {
    pub ld_inst: String,
    pub ln: String,
    pub name: String,
    #[serde(rename = "appID")]
    pub app_id: String,
    pub dat_set: String,
    pub conf_rev: u32,
    pub data_set: Vec<Fcda>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub address: Option<GooseAddress>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ControlBlocks {
    pub report_controls: Vec<ReportControlEntry>,
    pub goose_controls: Vec<GooseControlEntry>,
}

/// Everything a virtual IED needs: its server data model, the control
/// blocks it publishes, the mapping entries it serves and its settings.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualIedConfig {
    pub ied_name: String,
    /// Single-IED SCL document holding the server data model.
    pub server_model: SclDocument,
    pub controls: ControlBlocks,
    pub mapping: CyberPhysicalMapping,
    pub settings: ProtectionSettings,
}

/// Bundle files in a fixed order: `model.xml`, `controls.json`,
/// `mapping.xml`, `settings.xml`.
pub type BundleFiles = Vec<(&'static str, Vec<u8>)>;

impl VirtualIedConfig {
    pub fn bundle_files(&self) -> Result<BundleFiles, IedError> {
        let model = serialize_scl(&self.server_model).map_err(|e| IedError::InconsistentInputs(e.to_string()))?;
        let mut controls = serde_json::to_string_pretty(&self.controls).expect("controls serialize");
        controls.push('\n');
        Ok(vec![
            ("model.xml", model),
            ("controls.json", controls.into_bytes()),
            ("mapping.xml", self.mapping.to_xml().into_bytes()),
            ("settings.xml", self.settings.to_xml().into_bytes()),
        ])
    }
}

fn data_set_entries(ds: Option<&DataSet>) -> Vec<Fcda> {
    ds.map(|d| d.entries.clone()).unwrap_or_default()
}

/// Assemble the configuration of the IED named by `settings`.
///
/// `icd` may be an ICD, CID or SCD; only the named IED, the templates and
/// its own communication entries are carried into the bundle.
pub fn generate_ied_config(
    icd: &SclDocument,
    map: &CyberPhysicalMapping,
    settings: &ProtectionSettings,
) -> Result<VirtualIedConfig, IedError> {
    let name = settings.ied_name.as_str();
    let ied: &Ied = icd.ied(name).ok_or_else(|| {
        let present: Vec<&str> = icd.ieds.iter().map(|i| i.name.as_str()).collect();
        IedError::InconsistentInputs(format!("settings are for IED {name:?}, the SCL document has {present:?}"))
    })?;

    let owned = CyberPhysicalMapping {
        entries: map.owned_by(name).cloned().collect(),
    };
    for e in &owned.entries {
        resolve_cyber_attr(icd, &e.cyber_attr)
            .map_err(|m| IedError::InconsistentInputs(format!("mapping {}: {m}", e.cyber_attr)))?;
    }
    for f in &settings.functions {
        resolve_cyber_attr(icd, &f.monitored)
            .map_err(|m| IedError::InconsistentInputs(format!("{} {}: {m}", f.class, f.monitored)))?;
        if owned.physical_for(&f.monitored).is_none() {
            return Err(IedError::InconsistentInputs(format!(
                "{} {} monitors {}, which no mapping entry feeds",
                f.class, f.instance, f.monitored
            )));
        }
    }

    let gse: Vec<&Gse> = icd
        .sub_networks()
        .iter()
        .flat_map(|sn| sn.connected_aps.iter())
        .filter(|c| c.ied_name == name)
        .flat_map(|c| c.gse.iter())
        .collect();
    let mut controls = ControlBlocks {
        report_controls: Vec::new(),
        goose_controls: Vec::new(),
    };
    for ld in ied.logical_devices() {
        for ln in &ld.logical_nodes {
            for rc in &ln.report_controls {
                controls.report_controls.push(ReportControlEntry {
                    ld_inst: ld.inst.clone(),
                    ln: ln.full_name(),
                    name: rc.name.clone(),
                    rpt_id: rc.rpt_id.clone(),
                    dat_set: rc.dat_set.clone(),
                    buffered: rc.buffered,
                    trg_ops: rc.trigger,
                    intg_pd: rc.integrity_period_ms,
                    data_set: data_set_entries(ln.data_set(&rc.dat_set)),
                });
            }
            for gc in &ln.goose_controls {
                controls.goose_controls.push(GooseControlEntry {
                    ld_inst: ld.inst.clone(),
                    ln: ln.full_name(),
                    name: gc.name.clone(),
                    app_id: gc.app_id.clone(),
                    dat_set: gc.dat_set.clone(),
                    conf_rev: gc.conf_rev,
                    data_set: data_set_entries(ln.data_set(&gc.dat_set)),
                    address: gse
                        .iter()
                        .find(|g| g.ld_inst == ld.inst && g.cb_name == gc.name)
                        .map(|g| GooseAddress::from(*g)),
                });
            }
        }
    }

    let mut server_model = SclDocument::new(SclKind::Icd, Header::new(format!("{name}-model")));
    server_model.root_attrs = icd.root_attrs.clone();
    server_model.ieds.push(ied.clone());
    server_model.data_type_templates = icd.data_type_templates.clone();
    let sub_networks: Vec<SubNetwork> = icd
        .sub_networks()
        .iter()
        .filter_map(|sn| {
            let aps: Vec<_> = sn.connected_aps.iter().filter(|c| c.ied_name == name).cloned().collect();
            (!aps.is_empty()).then(|| SubNetwork {
                connected_aps: aps,
                ..sn.clone()
            })
        })
        .collect();
    if !sub_networks.is_empty() {
        server_model.communication = Some(Communication {
            sub_networks,
            extra: Default::default(),
        });
    }
    server_model.kind = classify_model(&server_model).map_err(|e| IedError::InconsistentInputs(e.to_string()))?;

    Ok(VirtualIedConfig {
        ied_name: name.to_string(),
        server_model,
        controls,
        mapping: owned,
        settings: settings.clone(),
    })
}
