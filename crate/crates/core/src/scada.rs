//! SCADA project configuration: the proprietary XML and the flattened JSON
//! the SCADA tool imports.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::validate::{self, DocumentKind, ValidationReport, POINT_ATTRS, SOURCE_ATTRS};
use crate::xml::{self, Element, XmlError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScadaError {
    #[error(transparent)]
    MalformedXml(#[from] XmlError),
    #[error("dataPoint {point:?} refers to unknown dataSource {xid:?}")]
    DanglingDataSourceXid { point: String, xid: String },
    #[error("SCADA file failed validation with {} error(s)", .0.errors.len())]
    ValidationFailed(ValidationReport),
    #[error("SCADA JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DataSource {
    pub xid: String,
    pub name: String,
    #[serde(rename = "type")]
    pub source_type: String,
    pub update_period_type: String,
    pub update_periods: u32,
    pub transport_type: String,
    pub host: String,
    pub port: u16,
    /// Attributes beyond the fixed set, carried through unchanged.
    #[serde(flatten)]
    pub extra: BTreeMap<String, String>,
    #[serde(skip)]
    pub data_points: Vec<DataPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DataPoint {
    pub xid: String,
    pub name: String,
    pub range: String,
    pub offset: u32,
    pub modbus_data_type: String,
    pub engineering_units: String,
    pub data_source_xid: String,
    pub device_name: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScadaProject {
    pub data_sources: Vec<DataSource>,
}

impl ScadaProject {
    pub fn point_count(&self) -> usize {
        self.data_sources.iter().map(|s| s.data_points.len()).sum()
    }

    /// Nested XML form: every point inside its source.
    pub fn to_xml(&self) -> String {
        let mut sources = Element::new("dataSources");
        for s in &self.data_sources {
            let mut el = Element::new("dataSource")
                .with_attr("xid", &s.xid)
                .with_attr("name", &s.name)
                .with_attr("type", &s.source_type)
                .with_attr("updatePeriodType", &s.update_period_type)
                .with_attr("updatePeriods", s.update_periods.to_string())
                .with_attr("transportType", &s.transport_type)
                .with_attr("host", &s.host)
                .with_attr("port", s.port.to_string());
            el.attrs.extend(s.extra.iter().map(|(k, v)| (k.clone(), v.clone())));
            for p in &s.data_points {
                let mut pe = Element::new("dataPoint")
                    .with_attr("xid", &p.xid)
                    .with_attr("name", &p.name)
                    .with_attr("range", &p.range)
                    .with_attr("offset", p.offset.to_string())
                    .with_attr("modbusDataType", &p.modbus_data_type)
                    .with_attr("engineeringUnits", &p.engineering_units)
                    .with_attr("dataSourceXid", &p.data_source_xid)
                    .with_attr("deviceName", &p.device_name);
                pe.attrs.extend(p.extra.iter().map(|(k, v)| (k.clone(), v.clone())));
                el.children.push(pe);
            }
            sources.children.push(el);
        }
        let root = Element::new("project").with_child(sources);
        format!("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n{}", root.to_xml_string())
    }
}

fn extra_attrs(el: &Element, known: &[&str]) -> BTreeMap<String, String> {
    el.attrs
        .iter()
        .filter(|(k, _)| !known.contains(&k.as_str()))
        .cloned()
        .collect()
}

fn point_from(el: &Element) -> DataPoint {
    let a = |k: &str| el.attr(k).unwrap_or("").to_string();
    DataPoint {
        xid: a("xid"),
        name: a("name"),
        range: a("range"),
        offset: el.attr("offset").and_then(|v| v.trim().parse().ok()).unwrap_or(0),
        modbus_data_type: a("modbusDataType"),
        engineering_units: a("engineeringUnits"),
        data_source_xid: a("dataSourceXid"),
        device_name: a("deviceName"),
        extra: extra_attrs(el, &POINT_ATTRS),
    }
}

/// Parse a validated project. Points listed in a flat `dataPoints` section
/// are attached to their source after its nested points.
pub fn parse_scada_xml(bytes: &[u8]) -> Result<ScadaProject, ScadaError> {
    let doc = xml::parse(bytes)?;
    let root = &doc.root;
    let source_xids: HashSet<&str> = root
        .children_named("dataSources")
        .flat_map(|s| s.children_named("dataSource"))
        .filter_map(|s| s.attr("xid"))
        .collect();
    let all_points = root
        .children_named("dataSources")
        .flat_map(|s| s.children_named("dataSource"))
        .flat_map(|s| s.children_named("dataPoint"))
        .chain(root.children_named("dataPoints").flat_map(|s| s.children_named("dataPoint")));
    for p in all_points {
        if let Some(x) = p.attr("dataSourceXid") {
            if !source_xids.contains(x) {
                return Err(ScadaError::DanglingDataSourceXid {
                    point: p.attr("xid").unwrap_or("").to_string(),
                    xid: x.to_string(),
                });
            }
        }
    }
    let report = validate::validate_element(DocumentKind::ScadaProject, root);
    if !report.valid() {
        return Err(ScadaError::ValidationFailed(report));
    }

    let mut project = ScadaProject::default();
    for el in root.children_named("dataSources").flat_map(|s| s.children_named("dataSource")) {
        let a = |k: &str| el.attr(k).unwrap_or("").to_string();
        project.data_sources.push(DataSource {
            xid: a("xid"),
            name: a("name"),
            source_type: a("type"),
            update_period_type: a("updatePeriodType"),
            update_periods: el.attr("updatePeriods").and_then(|v| v.trim().parse().ok()).unwrap_or(1),
            transport_type: a("transportType"),
            host: a("host"),
            port: el.attr("port").and_then(|v| v.trim().parse().ok()).unwrap_or(1),
            extra: extra_attrs(el, &SOURCE_ATTRS),
            data_points: el.children_named("dataPoint").map(point_from).collect(),
        });
    }
    for p in root.children_named("dataPoints").flat_map(|s| s.children_named("dataPoint")) {
        let point = point_from(p);
        if let Some(src) = project.data_sources.iter_mut().find(|s| s.xid == point.data_source_xid) {
            src.data_points.push(point);
        }
    }
    Ok(project)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ScadaJson {
    data_sources: Vec<DataSource>,
    data_points: Vec<DataPoint>,
}

/// Flattened JSON: a `dataSources` array and a `dataPoints` array whose
/// entries point back through `dataSourceXid`. Two-space indentation; the
/// empty project is written as `{"dataSources":[],"dataPoints":[]}`.
pub fn scada_to_json(project: &ScadaProject) -> Vec<u8> {
    if project.data_sources.is_empty() {
        return br#"{"dataSources":[],"dataPoints":[]}"#.to_vec();
    }
    let file = ScadaJson {
        data_sources: project.data_sources.clone(),
        data_points: project
            .data_sources
            .iter()
            .flat_map(|s| s.data_points.iter().cloned())
            .collect(),
    };
    serde_json::to_vec_pretty(&file).expect("project serializes")
}

/// Rebuild a project from [`scada_to_json`] output.
pub fn scada_from_json(bytes: &[u8]) -> Result<ScadaProject, ScadaError> {
    let file: ScadaJson = serde_json::from_slice(bytes).map_err(|e| ScadaError::Json(e.to_string()))?;
    let mut project = ScadaProject {
        data_sources: file.data_sources,
    };
    for p in file.data_points {
        let Some(src) = project.data_sources.iter_mut().find(|s| s.xid == p.data_source_xid) else {
            return Err(ScadaError::DanglingDataSourceXid {
                point: p.xid,
                xid: p.data_source_xid,
            });
        };
        src.data_points.push(p);
    }
    Ok(project)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_SOURCE: &str = r#"<project><dataSources>
      <dataSource xid="DS_1" name="IED1" type="MODBUS_IP" updatePeriodType="SECONDS" updatePeriods="1"
                  transportType="TCP" host="10.0.0.11" port="502">
        <dataPoint xid="DP_1" name="Va" range="HOLDING_REGISTER" offset="0" modbusDataType="FOUR_BYTE_FLOAT"
                   engineeringUnits="VOLTS" dataSourceXid="DS_1" deviceName="IED1"/>
        <dataPoint xid="DP_2" name="Ia" range="HOLDING_REGISTER" offset="2" modbusDataType="FOUR_BYTE_FLOAT"
                   engineeringUnits="AMPS" dataSourceXid="DS_1" deviceName="IED1" slaveId="3"/>
      </dataSource></dataSources></project>"#;

    #[test]
    fn one_source_two_points() {
        let p = parse_scada_xml(ONE_SOURCE.as_bytes()).unwrap();
        assert_eq!((p.data_sources.len(), p.point_count()), (1, 2));
        let json: serde_json::Value = serde_json::from_slice(&scada_to_json(&p)).unwrap();
        assert_eq!(json["dataSources"].as_array().unwrap().len(), 1);
        assert_eq!(json["dataPoints"].as_array().unwrap().len(), 2);
        assert_eq!(json["dataPoints"][1]["slaveId"], "3");
        assert_eq!(scada_from_json(&scada_to_json(&p)).unwrap(), p);
    }

    #[test]
    fn dangling_source_reference() {
        let bad = ONE_SOURCE.replacen(r#"dataSourceXid="DS_1" deviceName="IED1"/>"#, r#"dataSourceXid="DS_9" deviceName="IED1"/>"#, 1);
        assert!(matches!(
            parse_scada_xml(bad.as_bytes()),
            Err(ScadaError::DanglingDataSourceXid { xid, .. }) if xid == "DS_9"
        ));
    }

    #[test]
    fn empty_project() {
        let p = parse_scada_xml(b"<project><dataSources/></project>").unwrap();
        assert_eq!(p, ScadaProject::default());
        assert_eq!(scada_to_json(&p), br#"{"dataSources":[],"dataPoints":[]}"#);
    }

    #[test]
    fn xml_writer_round_trips() {
        let p = parse_scada_xml(ONE_SOURCE.as_bytes()).unwrap();
        assert_eq!(parse_scada_xml(p.to_xml().as_bytes()).unwrap(), p);
    }
}
