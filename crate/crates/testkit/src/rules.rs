//! One passing and one failing document for every validation rule.

use sgml_core::validate::DocumentKind;

pub struct RuleCase {
    pub rule_id: &'static str,
    pub kind: DocumentKind,
    pub passing: String,
    pub failing: String,
    /// Element or attribute path the failing document must be reported at.
    pub path: &'static str,
}

pub const PARAMETERS_OK: &str = r#"<Parameters>
  <Equipment path="S1/V1/F1/LOAD1"><Param name="P" unit="MW" value="1.5"/><Param name="Q" unit="Mvar" value="0.2"/></Equipment>
  <Equipment path="S1/TR1"><Param name="S" unit="MVA" value="40"/></Equipment>
  <Equipment path="CB1"><Param name="closed" unit="bool" value="1"/></Equipment>
</Parameters>"#;

pub const MAPPING_OK: &str = r#"<Mapping>
  <Entry physicalAttr="Load0.Voltage.phsA" cyberAttr="IED1.MMXU1.PhV.phsA.cVal"/>
  <Entry physicalAttr="Load0.Current.phsA" cyberAttr="IED1.MMXU1.A.phsA.cVal"/>
</Mapping>"#;

pub const THRESHOLDS_OK: &str = r#"<Settings iedName="IED1" nominalVoltage="400" nominalCurrent="100" nominalPower="1000000">
  <PTOV instance="1" monitored="IED1.MMXU1.PhV.phsA.cVal" tripTarget="IED1.XCBR1.Pos">
    <AlarmThreshold pu="1.1" period="10"/>
    <TripThreshold pu="1.2" period="2"/>
  </PTOV>
  <PTUV instance="1" monitored="IED1.MMXU1.PhV.phsA.cVal">
    <AlarmThreshold value="320" period="10"/>
    <TripThreshold value="280" period="2"/>
  </PTUV>
  <PTOC type="51" instance="1" monitored="IED1.MMXU1.A.phsA.cVal"/>
  <PTOC type="50" instance="2" monitored="IED1.MMXU1.A.phsA.cVal" multiplier="3.5"/>
  <PDOP instance="1" monitored="IED1.MMXU1.TotW.mag.f" epsilon="0.01"/>
</Settings>"#;

pub const SCADA_OK: &str = r#"<project>
  <dataSources>
    <dataSource xid="DS_1" name="IED1" type="MODBUS_IP" updatePeriodType="SECONDS" updatePeriods="1" transportType="TCP" host="10.0.0.11" port="502">
      <dataPoint xid="DP_1" name="Va" range="HOLDING_REGISTER" offset="0" modbusDataType="FOUR_BYTE_FLOAT" engineeringUnits="VOLTS" dataSourceXid="DS_1" deviceName="IED1"/>
    </dataSource>
    <dataSource xid="DS_2" name="RTU" type="MODBUS_IP" updatePeriodType="MILLISECONDS" updatePeriods="500" transportType="TCP" host="rtu-2.local" port="5020"/>
  </dataSources>
  <dataPoints>
    <dataPoint xid="DP_2" name="Ia" range="INPUT_REGISTER" offset="2" modbusDataType="FOUR_BYTE_FLOAT" engineeringUnits="AMPS" dataSourceXid="DS_2" deviceName="RTU"/>
  </dataPoints>
</project>"#;

fn edit(base: &str, from: &str, to: &str) -> String {
    assert!(base.contains(from), "fixture edit {from:?} does not apply");
    base.replacen(from, to, 1)
}

pub fn rule_cases() -> Vec<RuleCase> {
    use DocumentKind::*;
    let case = |rule_id, kind, passing: &str, failing: String, path| RuleCase {
        rule_id,
        kind,
        passing: passing.to_string(),
        failing,
        path,
    };
    let p = PARAMETERS_OK;
    let m = MAPPING_OK;
    let t = THRESHOLDS_OK;
    let s = SCADA_OK;
    let ptov_trip = r#"<TripThreshold pu="1.2" period="2"/>"#;
    let src1 = r#"host="10.0.0.11" port="502""#;
    vec![
        case("param-root", ParameterSpec, p, "<Params/>".into(), "/Params"),
        case(
            "param-attrs",
            ParameterSpec,
            p,
            edit(p, r#"<Equipment path="S1/TR1">"#, "<Equipment>"),
            "/Parameters/Equipment[2]/@path",
        ),
        case(
            "param-equipment-path",
            ParameterSpec,
            p,
            edit(p, "S1/TR1", "S1/V1/F1"),
            "/Parameters/Equipment[2]/@path",
        ),
        case(
            "param-path-unique",
            ParameterSpec,
            p,
            edit(p, r#"path="CB1""#, r#"path="S1/TR1""#),
            "/Parameters/Equipment[3]/@path",
        ),
        case(
            "param-name-unique",
            ParameterSpec,
            p,
            edit(p, r#"name="Q""#, r#"name="P""#),
            "/Parameters/Equipment[1]/Param[2]/@name",
        ),
        case(
            "param-value-finite",
            ParameterSpec,
            p,
            edit(p, r#"value="40""#, r#"value="inf""#),
            "/Parameters/Equipment[2]/Param[1]/@value",
        ),
        case(
            "param-unit-known",
            ParameterSpec,
            p,
            edit(p, r#"unit="Mvar""#, r#"unit="furlong""#),
            "/Parameters/Equipment[1]/Param[2]/@unit",
        ),
        case(
            "param-unknown-element",
            ParameterSpec,
            p,
            edit(p, "</Parameters>", "<Note/></Parameters>"),
            "/Parameters/Note[1]",
        ),
        case("map-root", Mapping, m, "<Map/>".into(), "/Map"),
        case(
            "map-attrs",
            Mapping,
            m,
            edit(m, r#" cyberAttr="IED1.MMXU1.A.phsA.cVal""#, ""),
            "/Mapping/Entry[2]/@cyberAttr",
        ),
        case(
            "map-dotted-path",
            Mapping,
            m,
            edit(m, "Load0.Current.phsA", "Load0"),
            "/Mapping/Entry[2]/@physicalAttr",
        ),
        case(
            "map-physical-unique",
            Mapping,
            m,
            edit(m, "Load0.Current.phsA", "Load0.Voltage.phsA"),
            "/Mapping/Entry[2]/@physicalAttr",
        ),
        case(
            "map-cyber-unique",
            Mapping,
            m,
            edit(m, "IED1.MMXU1.A.phsA.cVal", "IED1.MMXU1.PhV.phsA.cVal"),
            "/Mapping/Entry[2]/@cyberAttr",
        ),
        case(
            "map-unknown-element",
            Mapping,
            m,
            edit(m, "</Mapping>", "<Comment/></Mapping>"),
            "/Mapping/Comment[1]",
        ),
        case("threshold-root", Thresholds, t, edit(t, r#"iedName="IED1""#, r#"iedName="""#), "/Settings/@iedName"),
        case(
            "threshold-base-positive",
            Thresholds,
            t,
            edit(t, r#"nominalCurrent="100""#, r#"nominalCurrent="-100""#),
            "/Settings/@nominalCurrent",
        ),
        case(
            "threshold-base-required",
            Thresholds,
            t,
            edit(t, r#" nominalPower="1000000""#, ""),
            "/Settings/PDOP[1]",
        ),
        case(
            "threshold-ptoc-type",
            Thresholds,
            t,
            edit(t, r#"type="51""#, r#"type="49""#),
            "/Settings/PTOC[1]/@type",
        ),
        case(
            "threshold-instance",
            Thresholds,
            t,
            edit(t, r#"<PDOP instance="1""#, r#"<PDOP instance="zero""#),
            "/Settings/PDOP[1]/@instance",
        ),
        case(
            "threshold-instance-unique",
            Thresholds,
            t,
            edit(t, r#"type="50" instance="2""#, r#"type="51" instance="1""#),
            "/Settings/PTOC[2]/@instance",
        ),
        case(
            "threshold-monitored-ied",
            Thresholds,
            t,
            edit(t, r#"monitored="IED1.MMXU1.TotW.mag.f""#, r#"monitored="IED2.MMXU1.TotW.mag.f""#),
            "/Settings/PDOP[1]/@monitored",
        ),
        case(
            "threshold-trip-target",
            Thresholds,
            t,
            edit(t, r#"tripTarget="IED1.XCBR1.Pos""#, r#"tripTarget="XCBR1""#),
            "/Settings/PTOV[1]/@tripTarget",
        ),
        case(
            "threshold-trip-present",
            Thresholds,
            t,
            edit(t, ptov_trip, ""),
            "/Settings/PTOV[1]",
        ),
        case(
            "threshold-value-positive",
            Thresholds,
            t,
            edit(t, ptov_trip, r#"<TripThreshold pu="-1.2" period="2"/>"#),
            "/Settings/PTOV[1]/TripThreshold[1]/@pu",
        ),
        case(
            "threshold-period-nonneg",
            Thresholds,
            t,
            edit(t, ptov_trip, r#"<TripThreshold pu="1.2" period="-2"/>"#),
            "/Settings/PTOV[1]/TripThreshold[1]/@period",
        ),
        case(
            "trip-beyond-alarm",
            Thresholds,
            t,
            edit(t, r#"value="280""#, r#"value="340""#),
            "/Settings/PTUV[1]/TripThreshold[1]",
        ),
        case(
            "threshold-multiplier-range",
            Thresholds,
            t,
            edit(t, r#"multiplier="3.5""#, r#"multiplier="5""#),
            "/Settings/PTOC[2]/@multiplier",
        ),
        case(
            "threshold-unknown-element",
            Thresholds,
            t,
            edit(t, "</Settings>", "<PTTR instance=\"1\"/></Settings>"),
            "/Settings/PTTR[1]",
        ),
        case("scada-root", ScadaProject, s, "<project/>".into(), "/project"),
        case(
            "scada-source-attrs",
            ScadaProject,
            s,
            edit(s, r#" transportType="TCP" host="rtu-2.local""#, r#" host="rtu-2.local""#),
            "/project/dataSources[1]/dataSource[2]/@transportType",
        ),
        case(
            "scada-port-range",
            ScadaProject,
            s,
            edit(s, src1, r#"host="10.0.0.11" port="70000""#),
            "/project/dataSources[1]/dataSource[1]/@port",
        ),
        case(
            "scada-host",
            ScadaProject,
            s,
            edit(s, src1, r#"host="not a host" port="502""#),
            "/project/dataSources[1]/dataSource[1]/@host",
        ),
        case(
            "scada-update-periods",
            ScadaProject,
            s,
            edit(s, r#"updatePeriods="500""#, r#"updatePeriods="0""#),
            "/project/dataSources[1]/dataSource[2]/@updatePeriods",
        ),
        case(
            "scada-period-type",
            ScadaProject,
            s,
            edit(s, r#"updatePeriodType="MILLISECONDS""#, r#"updatePeriodType="FORTNIGHTS""#),
            "/project/dataSources[1]/dataSource[2]/@updatePeriodType",
        ),
        case(
            "scada-point-attrs",
            ScadaProject,
            s,
            edit(s, r#" range="INPUT_REGISTER""#, ""),
            "/project/dataPoints[1]/dataPoint[1]/@range",
        ),
        case(
            "scada-offset",
            ScadaProject,
            s,
            edit(s, r#"offset="0""#, r#"offset="-1""#),
            "/project/dataSources[1]/dataSource[1]/dataPoint[1]/@offset",
        ),
        case(
            "scada-point-source",
            ScadaProject,
            s,
            edit(s, r#"dataSourceXid="DS_2""#, r#"dataSourceXid="DS_9""#),
            "/project/dataPoints[1]/dataPoint[1]/@dataSourceXid",
        ),
        case(
            "scada-point-owner",
            ScadaProject,
            s,
            edit(s, r#"dataSourceXid="DS_1" deviceName="IED1""#, r#"dataSourceXid="DS_1" deviceName="RTU""#),
            "/project/dataSources[1]/dataSource[1]/dataPoint[1]/@deviceName",
        ),
        case(
            "xid-unique",
            ScadaProject,
            s,
            edit(s, r#"xid="DP_2""#, r#"xid="DS_1""#),
            "/project/dataPoints[1]/dataPoint[1]/@xid",
        ),
        case(
            "scada-unknown-element",
            ScadaProject,
            s,
            edit(s, "</project>", "<comment/></project>"),
            "/project/comment[1]",
        ),
    ]
}
