use std::fmt;

use serde::{Serialize, Serializer};

use crate::validate::{self, DocumentKind};
use crate::xml::{self, Element};

use super::IedError;

/// Protection function classes with separate settings; over-current is
/// split into its instantaneous (50) and time-delayed (51) elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtectionClass {
    Ptoc50,
    Ptoc51,
    Ptov,
    Ptuv,
    Pdop,
}

impl ProtectionClass {
    pub const ALL: [ProtectionClass; 5] = [
        ProtectionClass::Ptoc50,
        ProtectionClass::Ptoc51,
        ProtectionClass::Ptov,
        ProtectionClass::Ptuv,
        ProtectionClass::Pdop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtectionClass::Ptoc50 => "PTOC50",
            ProtectionClass::Ptoc51 => "PTOC51",
            ProtectionClass::Ptov => "PTOV",
            ProtectionClass::Ptuv => "PTUV",
            ProtectionClass::Pdop => "PDOP",
        }
    }

    /// The IEC 61850 logical node class.
    pub fn ln_class(self) -> &'static str {
        match self {
            ProtectionClass::Ptoc50 | ProtectionClass::Ptoc51 => "PTOC",
            ProtectionClass::Ptov => "PTOV",
            ProtectionClass::Ptuv => "PTUV",
            ProtectionClass::Pdop => "PDOP",
        }
    }

    /// Settings attribute holding the per-unit base of the measurement.
    pub fn base_attr(self) -> &'static str {
        match self {
            ProtectionClass::Ptoc50 | ProtectionClass::Ptoc51 => "nominalCurrent",
            ProtectionClass::Ptov | ProtectionClass::Ptuv => "nominalVoltage",
            ProtectionClass::Pdop => "nominalPower",
        }
    }

    fn from_element(el: &Element) -> Option<ProtectionClass> {
        Some(match (el.local_name(), el.attr("type")) {
            ("PTOC", Some("50")) => ProtectionClass::Ptoc50,
            ("PTOC", Some("51")) => ProtectionClass::Ptoc51,
            ("PTOV", _) => ProtectionClass::Ptov,
            ("PTUV", _) => ProtectionClass::Ptuv,
            ("PDOP", _) => ProtectionClass::Pdop,
            _ => return None,
        })
    }

    /// Whether per-unit value `x` violates `level`.
    pub fn violates(self, x: f64, level: f64) -> bool {
        match self {
            ProtectionClass::Ptoc50 | ProtectionClass::Ptoc51 | ProtectionClass::Ptov => x >= level,
            ProtectionClass::Ptuv => x <= level,
            ProtectionClass::Pdop => x <= -level,
        }
    }
}

impl fmt::Display for ProtectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ProtectionClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Values used where a settings file leaves a function parameter out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtectionDefaults {
    /// Instantaneous over-current pickup as a multiple of nominal current.
    pub ptoc50_multiplier: f64,
    pub ptoc51_pickup: f64,
    pub ptoc51_period: f64,
    /// Reverse power pickup in p.u. of nominal power.
    pub pdop_epsilon: f64,
}

impl Default for ProtectionDefaults {
    fn default() -> Self {
        ProtectionDefaults {
            ptoc50_multiplier: 3.5,
            ptoc51_pickup: 1.05,
            ptoc51_period: 1.0,
            pdop_epsilon: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdPair {
    /// Per-unit level (a multiple of nominal current for PTOC50).
    pub value: f64,
    pub period_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProtectionFunction {
    pub class: ProtectionClass,
    pub instance: u32,
    pub alarm: Option<ThresholdPair>,
    pub trip: ThresholdPair,
    pub monitored: String,
    pub trip_target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProtectionSettings {
    pub ied_name: String,
    pub nominal_current: Option<f64>,
    pub nominal_voltage: Option<f64>,
    pub nominal_power: Option<f64>,
    pub functions: Vec<ProtectionFunction>,
}

impl ProtectionSettings {
    pub fn base(&self, class: ProtectionClass) -> Option<f64> {
        match class {
            ProtectionClass::Ptoc50 | ProtectionClass::Ptoc51 => self.nominal_current,
            ProtectionClass::Ptov | ProtectionClass::Ptuv => self.nominal_voltage,
            ProtectionClass::Pdop => self.nominal_power,
        }
    }

    /// Write back in normalized per-unit form; parsing the result yields
    /// an equal value.
    pub fn to_xml(&self) -> String {
        let mut root = Element::new("Settings").with_attr("iedName", &self.ied_name);
        for (attr, v) in [
            ("nominalCurrent", self.nominal_current),
            ("nominalVoltage", self.nominal_voltage),
            ("nominalPower", self.nominal_power),
        ] {
            if let Some(v) = v {
                root.set_attr(attr, v.to_string());
            }
        }
        for f in &self.functions {
            let mut el = Element::new(f.class.ln_class());
            match f.class {
                ProtectionClass::Ptoc50 => el.set_attr("type", "50"),
                ProtectionClass::Ptoc51 => el.set_attr("type", "51"),
                _ => {}
            }
            el.set_attr("instance", f.instance.to_string());
            el.set_attr("monitored", &f.monitored);
            if let Some(t) = &f.trip_target {
                el.set_attr("tripTarget", t);
            }
            let pair = |name: &str, p: &ThresholdPair| {
                Element::new(name)
                    .with_attr("pu", p.value.to_string())
                    .with_attr("period", p.period_seconds.to_string())
            };
            if let Some(a) = &f.alarm {
                el.children.push(pair("AlarmThreshold", a));
            }
            el.children.push(pair("TripThreshold", &f.trip));
            root.children.push(el);
        }
        format!("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n{}", root.to_xml_string())
    }
}

pub fn parse_settings(bytes: &[u8]) -> Result<ProtectionSettings, IedError> {
    parse_settings_with(bytes, &ProtectionDefaults::default())
}

/// Parse a thresholds file, normalizing absolute levels to per-unit on the
/// declared bases.
pub fn parse_settings_with(bytes: &[u8], defaults: &ProtectionDefaults) -> Result<ProtectionSettings, IedError> {
    let doc = xml::parse(bytes)?;
    let root = &doc.root;
    for f in &root.children {
        if let Some(class) = ProtectionClass::from_element(f) {
            if root.attr(class.base_attr()).is_none() {
                return Err(IedError::MissingBase {
                    function: class.to_string(),
                    base: class.base_attr().to_string(),
                });
            }
        }
    }
    let report = validate::validate_element(DocumentKind::Thresholds, root);
    if !report.valid() {
        return Err(IedError::ValidationFailed(report));
    }
    let num = |el: &Element, attr: &str| el.attr(attr).and_then(|v| v.trim().parse::<f64>().ok());
    let mut settings = ProtectionSettings {
        ied_name: root.attr("iedName").unwrap_or("").to_string(),
        nominal_current: num(root, "nominalCurrent"),
        nominal_voltage: num(root, "nominalVoltage"),
        nominal_power: num(root, "nominalPower"),
        functions: Vec::new(),
    };
    for f in &root.children {
        let Some(class) = ProtectionClass::from_element(f) else { continue };
        let base = settings.base(class).unwrap_or(1.0);
        let pair = |name: &str| {
            f.child(name).map(|t| ThresholdPair {
                value: num(t, "pu").or_else(|| num(t, "value").map(|v| v / base)).unwrap_or(0.0),
                period_seconds: num(t, "period").unwrap_or(0.0),
            })
        };
        let trip = pair("TripThreshold").unwrap_or_else(|| match class {
            ProtectionClass::Ptoc50 => ThresholdPair {
                value: num(f, "multiplier").unwrap_or(defaults.ptoc50_multiplier),
                period_seconds: 0.0,
            },
            ProtectionClass::Ptoc51 => ThresholdPair {
                value: defaults.ptoc51_pickup,
                period_seconds: defaults.ptoc51_period,
            },
            ProtectionClass::Pdop => ThresholdPair {
                value: num(f, "epsilon").unwrap_or(defaults.pdop_epsilon),
                period_seconds: 0.0,
            },
            // validation requires a trip threshold for the voltage functions
            ProtectionClass::Ptov | ProtectionClass::Ptuv => unreachable!("validated"),
        });
        settings.functions.push(ProtectionFunction {
            class,
            instance: f.attr("instance").and_then(|i| i.trim().parse().ok()).unwrap_or(1),
            alarm: pair("AlarmThreshold"),
            trip,
            monitored: f.attr("monitored").unwrap_or("").to_string(),
            trip_target: f.attr("tripTarget").map(str::to_string),
        });
    }
    Ok(settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absolute_levels_are_normalized() {
        let s = parse_settings(
            br#"<Settings iedName="IED1" nominalVoltage="400">
                 <PTOV instance="1" monitored="IED1.MMXU1.PhV.phsA.cVal">
                   <AlarmThreshold value="440" period="10"/><TripThreshold pu="1.2" period="2"/>
                 </PTOV></Settings>"#,
        )
        .unwrap();
        let f = &s.functions[0];
        assert!((f.alarm.unwrap().value - 1.1).abs() < 1e-12);
        assert_eq!(f.trip.value, 1.2);
    }

    #[test]
    fn missing_base_is_its_own_error() {
        let err = parse_settings(br#"<Settings iedName="I"><PTOC type="50" instance="1" monitored="I.PTOC1.A"/></Settings>"#)
            .unwrap_err();
        assert!(matches!(err, IedError::MissingBase { .. }));
    }

    #[test]
    fn defaults_fill_omitted_over_current_levels() {
        let s = parse_settings(
            br#"<Settings iedName="I" nominalCurrent="100">
                 <PTOC type="50" instance="1" monitored="I.MMXU1.A.phsA"/>
                 <PTOC type="51" instance="1" monitored="I.MMXU1.A.phsA"/></Settings>"#,
        )
        .unwrap();
        assert_eq!(s.functions[0].trip, ThresholdPair { value: 3.5, period_seconds: 0.0 });
        assert_eq!(s.functions[1].trip, ThresholdPair { value: 1.05, period_seconds: 1.0 });
    }

    #[test]
    fn xml_round_trip() {
        let s = parse_settings(
            br#"<Settings iedName="I" nominalVoltage="1" nominalPower="5">
                 <PTUV instance="2" monitored="I.MMXU1.PhV" tripTarget="I.XCBR1.Pos">
                   <AlarmThreshold pu="0.8" period="10"/><TripThreshold pu="0.7" period="2"/></PTUV>
                 <PDOP instance="1" monitored="I.MMXU1.TotW" epsilon="0.02"/></Settings>"#,
        )
        .unwrap();
        assert_eq!(parse_settings(s.to_xml().as_bytes()).unwrap(), s);
    }
}
