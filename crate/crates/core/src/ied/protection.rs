use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::mapping::CyberPhysicalMapping;
use super::settings::{ProtectionClass, ProtectionFunction, ProtectionSettings};
use super::IedError;

/// Slack for floating-point comparisons of instants, in seconds.
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub timestamp: f64,
    pub physical_attr: String,
    pub value: f64,
}

impl Measurement {
    pub fn new(timestamp: f64, physical_attr: impl Into<String>, value: f64) -> Self {
        Measurement {
            timestamp,
            physical_attr: physical_attr.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventKind {
    Alarm,
    Trip,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Alarm => "ALARM",
            EventKind::Trip => "TRIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtectionEvent {
    #[serde(rename = "t")]
    pub timestamp: f64,
    #[serde(rename = "ied")]
    pub ied_name: String,
    #[serde(rename = "fn")]
    pub class: ProtectionClass,
    #[serde(rename = "inst")]
    pub instance: u32,
    pub kind: EventKind,
    pub target: Option<String>,
}

/// One JSON object per line, LF terminated.
pub fn events_to_jsonl(events: &[ProtectionEvent]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
        .collect()
}

/// Piecewise-constant signal: each sample holds until the next one, the
/// last one indefinitely. Samples at equal instants keep the latest value.
fn segments(samples: &[(f64, f64)]) -> Vec<(f64, f64, f64)> {
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for &(t, v) in samples {
        match points.last_mut() {
            Some(last) if last.0 == t => last.1 = v,
            _ => points.push((t, v)),
        }
    }
    (0..points.len())
        .map(|i| {
            let end = points.get(i + 1).map_or(f64::INFINITY, |p| p.0);
            (points[i].0, end, points[i].1)
        })
        .collect()
}

/// Evaluate one function over a per-unit signal.
///
/// An episode is a maximal interval in which the alarm or the trip
/// condition holds. Each condition fires once it has held without a break
/// for its period; an alarm fires at most once per episode and a trip ends
/// the episode, so nothing else fires until the conditions clear.
fn evaluate_function(f: &ProtectionFunction, samples: &[(f64, f64)]) -> Vec<(f64, EventKind)> {
    let mut out = Vec::new();
    let mut in_episode = false;
    let mut alarmed = false;
    let mut tripped = false;
    let mut alarm_since: Option<f64> = None;
    let mut trip_since: Option<f64> = None;
    for (start, end, x) in segments(samples) {
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
        alarm_since = if a { alarm_since.or(Some(start)) } else { None };
        trip_since = if c { trip_since.or(Some(start)) } else { None };
        if tripped {
            continue;
        }
        let due = |since: Option<f64>, period: f64| {
            since
                .map(|s| s + period)
                .filter(|t| *t < end - EPS)
                .map(|t| t.max(start))
        };
        let alarm_at = if alarmed {
            None
        } else {
            f.alarm.and_then(|p| due(alarm_since, p.period_seconds))
        };
        let trip_at = due(trip_since, f.trip.period_seconds);
        match (alarm_at, trip_at) {
            (Some(ta), Some(tt)) if ta <= tt => {
                out.push((ta, EventKind::Alarm));
                out.push((tt, EventKind::Trip));
                tripped = true;
            }
            (_, Some(tt)) => {
                out.push((tt, EventKind::Trip));
                tripped = true;
            }
            (Some(ta), None) => {
                out.push((ta, EventKind::Alarm));
                alarmed = true;
            }
            (None, None) => {}
        }
    }
    out
}

/// Run every configured function over the measurement stream.
///
/// Each function reads the physical attribute its monitored data attribute
/// is mapped to, normalized on the function's per-unit base. Events are
/// ordered by time, then by function order in the settings, alarms before
/// trips.
pub fn evaluate_protection(
    settings: &ProtectionSettings,
    stream: &[Measurement],
    mapping: &CyberPhysicalMapping,
) -> Result<Vec<ProtectionEvent>, IedError> {
    let mut last = f64::NEG_INFINITY;
    for m in stream {
        if !m.timestamp.is_finite() || !m.value.is_finite() {
            return Err(IedError::InvalidMeasurement(format!(
                "{} at t={} is not finite",
                m.physical_attr, m.timestamp
            )));
        }
        if m.timestamp < last {
            return Err(IedError::InvalidMeasurement(format!(
                "timestamp {} follows {}",
                m.timestamp, last
            )));
        }
        last = m.timestamp;
    }
    let mut by_attr: HashMap<&str, Vec<(f64, f64)>> = HashMap::new();
    for m in stream {
        by_attr
            .entry(m.physical_attr.as_str())
            .or_default()
            .push((m.timestamp, m.value));
    }

    let mut tagged = Vec::new();
    for (order, f) in settings.functions.iter().enumerate() {
        let physical = mapping
            .physical_for(&f.monitored)
            .ok_or_else(|| IedError::UnmappedAttribute(f.monitored.clone()))?;
        let base = settings.base(f.class).ok_or_else(|| IedError::MissingBase {
            function: f.class.to_string(),
            base: f.class.base_attr().to_string(),
        })?;
        let Some(raw) = by_attr.get(physical) else { continue };
        let pu: Vec<(f64, f64)> = raw.iter().map(|&(t, v)| (t, v / base)).collect();
        for (t, kind) in evaluate_function(f, &pu) {
            tagged.push((
                t,
                order,
                kind,
                ProtectionEvent {
                    timestamp: t,
                    ied_name: settings.ied_name.clone(),
                    class: f.class,
                    instance: f.instance,
                    kind,
                    target: match kind {
                        EventKind::Trip => f.trip_target.clone(),
                        EventKind::Alarm => None,
                    },
                },
            ));
        }
    }
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(tagged.into_iter().map(|(_, _, _, e)| e).collect())
}
