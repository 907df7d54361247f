use std::collections::{BTreeSet, HashSet};

use sgml_core::validate::{list_rules, validate_proprietary, DocumentKind, Severity};
use sgml_testkit::rules::{rule_cases, SCADA_OK, THRESHOLDS_OK};

#[test]
fn every_rule_has_a_passing_and_a_failing_fixture() {
    let cases = rule_cases();
    let mut covered = BTreeSet::new();
    for c in &cases {
        let rule = list_rules(c.kind)
            .into_iter()
            .find(|r| r.rule_id == c.rule_id)
            .unwrap_or_else(|| panic!("{} is not a {} rule", c.rule_id, c.kind));

        let ok = validate_proprietary(c.kind, c.passing.as_bytes()).unwrap();
        assert!(ok.errors.is_empty() && ok.warnings.is_empty(), "{}: {ok:?}", c.rule_id);

        let bad = validate_proprietary(c.kind, c.failing.as_bytes()).unwrap();
        let findings = match rule.severity {
            Severity::Error => &bad.errors,
            Severity::Warning => &bad.warnings,
        };
        assert!(
            findings.iter().any(|f| f.rule_id == c.rule_id && f.path == c.path),
            "{} at {}: {bad:?}",
            c.rule_id,
            c.path
        );
        assert!(
            bad.errors.iter().chain(&bad.warnings).all(|f| f.rule_id == c.rule_id),
            "{} fixture trips other rules: {bad:?}",
            c.rule_id
        );
        covered.insert(c.rule_id);
    }
    let all: BTreeSet<&str> = DocumentKind::ALL
        .into_iter()
        .flat_map(list_rules)
        .map(|r| r.rule_id)
        .collect();
    assert_eq!(covered, all);
}

#[test]
fn negative_period_cites_its_path() {
    let doc = THRESHOLDS_OK.replacen(r#"period="10""#, r#"period="-10""#, 1);
    let r = validate_proprietary(DocumentKind::Thresholds, doc.as_bytes()).unwrap();
    assert_eq!(r.errors.len(), 1);
    assert_eq!(r.errors[0].path, "/Settings/PTOV[1]/AlarmThreshold[1]/@period");
}

#[test]
fn dangling_source_reference_is_one_error() {
    let doc = SCADA_OK.replacen(r#"dataSourceXid="DS_2""#, r#"dataSourceXid="DS_9""#, 1);
    let r = validate_proprietary(DocumentKind::ScadaProject, doc.as_bytes()).unwrap();
    assert_eq!(r.errors.len(), 1);
    assert_eq!(r.errors[0].rule_id, "scada-point-source");
}

#[test]
fn rule_lists() {
    let ids = |k| list_rules(k).into_iter().map(|r| r.rule_id).collect::<Vec<_>>();
    assert!(ids(DocumentKind::ScadaProject).contains(&"xid-unique"));
    assert!(ids(DocumentKind::Thresholds).contains(&"trip-beyond-alarm"));
    let prefix = |id: &str| id.split('-').next().unwrap().to_string();
    let sets: Vec<HashSet<String>> = DocumentKind::ALL.into_iter().map(|k| ids(k).into_iter().map(prefix).collect()).collect();
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            assert!(a.is_disjoint(b));
        }
    }
}

#[test]
fn validation_is_pure() {
    for c in rule_cases() {
        let a = validate_proprietary(c.kind, c.failing.as_bytes()).unwrap();
        let b = validate_proprietary(c.kind, c.failing.as_bytes()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn malformed_xml_is_not_a_report() {
    assert!(validate_proprietary(DocumentKind::Mapping, b"<Mapping><Entry").is_err());
}
