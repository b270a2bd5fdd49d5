use holocalc::scenario::{
    emit, load_scenario, parse_report, parse_scenario, run, Format, LoadError, LoadOptions, Status, TruncationSource,
    FOLIATION_SCENARIO, REGISTRY,
};
use std::path::PathBuf;

fn bundled() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/foliation.scn")
}

#[test]
fn bundled_file_matches_embedded_copy() {
    assert_eq!(std::fs::read_to_string(bundled()).unwrap(), FOLIATION_SCENARIO);
    let s = load_scenario(&bundled(), LoadOptions::default()).unwrap();
    assert_eq!(s.truncation.source, TruncationSource::Scenario);
}

#[test]
fn every_result_is_ok_and_labelled() {
    let s = load_scenario(&bundled(), LoadOptions::default()).unwrap();
    let r = run(&s, true);
    for q in &r.results {
        assert_eq!(q.status, Status::Ok, "{q:?}");
        assert!(REGISTRY.iter().any(|o| o.name == q.op && o.basis == q.basis));
    }
    let json = emit(&r, Format::Json);
    assert_eq!(parse_report(&json).unwrap(), r);
}

#[test]
fn missing_file_is_io() {
    assert!(matches!(load_scenario(&bundled().with_extension("nope"), LoadOptions::default()), Err(LoadError::Io(_))));
}

#[test]
fn all_errors_are_collected() {
    let bad = r#"{"delta_gap": "1/100",
        "curves": [{"curve": {"id": "x", "c1_rel": 0, "surface": {"genus": 0, "punctures": [{"id": "a", "sign": "+"}]},
                              "orbit_at": {"a": "missing"}}}],
        "queries": [{"id": "q1", "op": "fredholm_index", "args": {"curve": "nobody"}},
                    {"id": "q2", "op": "k_bound", "args": {"c": 1}}]}"#;
    let Err(LoadError::Invalid(es)) = parse_scenario(bad, LoadOptions::default()) else { panic!() };
    let text: Vec<String> = es.iter().map(ToString::to_string).collect();
    assert!(text.iter().any(|e| e.contains("curves.x.orbit_at.a")), "{text:?}");
    assert!(text.iter().any(|e| e.contains("queries[0]") && e.contains("nobody")), "{text:?}");
    assert!(text.iter().any(|e| e.contains("queries[1].args")), "{text:?}");
}

#[test]
fn query_kinds_are_unique_and_documented() {
    for op in REGISTRY {
        assert!(!op.basis.is_empty());
        assert_eq!(REGISTRY.iter().filter(|o| o.name == op.name).count(), 1);
    }
}
