//! Bundle validation, report emission, batch mode and the discriminant filter.

mod common;

use std::path::Path;

use rug::Integer;
use serde_json::Value;
use starkq::pipeline::{self, Bound, Bundle, BundleError, Config, StageStatus, VerificationReport};

use common::*;

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&v).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::Validator, doc: &str, what: &str) {
    let inst: Value = serde_json::from_str(doc).unwrap();
    let errors: Vec<String> = v
        .iter_errors(&inst)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{what}: {errors:?}");
}

fn report(name: &str) -> VerificationReport {
    pipeline::run_pipeline(&pipeline::fixture_bundle(name).unwrap(), &Config::with_precision(128)).unwrap()
}

fn validation_issues(b: &Bundle) -> Vec<String> {
    match b.validate(128) {
        Err(BundleError::Validation(v)) => v,
        other => panic!("expected a validation error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn fixtures_parse_and_validate() {
    for name in FIXTURES {
        let b = pipeline::fixture_bundle(name).unwrap();
        let ctx = b.validate(128).unwrap();
        assert!(ctx.warnings.is_empty(), "{name}: {:?}", ctx.warnings);
        assert_eq!(Bundle::from_json(&b.to_json()).unwrap(), b);
    }
}

#[test]
fn golden_reports() {
    let r = report("sqrt3");
    assert_eq!(r.beta.as_ref().unwrap().d, "1393");
    assert_eq!(r.index.as_ref().unwrap().m, "3698415");
    assert_eq!(r.popescu_ok(), Some(true));
    assert!(r.lowest_statement().is_some_and(|s| s <= 1));
    assert!(r.all_verdicts_true());

    let r = report("sqrt10");
    assert_eq!(r.bundle.rank, 1);
    assert_eq!(r.index.as_ref().unwrap().m, "256");
    assert!(r.all_verdicts_true());

    let r = report("sqrt42");
    assert_eq!(r.lowest_statement(), Some(4));
    assert!(r.burns.as_ref().unwrap().verdict.twisted_ok);
    assert_eq!(r.index.as_ref().unwrap().d_divides_m, Some(false));
}

#[test]
fn reports_are_deterministic() {
    for name in FIXTURES {
        let a = report(name).without_timings().to_json();
        let b = report(name).without_timings().to_json();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn report_round_trip() {
    for name in FIXTURES {
        let r = report(name);
        assert_eq!(VerificationReport::from_json(&r.to_json()).unwrap(), r);
    }
}

#[test]
fn missing_lvalues_leave_other_stages_running() {
    let b = bundle_from_file("sqrt3_nolv.json");
    let ctx = b.validate(128).unwrap();
    assert!(ctx.warnings.iter().any(|w| w.contains("stark stage unavailable")));
    let r = pipeline::run_pipeline(&b, &Config::with_precision(128)).unwrap();
    assert_eq!(r.stage("artin").unwrap().status, StageStatus::Ok);
    assert_eq!(r.stage("index").unwrap().status, StageStatus::Ok);
    assert_eq!(r.stage("functionals").unwrap().status, StageStatus::Ok);
    assert_eq!(r.stage("beta").unwrap().status, StageStatus::Unavailable);
    assert_eq!(r.index.as_ref().unwrap().m, "3698415");
    assert!(r.beta.is_none() && r.stark_ok.is_none());
    assert!(r.verdicts().is_empty());
}

#[test]
fn non_root_automorphism_is_named() {
    let mut b = pipeline::fixture_bundle("sqrt10").unwrap();
    b.automorphisms[1].map = "x + 1".into();
    let issues = validation_issues(&b);
    assert!(
        issues.iter().any(|i| i.contains("apply_aut") && i.contains("sigma")),
        "{issues:?}"
    );
}

#[test]
fn validation_collects_every_issue() {
    let mut b = pipeline::fixture_bundle("sqrt10").unwrap();
    b.automorphisms[1].map = "x + 1".into();
    b.metadata.class_number = 3;
    b.places.distinguished[1] = "nowhere".into();
    let issues = validation_issues(&b);
    assert!(issues.len() >= 3, "{issues:?}");
    assert!(issues.iter().any(|i| i.contains("class")));
    assert!(issues.iter().any(|i| i.contains("nowhere")));
}

#[test]
fn schema_version_is_checked() {
    let text = pipeline::fixture("sqrt10")
        .unwrap()
        .replace("\"schema_version\": 1", "\"schema_version\": 9");
    assert!(matches!(Bundle::from_json(&text), Err(BundleError::Version(9))));
    assert!(matches!(Bundle::from_json("{"), Err(BundleError::Schema(_))));
}

#[test]
fn discriminant_filter_bounds() {
    let (dk, nf) = (Integer::from(12), Integer::from(225));
    let x = Integer::from(10u64.pow(12));
    assert!(pipeline::discriminant_filter(&dk, &nf, &x, Bound::Inclusive));
    assert!(pipeline::discriminant_filter(&dk, &nf, &x, Bound::Strict));
    for bound in [Bound::Inclusive, Bound::Strict] {
        assert!(!pipeline::discriminant_filter(&dk, &nf, &Integer::new(), bound));
    }
    let edge = Integer::from(12u64.pow(3) * 225 * 225);
    assert!(pipeline::discriminant_filter(&dk, &nf, &edge, Bound::Inclusive));
    assert!(!pipeline::discriminant_filter(&dk, &nf, &edge, Bound::Strict));
}

fn write_fixtures(dir: &Path) {
    for name in FIXTURES {
        std::fs::write(dir.join(format!("{name}.json")), pipeline::fixture(name).unwrap()).unwrap();
    }
}

#[test]
fn batch_over_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let res = pipeline::batch(dir.path(), &Config::with_precision(128), Some(2), Some(out.path())).unwrap();
    assert!(!res.any_error() && !res.any_false());
    assert_eq!(res.summary.rows.len(), 3);
    assert_eq!(res.summary.total(), 3);
    for name in FIXTURES {
        let text = std::fs::read_to_string(out.path().join(format!("{name}.report.json"))).unwrap();
        VerificationReport::from_json(&text).unwrap();
    }
    let names: Vec<String> = res
        .entries
        .iter()
        .map(|e| e.path.file_name().unwrap().to_string_lossy().into())
        .collect();
    assert_eq!(names, ["sqrt10.json", "sqrt3.json", "sqrt42.json"]);
}

#[test]
fn batch_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let res = pipeline::batch(dir.path(), &Config::with_precision(128), None, None).unwrap();
    assert!(res.entries.is_empty() && !res.any_error());
    assert_eq!(res.summary.total(), 0);
}

#[test]
fn batch_with_corrupt_bundle() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    std::fs::write(dir.path().join("broken.json"), "{\"schema_version\": 1, \"name\": ").unwrap();
    let res = pipeline::batch(dir.path(), &Config::with_precision(128), None, None).unwrap();
    assert!(res.any_error());
    assert_eq!(res.summary.total(), 3);
    assert_eq!(res.summary.failures.len(), 1);
    assert!(res.summary.render().contains("broken.json"));
}

#[test]
fn documents_match_schemas() {
    let bundle_schema = schema("bundle.schema.json");
    let report_schema = schema("report.schema.json");
    for name in FIXTURES {
        assert_valid(&bundle_schema, pipeline::fixture(name).unwrap(), name);
        assert_valid(&report_schema, &report(name).to_json(), name);
    }
    let nolv = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sqrt3_nolv.json")).unwrap();
    assert_valid(&bundle_schema, &nolv, "sqrt3_nolv");
    let r = pipeline::run_pipeline(&Bundle::from_json(&nolv).unwrap(), &Config::with_precision(128)).unwrap();
    assert_valid(&report_schema, &r.to_json(), "sqrt3_nolv report");
}

#[test]
fn precision_escalation_records_both_precisions() {
    let r = pipeline::run_pipeline(
        &pipeline::fixture_bundle("sqrt10").unwrap(),
        &Config::with_precision(96),
    )
    .unwrap();
    assert_eq!(r.requested_precision_bits, 96);
    assert!(r.precision_bits == 96 || r.precision_bits == 192);
    assert!(r.all_verdicts_true());
}
