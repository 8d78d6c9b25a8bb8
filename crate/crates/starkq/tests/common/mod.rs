#![allow(dead_code)]

use proptest::test_runner::{Config as PtConfig, RngAlgorithm, TestRng, TestRunner};
use rug::{Integer, Rational};
use starkq::artin::ArtinSystem;
use starkq::groupalg::QElem;
use starkq::pipeline::{self, run, Bundle, Context};
use starkq::sunits::SUnit;

pub const FIXTURES: [&str; 3] = ["sqrt3", "sqrt10", "sqrt42"];

pub struct Setup {
    pub bundle: Bundle,
    pub ctx: Context,
    pub sys: ArtinSystem,
}

pub fn setup(name: &str, prec: u32) -> Setup {
    let bundle = pipeline::fixture_bundle(name).expect("fixture");
    let ctx = bundle.validate(prec).expect("fixture validates");
    let (sys, failures) = run::artin_stage(&ctx, bundle.artin.normalize_alpha).expect("artin system");
    assert!(failures.is_empty(), "{failures:?}");
    Setup { bundle, ctx, sys }
}

pub fn bundle_from_file(name: &str) -> Bundle {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    Bundle::from_path(&path).expect("fixture file parses")
}

/// Deterministic runner so acceptance output is reproducible.
pub fn runner(cases: u32) -> TestRunner {
    let cfg = PtConfig {
        cases,
        failure_persistence: None,
        ..PtConfig::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

pub fn qelem(nums: &[i64], den: i64) -> QElem {
    QElem::new(nums.iter().map(|&n| q(n, den)).collect())
}

pub fn exps(u: &SUnit) -> Vec<i64> {
    u.exps_i64()
}

pub fn ints(v: &[i64]) -> Vec<Integer> {
    v.iter().map(|&x| Integer::from(x)).collect()
}

pub fn strings(v: &[i64]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}
