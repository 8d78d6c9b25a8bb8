//! Bundle ingestion, the Step 1-12 run, batch mode and summaries.

pub mod bundle;
pub mod report;
pub mod run;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rug::Integer;
use serde::{Deserialize, Serialize};

pub use bundle::{Bundle, BundleError, Context};
pub use report::{StageStatus, VerificationReport};
pub use run::{run_pipeline, Config, DEFAULT_PRECISION, PRECISION_ENV};

/// Built-in fixtures by name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("sqrt3", include_str!("../../fixtures/sqrt3.json")),
    ("sqrt10", include_str!("../../fixtures/sqrt10.json")),
    ("sqrt42", include_str!("../../fixtures/sqrt42.json")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn fixture_bundle(name: &str) -> Option<Bundle> {
    fixture(name).map(|s| Bundle::from_json(s).expect("built-in fixture parses"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// `Delta_K <= X`.
    Inclusive,
    /// `Delta_K < X`.
    Strict,
}

/// `Delta_k^3 N(f)^2` against X, using `Delta_K = Delta_k^3 N(f)^2`.
pub fn discriminant_filter(disc_k: &Integer, conductor_norm: &Integer, x: &Integer, bound: Bound) -> bool {
    let dk3 = Integer::from(rug::ops::Pow::pow(disc_k, 3u32));
    let nf2 = Integer::from(conductor_norm.square_ref());
    let disc = dk3 * nf2;
    match bound {
        Bound::Inclusive => disc <= *x,
        Bound::Strict => disc < *x,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SummaryKey {
    pub galois_type: String,
    pub class_number: u64,
    /// Lowest passing Burns statement; None when none passes or Burns did not run.
    pub lowest_statement: Option<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<(SummaryKey, usize)>,
    pub failures: Vec<(String, String)>,
}

impl Summary {
    pub fn from_reports<'a>(reports: impl IntoIterator<Item = &'a VerificationReport>) -> Self {
        let mut counts: BTreeMap<SummaryKey, usize> = BTreeMap::new();
        for r in reports {
            let key = SummaryKey {
                galois_type: r.bundle.galois_type.clone(),
                class_number: r.bundle.class_number,
                lowest_statement: r.lowest_statement(),
            };
            *counts.entry(key).or_default() += 1;
        }
        Summary {
            rows: counts.into_iter().collect(),
            failures: Vec::new(),
        }
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(|(_, c)| c).sum()
    }

    /// Plain-text table, one block per Galois type.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut current: Option<&str> = None;
        for (k, c) in &self.rows {
            if current != Some(k.galois_type.as_str()) {
                let _ = writeln!(out, "{}", k.galois_type);
                let _ = writeln!(out, "  {:>6}  {:>9}  {:>7}", "h_K", "statement", "fields");
                current = Some(&k.galois_type);
            }
            let stmt = k.lowest_statement.map_or("-".to_string(), |s| s.to_string());
            let _ = writeln!(out, "  {:>6}  {:>9}  {:>7}", k.class_number, stmt, c);
        }
        let _ = writeln!(out, "total: {}", self.total());
        for (p, e) in &self.failures {
            let _ = writeln!(out, "error: {p}: {e}");
        }
        out
    }
}

#[derive(Debug)]
pub struct BatchEntry {
    pub path: PathBuf,
    pub outcome: Result<VerificationReport, String>,
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub entries: Vec<BatchEntry>,
    pub summary: Summary,
}

impl BatchOutcome {
    pub fn any_error(&self) -> bool {
        self.entries.iter().any(|e| e.outcome.is_err())
    }

    pub fn any_false(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.outcome.as_ref().is_ok_and(|r| !r.all_verdicts_true()))
    }
}

/// Writes through a temporary file and renames, so readers never see a partial report.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Bundle files in `dir`, sorted by name.
pub fn bundle_paths(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Runs every bundle in `dir` in parallel; output order follows the sorted paths.
pub fn batch(dir: &Path, cfg: &Config, jobs: Option<usize>, out_dir: Option<&Path>) -> std::io::Result<BatchOutcome> {
    let paths = bundle_paths(dir)?;
    let work = || -> Vec<BatchEntry> {
        paths
            .par_iter()
            .map(|p| {
                let outcome = Bundle::from_path(p)
                    .and_then(|b| run_pipeline(&b, cfg))
                    .map_err(|e| e.to_string());
                if let (Ok(r), Some(dir)) = (&outcome, out_dir) {
                    let name = p.file_name().expect("bundle file name");
                    let target = dir.join(Path::new(name).with_extension("report.json"));
                    if let Err(e) = write_atomic(&target, &r.to_json()) {
                        return BatchEntry {
                            path: p.clone(),
                            outcome: Err(format!("writing {}: {e}", target.display())),
                        };
                    }
                }
                BatchEntry {
                    path: p.clone(),
                    outcome,
                }
            })
            .collect()
    };
    let entries = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(std::io::Error::other)?
            .install(work),
        None => work(),
    };
    let mut summary = Summary::from_reports(entries.iter().filter_map(|e| e.outcome.as_ref().ok()));
    summary.failures = entries
        .iter()
        .filter_map(|e| {
            e.outcome
                .as_ref()
                .err()
                .map(|m| (e.path.display().to_string(), m.clone()))
        })
        .collect();
    Ok(BatchOutcome { entries, summary })
}
