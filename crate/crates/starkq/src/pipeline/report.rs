//! The versioned JSON output document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::burns::BurnsVerdict;
use crate::popescu::PopescuVerdict;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
    Unavailable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// Step numbers covered, e.g. "9-11".
    pub steps: String,
    pub name: String,
    pub status: StageStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub micros: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleIdentity {
    pub name: String,
    pub base_field: String,
    pub disc_k: String,
    #[serde(rename = "disc_K")]
    pub disc_big_k: String,
    pub conductor_norm: String,
    pub galois_type: String,
    pub class_number: u64,
    pub rank: usize,
    pub group: Vec<String>,
    pub group_invariants: Vec<u64>,
    pub distinguished: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitReport {
    pub place: String,
    pub sign: i8,
    pub exps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtinReport {
    pub betas: Vec<UnitReport>,
    /// Multiplier that produced each beta_i; null when supplied by the bundle.
    pub beta_n0: Vec<Option<u64>>,
    pub eps: Vec<UnitReport>,
    /// Relation coefficient per place of S_K.
    pub relation: Vec<String>,
    /// Coefficient per place of S.
    pub alpha: Vec<String>,
    pub m: String,
    pub check_failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    /// Group element label -> decimal approximation of the coefficient.
    pub numeric: BTreeMap<String, String>,
    /// Group element label -> exact coefficient "p/q".
    pub exact: BTreeMap<String, String>,
    pub d: String,
    pub max_denominator: String,
    /// `beta_S(A)` over every character, when the table covers all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full: Option<BTreeMap<String, String>>,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub m: String,
    /// Divisibility facts about d; null when beta e' is unavailable.
    pub d_divides_m: Option<bool>,
    /// The empirical `d | w_K m`.
    pub d_divides_wm: Option<bool>,
    pub d_divides_wm_r: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurnsReport {
    /// `w_K m^r beta e'` by group element label.
    pub element: BTreeMap<String, String>,
    pub class_group: Vec<String>,
    pub s_class_group: Vec<String>,
    pub verdict: BurnsVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub bundle: BundleIdentity,
    pub precision_bits: u32,
    pub requested_precision_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artin: Option<ArtinReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexReport>,
    /// Rows of each dual functional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<Vec<Vec<Vec<String>>>>,
    /// Stark over Q: beta e' is rational with `w_K m^r beta e'` integral.
    pub stark_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popescu: Option<PopescuVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burns: Option<BurnsReport>,
    pub stages: Vec<StageReport>,
    pub warnings: Vec<String>,
}

impl VerificationReport {
    /// Burns verdict in the strong form: statement 4 plus the twisted check.
    pub fn burns_ok(&self) -> Option<bool> {
        self.burns
            .as_ref()
            .map(|b| b.verdict.integral && b.verdict.statements[3] && b.verdict.twisted_ok)
    }

    pub fn popescu_ok(&self) -> Option<bool> {
        self.popescu.as_ref().map(|p| p.overall)
    }

    /// Every available conjecture verdict; unavailable stages are skipped.
    pub fn verdicts(&self) -> Vec<(&'static str, bool)> {
        [
            ("stark", self.stark_ok),
            ("popescu", self.popescu_ok()),
            ("burns", self.burns_ok()),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.map(|v| (n, v)))
        .collect()
    }

    pub fn all_verdicts_true(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| *v)
    }

    pub fn lowest_statement(&self) -> Option<u8> {
        self.burns.as_ref().and_then(|b| b.verdict.lowest)
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Copy with every timing field zeroed.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for s in &mut r.stages {
            s.micros = 0;
        }
        r
    }
}
