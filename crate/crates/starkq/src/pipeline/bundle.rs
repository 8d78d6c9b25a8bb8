//! The versioned JSON input document and its validation into working data.

use std::collections::BTreeMap;

use rug::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::burns::{self, ClassGroupData};
use crate::groupalg::{AbelianGroup, Character};
use crate::linalg::IMat;
use crate::numfield::{FieldElement, NumberField, RealRoot};
use crate::splaces::{self, PlaceKind, PlaceSet, RankData, SKPlace, SPlace};
use crate::stark::LValueTable;
use crate::sunits::{SUnit, SUnitLattice};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("malformed bundle: {0}")]
    Schema(String),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("bundle failed validation:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
    /// A tolerance check failed while assembling places or units; may pass at higher precision.
    #[error("numerical validation failed: {0}")]
    Numeric(String),
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub schema_version: u32,
    pub name: String,
    pub metadata: Metadata,
    pub field: FieldSection,
    pub automorphisms: Vec<AutomorphismEntry>,
    pub places: PlacesSection,
    pub units: UnitsSection,
    #[serde(default)]
    pub artin: ArtinSection,
    pub rank: usize,
    pub class_group: ClassGroupSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_values: Option<LValueTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default)]
    pub description: String,
    pub base_field: String,
    pub disc_k: String,
    #[serde(rename = "disc_K")]
    pub disc_big_k: String,
    pub conductor_norm: String,
    pub galois_type: String,
    pub class_number: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub polynomial: String,
    pub base_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomorphismEntry {
    pub label: String,
    pub map: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Finite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SPlaceEntry {
    pub label: String,
    pub kind: Kind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SKPlaceEntry {
    pub label: String,
    pub over: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacesSection {
    pub s: Vec<SPlaceEntry>,
    pub sk: Vec<SKPlaceEntry>,
    pub distinguished: Vec<String>,
    /// Group element label -> images of the S_K places in order.
    pub action: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    pub torsion_order: u32,
    pub fundamental: Vec<String>,
    /// Finite place label -> valuation of each fundamental unit.
    pub valuations: BTreeMap<String, Vec<i64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtinSection {
    /// Distinguished place label -> exponent vector of beta_i.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<BTreeMap<String, Vec<i64>>>,
    #[serde(default)]
    pub normalize_alpha: bool,
    /// Expected eps_w as field elements, cross-checked after construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassGroupSection {
    pub divisors: Vec<i64>,
    pub action: BTreeMap<String, Vec<Vec<i64>>>,
    #[serde(default)]
    pub s_place_classes: BTreeMap<String, Vec<i64>>,
}

impl Bundle {
    pub fn from_json(text: &str) -> Result<Self, BundleError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| BundleError::Schema(e.to_string()))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(BundleError::Version(v as u32)),
            None => return Err(BundleError::Schema("missing `schema_version`".into())),
        }
        serde_json::from_value(value).map_err(|e| BundleError::Schema(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, BundleError> {
        let text = std::fs::read_to_string(path).map_err(|e| BundleError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }
}

/// Everything the pipeline needs, validated at one working precision.
#[derive(Clone, Debug)]
pub struct Context {
    pub field: NumberField,
    pub group: AbelianGroup,
    pub chars: Vec<Character>,
    pub places: PlaceSet,
    pub rank: RankData,
    pub lattice: SUnitLattice,
    pub class_group: ClassGroupData,
    pub class_group_s: ClassGroupData,
    pub supplied_betas: Option<Vec<SUnit>>,
    pub expected_eps: Option<Vec<(usize, FieldElement)>>,
    pub w_k: u32,
    pub warnings: Vec<String>,
}

/// Collects violations instead of stopping at the first.
struct Issues(Vec<String>);

impl Issues {
    fn push(&mut self, m: impl Into<String>) {
        self.0.push(m.into());
    }

    fn check(self) -> Result<(), BundleError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(BundleError::Validation(self.0))
        }
    }
}

fn position(labels: &[String], l: &str) -> Option<usize> {
    labels.iter().position(|x| x == l)
}

fn duplicates(labels: &[String]) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    labels.iter().filter(|l| !seen.insert(l.as_str())).cloned().collect()
}

fn imat(rows: &[Vec<i64>]) -> IMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| Integer::from(x)).collect())
        .collect()
}

impl Bundle {
    /// Full validation at `prec` bits; every detectable violation is reported.
    pub fn validate(&self, prec: u32) -> Result<Context, BundleError> {
        let mut issues = Issues(Vec::new());
        let mut warnings = Vec::new();

        // field and group
        let field = NumberField::parse(&self.field.polynomial)
            .map_err(|e| BundleError::Validation(vec![format!("field.polynomial: {e}")]))?;
        let n = field.degree();
        if self.field.base_degree == 0 || n % self.field.base_degree != 0 {
            issues.push(format!(
                "field.base_degree {} does not divide the degree {n}",
                self.field.base_degree
            ));
        }
        let mut autos = Vec::new();
        for a in &self.automorphisms {
            match field.element(&a.map) {
                Ok(q) if field.is_root(&q) => autos.push((a.label.clone(), q)),
                Ok(_) => issues.push(format!(
                    "automorphism `{}`: image of x is not a root of the defining polynomial (apply_aut check)",
                    a.label
                )),
                Err(e) => issues.push(format!("automorphism `{}`: {e}", a.label)),
            }
        }
        for d in duplicates(&self.automorphisms.iter().map(|a| a.label.clone()).collect::<Vec<_>>()) {
            issues.push(format!("automorphism label `{d}` repeated"));
        }
        if self.field.base_degree != 0 && autos.len() * self.field.base_degree != n {
            issues.push(format!(
                "{} automorphisms given, [K:k] = {}",
                self.automorphisms.len(),
                n / self.field.base_degree.max(1)
            ));
        }
        let group = if issues.0.is_empty() {
            match AbelianGroup::build(&field, &autos) {
                Ok(g) => Some(g),
                Err(e) => {
                    issues.push(format!("automorphisms: {e}"));
                    None
                }
            }
        } else {
            None
        };

        // places
        let s_labels: Vec<String> = self.places.s.iter().map(|p| p.label.clone()).collect();
        let sk_labels: Vec<String> = self.places.sk.iter().map(|p| p.label.clone()).collect();
        for d in duplicates(&s_labels).into_iter().chain(duplicates(&sk_labels)) {
            issues.push(format!("place label `{d}` repeated"));
        }
        let mut sk = Vec::with_capacity(self.places.sk.len());
        for p in &self.places.sk {
            let over = position(&s_labels, &p.over);
            if over.is_none() {
                issues.push(format!("place `{}` lies over unknown place `{}`", p.label, p.over));
            }
            if let Some(o) = over {
                if self.places.s[o].kind != p.kind {
                    issues.push(format!("place `{}` and `{}` have different kinds", p.label, p.over));
                }
            }
            let kind = match (&p.kind, &p.root, &p.norm) {
                (Kind::Real, Some(r), None) => match RealRoot::from_decimal(&field, r) {
                    Ok(root) => Some(PlaceKind::Real { root }),
                    Err(e) => {
                        issues.push(format!("place `{}`: root {e}", p.label));
                        None
                    }
                },
                (Kind::Finite, None, Some(nm)) => match nm.parse::<Integer>() {
                    Ok(v) if splaces_norm_ok(&v) => Some(PlaceKind::Finite { norm: v }),
                    _ => {
                        issues.push(format!("place `{}`: norm `{nm}` is not a prime power", p.label));
                        None
                    }
                },
                _ => {
                    issues.push(format!(
                        "place `{}`: real places need `root`, finite places need `norm`",
                        p.label
                    ));
                    None
                }
            };
            if let (Some(over), Some(kind)) = (over, kind) {
                sk.push(SKPlace {
                    label: p.label.clone(),
                    over,
                    kind,
                });
            }
        }
        let s: Vec<SPlace> = self
            .places
            .s
            .iter()
            .map(|p| SPlace {
                label: p.label.clone(),
                archimedean: p.kind == Kind::Real,
            })
            .collect();
        let mut distinguished = Vec::new();
        for l in &self.places.distinguished {
            match position(&sk_labels, l) {
                Some(i) => distinguished.push(i),
                None => issues.push(format!("distinguished place `{l}` is not a place of S_K")),
            }
        }
        for (l, _) in self.units.valuations.iter().chain(&self.class_group.s_place_classes) {
            match position(&sk_labels, l) {
                Some(i) if self.places.sk[i].kind == Kind::Finite => {}
                _ => issues.push(format!("`{l}` is not a finite place of S_K")),
            }
        }
        for p in self.places.sk.iter().filter(|p| p.kind == Kind::Finite) {
            if !self.units.valuations.contains_key(&p.label) {
                issues.push(format!("units.valuations has no row for `{}`", p.label));
            }
        }
        let t = self.places.sk.len().saturating_sub(1);
        if self.units.fundamental.len() != t {
            issues.push(format!(
                "{} fundamental S-units given, |S_K| - 1 = {t}",
                self.units.fundamental.len()
            ));
        }
        for (l, v) in &self.units.valuations {
            if v.len() != self.units.fundamental.len() {
                issues.push(format!("valuation row `{l}` has {} entries", v.len()));
            }
        }
        let mut fundamental = Vec::new();
        for (j, u) in self.units.fundamental.iter().enumerate() {
            match field.element(u) {
                Ok(e) if !e.is_zero() => fundamental.push(e),
                Ok(_) => issues.push(format!("fundamental unit {j} is zero")),
                Err(e) => issues.push(format!("fundamental unit {j}: {e}")),
            }
        }
        if self.units.torsion_order == 0 || !self.units.torsion_order.is_multiple_of(2) {
            issues.push("units.torsion_order must be a positive even integer".to_string());
        }
        if self.units.torsion_order != 2 {
            warnings.push(format!(
                "torsion order {} > 2; sign bookkeeping assumes a real embedding",
                self.units.torsion_order
            ));
        }

        // group-dependent data
        let mut perm = Vec::new();
        let mut action = Vec::new();
        if let Some(g) = &group {
            perm = vec![Vec::new(); g.order()];
            for (label, imgs) in &self.places.action {
                let Some(s) = g.index_of(label) else {
                    issues.push(format!("places.action: unknown group element `{label}`"));
                    continue;
                };
                let row: Vec<Option<usize>> = imgs.iter().map(|l| position(&sk_labels, l)).collect();
                if row.len() != sk_labels.len() || row.iter().any(Option::is_none) {
                    issues.push(format!(
                        "places.action `{label}` must list an image for every place of S_K"
                    ));
                    continue;
                }
                perm[s] = row.into_iter().flatten().collect();
            }
            for s in 0..g.order() {
                if perm[s].is_empty() && !self.places.action.contains_key(g.label(s)) {
                    issues.push(format!("places.action has no entry for `{}`", g.label(s)));
                }
            }
            action = vec![Vec::new(); g.order()];
            for (label, m) in &self.class_group.action {
                match g.index_of(label) {
                    Some(s) => action[s] = imat(m),
                    None => issues.push(format!("class_group.action: unknown group element `{label}`")),
                }
            }
            for s in 0..g.order() {
                if !self.class_group.action.contains_key(g.label(s)) {
                    issues.push(format!("class_group.action has no entry for `{}`", g.label(s)));
                }
            }
            if let Some(tab) = &self.l_values {
                for e in &tab.entries {
                    for l in e.character.keys() {
                        if g.index_of(l).is_none() {
                            issues.push(format!("l_values: unknown group element `{l}`"));
                        }
                    }
                }
            }
        }
        let class_group = ClassGroupData {
            divisors: self.class_group.divisors.iter().map(|&d| Integer::from(d)).collect(),
            action,
            s_place_classes: self
                .class_group
                .s_place_classes
                .iter()
                .map(|(l, v)| (l.clone(), v.iter().map(|&x| Integer::from(x)).collect()))
                .collect(),
        };
        let order = class_group.order();
        if order != self.metadata.class_number {
            issues.push(format!(
                "class group order {order} differs from metadata.class_number {}",
                self.metadata.class_number
            ));
        }
        issues.check()?;
        let g = group.expect("group built when no issues");

        let mut places = PlaceSet::new(s, sk, distinguished, perm, &g)
            .map_err(|e| BundleError::Validation(vec![format!("places: {e}")]))?;
        places
            .refine_roots(&field, prec + 64)
            .map_err(|e| BundleError::Numeric(format!("places: {e}")))?;
        places
            .verify_real_action(&field, &g, prec)
            .map_err(|e| BundleError::Numeric(format!("places: {e}")))?;
        let chars = g.characters();
        let rank = splaces::rank_data(self.rank, &places, &g, &chars)
            .map_err(|e| BundleError::Validation(vec![format!("rank: {e}")]))?;

        let valuations: Vec<Vec<i64>> = places
            .sk
            .iter()
            .map(|p| {
                self.units
                    .valuations
                    .get(&p.label)
                    .cloned()
                    .unwrap_or_else(|| vec![0; t])
            })
            .collect();
        let lattice = SUnitLattice::new(
            &field,
            fundamental,
            self.units.torsion_order,
            valuations,
            &places,
            &g,
            prec,
        )
        .map_err(|e| BundleError::Numeric(format!("units: {e}")))?;

        let mut issues = Issues(Vec::new());
        if let Err(e) = class_group.validate(&g) {
            issues.push(format!("class_group: {e}"));
        }
        let finite: Vec<&str> = places
            .finite_places()
            .into_iter()
            .map(|w| places.sk[w].label.as_str())
            .collect();
        for l in &finite {
            if !self.class_group.s_place_classes.contains_key(*l) {
                issues.push(format!("class_group.s_place_classes has no class for `{l}`"));
            }
        }
        let class_group_s = if issues.0.is_empty() {
            match burns::s_quotient(&class_group, &g) {
                Ok(q) => q,
                Err(e) => {
                    issues.push(format!("class_group: {e}"));
                    ClassGroupData::trivial(g.order())
                }
            }
        } else {
            ClassGroupData::trivial(g.order())
        };

        let supplied_betas = match &self.artin.betas {
            None => None,
            Some(map) => {
                let mut out = Vec::new();
                for &w in &places.distinguished {
                    let label = &places.sk[w].label;
                    match map.get(label) {
                        Some(v) if v.len() == t => out.push(SUnit::from_i64(1, v)),
                        Some(v) => issues.push(format!("artin.betas `{label}` has {} entries, expected {t}", v.len())),
                        None => issues.push(format!("artin.betas has no vector for distinguished place `{label}`")),
                    }
                }
                for l in map.keys() {
                    if !places.distinguished.iter().any(|&w| &places.sk[w].label == l) {
                        issues.push(format!("artin.betas: `{l}` is not a distinguished place"));
                    }
                }
                Some(out)
            }
        };
        let expected_eps = match &self.artin.eps {
            None => None,
            Some(map) => {
                let mut out = Vec::new();
                for (l, p) in map {
                    match (places.index_of(l), field.element(p)) {
                        (Some(w), Ok(e)) => out.push((w, e)),
                        (None, _) => issues.push(format!("artin.eps: unknown place `{l}`")),
                        (_, Err(e)) => issues.push(format!("artin.eps `{l}`: {e}")),
                    }
                }
                Some(out)
            }
        };
        if self.l_values.is_none() {
            warnings.push("no L-value table: stark stage unavailable".to_string());
        }
        issues.check()?;
        Ok(Context {
            field,
            group: g,
            chars,
            places,
            rank,
            lattice,
            class_group,
            class_group_s,
            supplied_betas,
            expected_eps,
            w_k: self.units.torsion_order,
            warnings,
        })
    }
}

fn splaces_norm_ok(v: &Integer) -> bool {
    crate::sunits::prime_power(v).is_some()
}
