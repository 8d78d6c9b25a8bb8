//! Lattice-membership check for the minimal-order evaluator: dual
//! functionals on the fundamental system, contraction of the Artin wedge,
//! the units gamma_i and delta_i, and the square test for cyclic G.

use rug::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artin::ArtinSystem;
use crate::groupalg::{AbelianGroup, QElem, ZElem};
use crate::splaces::PlaceSet;
use crate::sunits::{SUnit, SUnitLattice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PopescuError {
    #[error("rank {0} is not supported (only 1 and 2)")]
    UnsupportedRank(usize),
    #[error("the square criterion needs a cyclic Galois group")]
    NonCyclicGroup,
    #[error("w_K d beta e' is not integral")]
    NotIntegral,
}

/// `u -> sum_s eta_i^*(s^{-1} u) s`; row s holds the coefficients of the coordinate functional.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    pub index: usize,
    pub rows: Vec<Vec<Integer>>,
}

impl DualFunctional {
    pub fn apply(&self, u: &SUnit) -> ZElem {
        ZElem::new(
            self.rows
                .iter()
                .map(|r| {
                    r.iter()
                        .zip(&u.exps)
                        .fold(Integer::new(), |a, (x, e)| a + Integer::from(x * e))
                })
                .collect(),
        )
    }

    pub fn rows_i64(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_i64().unwrap_or(i64::MAX)).collect())
            .collect()
    }
}

/// The t functionals; row s of functional i is row i of `M_{s^{-1}}`.
pub fn dual_functionals(lattice: &SUnitLattice, g: &AbelianGroup) -> Vec<DualFunctional> {
    (0..lattice.rank())
        .map(|i| DualFunctional {
            index: i,
            rows: (0..g.order())
                .map(|s| lattice.galois[g.inv(s)].matrix[i].clone())
                .collect(),
        })
        .collect()
}

/// Checks `phi(s u) = s phi(u)` on every generator and group element.
pub fn functional_is_equivariant(phi: &DualFunctional, lattice: &SUnitLattice, g: &AbelianGroup) -> bool {
    (0..lattice.rank()).all(|j| {
        let eta = SUnit::basis(lattice.rank(), j);
        let base = phi.apply(&eta);
        (0..g.order()).all(|s| phi.apply(&lattice.apply_element(s, &eta)) == base.shift(s, g))
    })
}

/// The pair of units contracted against the functionals: `(eps_1, eps_2)` when
/// |S| >= r + 2, otherwise `eps_i eps_{r+1}^{-1}`. For r = 1 only the first is used.
pub fn wedge_units(sys: &ArtinSystem, places: &PlaceSet, r: usize) -> Result<Vec<SUnit>, PopescuError> {
    if !(1..=2).contains(&r) {
        return Err(PopescuError::UnsupportedRank(r));
    }
    let eps = |i: usize| sys.eps[places.distinguished[i]].clone();
    Ok(if places.n_s() >= r + 2 {
        (0..r).map(eps).collect()
    } else {
        let last = eps(r);
        (0..r).map(|i| eps(i).div(&last)).collect()
    })
}

/// `phi(a) b - phi(b) a`, written multiplicatively.
pub fn contract(phi: &DualFunctional, a: &SUnit, b: &SUnit, lattice: &SUnitLattice) -> SUnit {
    lattice.act(&phi.apply(a), b).div(&lattice.act(&phi.apply(b), a))
}

/// `gamma = (w_K d beta e') u` and `delta = gamma^{1/d}` when every exponent is divisible by d.
pub fn gamma_delta(
    u: &SUnit,
    beta_e: &QElem,
    d: &Integer,
    w_k: u32,
    lattice: &SUnitLattice,
) -> Result<(SUnit, Option<SUnit>), PopescuError> {
    let scaled = beta_e.scale(&rug::Rational::from(Integer::from(d * w_k)));
    let z = scaled.to_integer().ok_or(PopescuError::NotIntegral)?;
    let gamma = lattice.act(&z, u);
    let divisible = gamma.exps.iter().all(|e| e.is_divisible(d));
    let delta = divisible.then(|| SUnit {
        sign: 1,
        exps: gamma.exps.iter().map(|e| Integer::from(e.div_exact_ref(d))).collect(),
    });
    Ok((gamma, delta))
}

/// `delta^{s-1}`.
pub fn twist(delta: &SUnit, s: usize, lattice: &SUnitLattice) -> SUnit {
    lattice.apply_element(s, delta).div(delta)
}

/// Square criterion: `delta^{s-1}` is a square in K, i.e. even exponents and sign +1.
pub fn abelian_test(delta: &SUnit, g: &AbelianGroup, lattice: &SUnitLattice) -> Result<bool, PopescuError> {
    if !g.is_cyclic() {
        return Err(PopescuError::NonCyclicGroup);
    }
    let Some(&s) = g.generators().first() else {
        return Ok(true);
    };
    let tw = twist(delta, s, lattice);
    Ok(tw.sign == 1 && tw.exps.iter().all(|e| e.is_even()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopescuEntry {
    pub index: usize,
    pub gamma: Vec<String>,
    pub divisible_by_d: bool,
    pub delta: Option<Vec<String>>,
    pub square_test: bool,
    pub abelian_test: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopescuVerdict {
    pub rank: usize,
    pub entries: Vec<PopescuEntry>,
    /// r = 1 only: `delta^2 = eps_1^{s-1}` up to sign on exponent vectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stark_unit_identity: Option<bool>,
    pub failing: Vec<usize>,
    pub overall: bool,
}

fn strs(u: &SUnit) -> Vec<String> {
    u.exps.iter().map(|e| e.to_string()).collect()
}

/// Runs the functional-by-functional check.
#[allow(clippy::too_many_arguments)]
pub fn popescu_verdict(
    sys: &ArtinSystem,
    beta_e: &QElem,
    d: &Integer,
    w_k: u32,
    r: usize,
    lattice: &SUnitLattice,
    places: &PlaceSet,
    g: &AbelianGroup,
) -> Result<PopescuVerdict, PopescuError> {
    let units = wedge_units(sys, places, r)?;
    let inputs: Vec<SUnit> = match r {
        1 => vec![units[0].clone()],
        _ => dual_functionals(lattice, g)
            .iter()
            .map(|phi| contract(phi, &units[0], &units[1], lattice))
            .collect(),
    };
    let mut entries = Vec::with_capacity(inputs.len());
    let mut failing = Vec::new();
    let mut identity = None;
    for (i, u) in inputs.iter().enumerate() {
        let (gamma, delta) = gamma_delta(u, beta_e, d, w_k, lattice)?;
        let (square, abelian) = match &delta {
            Some(dl) => (dl.exps.iter().all(|e| e.is_even()), abelian_test(dl, g, lattice)?),
            None => (false, false),
        };
        if r == 1 {
            identity = Some(match (&delta, g.generators().first()) {
                (Some(dl), Some(&s)) => {
                    let lhs = dl.pow(&Integer::from(2));
                    lhs.exps == twist(u, s, lattice).exps
                }
                _ => false,
            });
        }
        if delta.is_none() || !abelian {
            failing.push(i);
        }
        entries.push(PopescuEntry {
            index: i,
            gamma: strs(&gamma),
            divisible_by_d: delta.is_some(),
            delta: delta.as_ref().map(strs),
            square_test: square,
            abelian_test: abelian,
        });
    }
    let overall = failing.is_empty();
    Ok(PopescuVerdict {
        rank: r,
        entries,
        stark_unit_identity: identity,
        failing,
        overall,
    })
}
