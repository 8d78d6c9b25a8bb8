//! Artin systems of S_K-units.
//!
//! For each place v_i of S a unit `beta_i` dominant at `w_i` is found (or
//! supplied), `gamma_i = N_{G_i} beta_i` is formed, and the system is
//! `eps_{s(w_i)} = gamma_i^s`. The unique relation among the `eps_w` is
//! read off the Smith normal form of their exponent matrix.

use rug::{Float, Integer};
use thiserror::Error;

use crate::groupalg::{AbelianGroup, ZElem};
use crate::linalg::{self, IMat};
use crate::splaces::PlaceSet;
use crate::sunits::{SUnit, SUnitLattice, UnitError};

/// Largest multiplier tried by the doubling search.
pub const N0_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArtinError {
    #[error("no dominant unit at `{place}` for n0 up to {cap}")]
    DominanceFailed { place: String, cap: u64 },
    #[error("log submatrix omitting `{0}` is singular")]
    SingularSubmatrix(String),
    #[error("the units eps_w satisfy {0} independent relations, expected exactly one")]
    KernelRankNotOne(usize),
    #[error("relation is not constant on Galois orbits")]
    RelationNotInvariant,
    #[error("supplied unit for `{0}` is not dominant at its place")]
    SuppliedNotDominant(String),
    #[error(transparent)]
    Unit(#[from] UnitError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArtinSystem {
    /// The dominant units beta_i, one per place of S.
    pub betas: Vec<SUnit>,
    /// Multiplier n0 that produced each beta_i (None when supplied).
    pub beta_n0: Vec<Option<u64>>,
    /// eps_w for every place of S_K.
    pub eps: Vec<SUnit>,
    /// Coefficient of the relation at each place of S_K.
    pub relation: Vec<Integer>,
    /// n_v for each place of S.
    pub alpha: Vec<Integer>,
    pub index_m: Integer,
    pub warnings: Vec<String>,
}

/// Outcome of [`verify_artin_system`]; every failed clause is listed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArtinCheck {
    pub failures: Vec<String>,
    pub s_k_alpha: Integer,
}

impl ArtinCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// True when `log|u|_w < 0` for every place except `w0`.
pub fn is_dominant(lattice: &SUnitLattice, u: &SUnit, w0: usize) -> bool {
    let tol = lattice.tol();
    let logs = lattice.log_vector(u);
    logs.iter()
        .enumerate()
        .all(|(w, l)| if w == w0 { *l > tol } else { *l < -tol.clone() })
}

/// One rounding step: solve `A_s x = -n0 (1,...,1)` without the row of `w0` and round.
pub fn find_beta_once(lattice: &SUnitLattice, w0: usize, n0: u64) -> Option<SUnit> {
    let prec = lattice.prec + 32;
    let rows: Vec<Vec<Float>> = (0..lattice.log_matrix.len())
        .filter(|&w| w != w0)
        .map(|w| lattice.log_matrix[w].clone())
        .collect();
    let rhs = vec![Float::with_val(prec, -(n0 as f64)); rows.len()];
    let x = linalg::solve_float(&rows, &rhs)?;
    let exps = x.iter().map(|xi| xi.to_integer()).collect::<Option<Vec<_>>>()?;
    Some(SUnit { sign: 1, exps })
}

/// Doubling search for a unit dominant at `w0`; returns the unit and the n0 used.
pub fn find_beta(lattice: &SUnitLattice, places: &PlaceSet, w0: usize) -> Result<(SUnit, u64), ArtinError> {
    let mut n0 = 1u64;
    while n0 <= N0_CAP {
        let beta = find_beta_once(lattice, w0, n0)
            .ok_or_else(|| ArtinError::SingularSubmatrix(places.sk[w0].label.clone()))?;
        if is_dominant(lattice, &beta, w0) {
            return Ok((beta, n0));
        }
        n0 *= 2;
    }
    Err(ArtinError::DominanceFailed {
        place: places.sk[w0].label.clone(),
        cap: N0_CAP,
    })
}

/// Builds an Artin system following the constructive existence proof.
///
/// `supplied` optionally pins the units beta_i (one per place of S). With
/// `normalize_alpha`, each `eps_w` is replaced by `eps_w^{n_v}` (times the sign
/// factor) so that the relation becomes `sum_v T_v`.
pub fn build_artin_system(
    lattice: &SUnitLattice,
    places: &PlaceSet,
    g: &AbelianGroup,
    supplied: Option<&[SUnit]>,
    normalize_alpha: bool,
) -> Result<ArtinSystem, ArtinError> {
    let n_s = places.n_s();
    let mut betas = Vec::with_capacity(n_s);
    let mut beta_n0 = Vec::with_capacity(n_s);
    for i in 0..n_s {
        let wi = places.distinguished[i];
        match supplied {
            Some(b) => {
                if !is_dominant(lattice, &b[i], wi) {
                    return Err(ArtinError::SuppliedNotDominant(places.sk[wi].label.clone()));
                }
                betas.push(b[i].clone());
                beta_n0.push(None);
            }
            None => {
                let (b, n0) = find_beta(lattice, places, wi)?;
                betas.push(b);
                beta_n0.push(Some(n0));
            }
        }
    }
    let mut warnings = Vec::new();
    let mut eps = vec![SUnit::one(lattice.rank()); places.n_sk()];
    for i in 0..n_s {
        let gamma = lattice.act(&ZElem::norm_of(g, &places.decomposition[i]), &betas[i]);
        for w in places.orbit(i) {
            let s = places.transporter(w);
            eps[w] = lattice.apply_element(s, &gamma);
        }
    }
    let (mut relation, mut alpha) = relation_of(&eps, places)?;
    if alpha.iter().all(|a| *a <= 0) {
        relation.iter_mut().for_each(|x| *x = Integer::from(-&*x));
        alpha.iter_mut().for_each(|x| *x = Integer::from(-&*x));
    }
    if alpha.iter().any(|a| *a < 0) {
        warnings.push("relation has mixed signs; inverting the affected orbits".to_string());
        for i in 0..n_s {
            if alpha[i] < 0 {
                for w in places.orbit(i) {
                    eps[w] = eps[w].inv();
                    relation[w] = Integer::from(-&relation[w]);
                }
                alpha[i] = Integer::from(-&alpha[i]);
            }
        }
    }
    if relation_sign(&eps, &relation) < 0 {
        relation.iter_mut().for_each(|x| *x *= 2);
        alpha.iter_mut().for_each(|x| *x *= 2);
    }
    if normalize_alpha {
        for (w, e) in eps.iter_mut().enumerate() {
            *e = e.pow(&relation[w]);
        }
        relation.iter_mut().for_each(|x| *x = Integer::from(1));
        alpha.iter_mut().for_each(|x| *x = Integer::from(1));
        if relation_sign(&eps, &relation) < 0 {
            return Err(ArtinError::RelationNotInvariant);
        }
    }
    let index_m = artin_index(lattice, &eps)?;
    Ok(ArtinSystem {
        betas,
        beta_n0,
        eps,
        relation,
        alpha,
        index_m,
        warnings,
    })
}

fn relation_sign(eps: &[SUnit], relation: &[Integer]) -> i8 {
    eps.iter()
        .zip(relation)
        .fold(1i8, |s, (e, n)| if e.sign < 0 && n.is_odd() { -s } else { s })
}

/// Primitive integer relation among the `eps_w` and its values per place of S.
fn relation_of(eps: &[SUnit], places: &PlaceSet) -> Result<(Vec<Integer>, Vec<Integer>), ArtinError> {
    let t = eps.first().map_or(0, |e| e.exps.len());
    // columns are the eps_w, rows the coordinates
    let m: IMat = (0..t)
        .map(|j| eps.iter().map(|e| e.exps[j].clone()).collect())
        .collect();
    let snf = linalg::smith(&m);
    let ker = snf.kernel_basis();
    if ker.len() != 1 {
        return Err(ArtinError::KernelRankNotOne(ker.len()));
    }
    let n = ker.into_iter().next().unwrap();
    let alpha: Vec<Integer> = (0..places.n_s()).map(|i| n[places.distinguished[i]].clone()).collect();
    for (w, x) in n.iter().enumerate() {
        if *x != alpha[places.sk[w].over] {
            return Err(ArtinError::RelationNotInvariant);
        }
    }
    Ok((n, alpha))
}

/// `m = [E_S(K) : mu(K) f(X_S(K))]`, from the units `eps_w eps_{w0}^{-1}`.
pub fn artin_index(lattice: &SUnitLattice, eps: &[SUnit]) -> Result<Integer, UnitError> {
    let w0 = eps.len() - 1;
    let gens: Vec<SUnit> = eps[..w0].iter().map(|e| e.div(&eps[w0])).collect();
    lattice.sublattice_index(&gens)
}

/// Matrix `log|eps_w|_{w'}` over w, w' distinct from the last place.
pub fn dominance_matrix(lattice: &SUnitLattice, eps: &[SUnit]) -> Vec<Vec<Float>> {
    let w0 = eps.len() - 1;
    eps[..w0]
        .iter()
        .map(|e| {
            let mut row = lattice.log_vector(e);
            row.truncate(w0);
            row
        })
        .collect()
}

/// Hypothesis of the determinant lemma: negative off-diagonal entries and positive row sums.
pub fn lemma_hypothesis(a: &[Vec<Float>]) -> bool {
    a.iter().enumerate().all(|(i, row)| {
        let off_ok = row
            .iter()
            .enumerate()
            .all(|(j, x)| i == j || x.is_sign_negative() && !x.is_zero());
        let sum = row.iter().fold(Float::with_val(row[0].prec(), 0), |acc, x| acc + x);
        off_ok && sum.is_sign_positive() && !sum.is_zero()
    })
}

/// Checks every defining clause of an Artin system.
pub fn verify_artin_system(
    sys: &ArtinSystem,
    lattice: &SUnitLattice,
    places: &PlaceSet,
    g: &AbelianGroup,
) -> ArtinCheck {
    let mut failures = Vec::new();
    for s in 0..g.order() {
        for w in 0..places.n_sk() {
            if lattice.apply_element(s, &sys.eps[w]) != sys.eps[places.perm[s][w]] {
                failures.push(format!(
                    "equivariance: eps_{}^{} != eps_{}",
                    places.sk[w].label,
                    g.label(s),
                    places.sk[places.perm[s][w]].label
                ));
            }
        }
    }
    match relation_of(&sys.eps, places) {
        Ok((n, _)) => {
            let proportional = n
                .iter()
                .zip(&sys.relation)
                .all(|(a, b)| Integer::from(a * &sys.relation[0]) == Integer::from(b * &n[0]));
            if !proportional {
                failures.push("relation differs from the kernel of the exponent matrix".into());
            }
        }
        Err(e) => failures.push(format!("single relation: {e}")),
    }
    let mut prod = SUnit::one(lattice.rank());
    for (e, n) in sys.eps.iter().zip(&sys.relation) {
        prod = prod.mul(&e.pow(n));
    }
    if !prod.is_one() {
        failures.push(format!("prod eps_w^n_w = {prod}, expected 1"));
    }
    if sys.alpha.iter().any(|a| *a < 0) || sys.alpha.iter().all(|a| *a == 0) {
        failures.push("relation coefficients must be nonnegative and not all zero".into());
    }
    let n = g.order();
    let s_k_alpha = sys.alpha.iter().enumerate().fold(Integer::new(), |acc, (i, a)| {
        acc + Integer::from(a * (n / places.decomposition[i].len()) as u64)
    });
    if s_k_alpha == 0 {
        failures.push("s_K(alpha) = 0".into());
    }
    for (w, e) in sys.eps.iter().enumerate() {
        if !is_dominant(lattice, e, w) {
            failures.push(format!("dominance fails for eps_{}", places.sk[w].label));
        }
    }
    if !lemma_hypothesis(&dominance_matrix(lattice, &sys.eps)) {
        failures.push("dominance matrix violates the determinant-lemma hypothesis".into());
    }
    match artin_index(lattice, &sys.eps) {
        Ok(m) if m == sys.index_m => {}
        Ok(m) => failures.push(format!("index recomputed as {m}, recorded {}", sys.index_m)),
        Err(e) => failures.push(format!("index: {e}")),
    }
    ArtinCheck { failures, s_k_alpha }
}
