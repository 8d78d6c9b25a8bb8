//! S-unit lattices: exponent vectors over a fundamental system, the
//! integral Galois action, logarithmic maps and regulators.

use std::fmt;

use rug::{Complex, Float, Integer, Rational};
use thiserror::Error;

use crate::groupalg::{self, AbelianGroup, CElem, Character, ZElem};
use crate::linalg::{self, IMat};
use crate::numfield::{FieldElement, FieldError, NumberField};
use crate::splaces::{self, PlaceError, PlaceKind, PlaceSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("element is not in the S-unit lattice ({0})")]
    NotInLattice(String),
    #[error("rounding residual {0} exceeds 0.25; more precision is needed")]
    ResidualTooLarge(f64),
    #[error("group-ring element has non-integral coefficients")]
    NonIntegralCoefficients,
    #[error("generators span a sublattice of infinite index")]
    InfiniteIndex,
    #[error("singular log matrix")]
    SingularMatrix,
    #[error("product formula fails for column {0}")]
    ProductFormula(usize),
    #[error("Galois matrices violate the group law at ({0}, {1})")]
    GroupLaw(String, String),
    #[error("expected {expected} fundamental units, found {found}")]
    WrongRank { expected: usize, found: usize },
    #[error("valuation data disagrees with the Galois action: {0}")]
    ValuationMismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Place(#[from] PlaceError),
}

/// `sign * prod eta_j^{exps_j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SUnit {
    pub sign: i8,
    pub exps: Vec<Integer>,
}

impl SUnit {
    pub fn one(t: usize) -> Self {
        SUnit {
            sign: 1,
            exps: vec![Integer::new(); t],
        }
    }

    pub fn from_i64(sign: i8, exps: &[i64]) -> Self {
        SUnit {
            sign,
            exps: exps.iter().map(|&e| Integer::from(e)).collect(),
        }
    }

    pub fn basis(t: usize, j: usize) -> Self {
        let mut u = Self::one(t);
        u.exps[j] = Integer::from(1);
        u
    }

    pub fn mul(&self, o: &SUnit) -> SUnit {
        SUnit {
            sign: self.sign * o.sign,
            exps: self
                .exps
                .iter()
                .zip(&o.exps)
                .map(|(a, b)| Integer::from(a + b))
                .collect(),
        }
    }

    pub fn inv(&self) -> SUnit {
        SUnit {
            sign: self.sign,
            exps: self.exps.iter().map(|a| Integer::from(-a)).collect(),
        }
    }

    pub fn div(&self, o: &SUnit) -> SUnit {
        self.mul(&o.inv())
    }

    pub fn pow(&self, k: &Integer) -> SUnit {
        let odd = k.is_odd();
        SUnit {
            sign: if odd { self.sign } else { 1 },
            exps: self.exps.iter().map(|a| Integer::from(a * k)).collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.sign == 1 && self.exps.iter().all(|e| *e == 0)
    }

    pub fn exps_i64(&self) -> Vec<i64> {
        self.exps.iter().map(|e| e.to_i64().unwrap_or(i64::MAX)).collect()
    }
}

impl fmt::Display for SUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        write!(f, "{}[{}]", if self.sign < 0 { "-" } else { "" }, parts.join(", "))
    }
}

/// Galois action on the fundamental system: column j of `matrix` holds the
/// exponents of `eta_j^s`, and `signs[j]` its torsion part.
#[derive(Clone, Debug, PartialEq)]
pub struct GaloisMatrix {
    pub matrix: IMat,
    pub signs: Vec<i8>,
}

#[derive(Clone, Debug)]
pub struct SUnitLattice {
    pub field: NumberField,
    pub fundamental: Vec<FieldElement>,
    pub torsion_order: u32,
    /// Rows: places of S_K; columns: `log|eta_j|_w`.
    pub log_matrix: Vec<Vec<Float>>,
    /// Rows: places of S_K (zero rows at real places); columns: `ord_w(eta_j)`.
    pub valuations: Vec<Vec<i64>>,
    pub galois: Vec<GaloisMatrix>,
    pub prec: u32,
    inverses: Vec<FieldElement>,
}

/// How valuations of a raw field element at the finite places are obtained.
#[derive(Clone, Debug)]
pub enum ValuationSource {
    /// Explicit `ord_w` for every place (entries at real places are ignored).
    Given(Vec<i64>),
    /// From the factorization of the absolute norm; needs at most one finite
    /// place of S_K above each rational prime.
    Norm,
}

impl SUnitLattice {
    /// Builds the lattice, computes Galois matrices, and checks every invariant.
    pub fn new(
        field: &NumberField,
        fundamental: Vec<FieldElement>,
        torsion_order: u32,
        valuations: Vec<Vec<i64>>,
        places: &PlaceSet,
        g: &AbelianGroup,
        prec: u32,
    ) -> Result<Self, UnitError> {
        let t = places.n_sk() - 1;
        if fundamental.len() != t {
            return Err(UnitError::WrongRank {
                expected: t,
                found: fundamental.len(),
            });
        }
        let inverses = fundamental
            .iter()
            .map(|e| field.inv(e))
            .collect::<Result<Vec<_>, _>>()?;
        let wprec = prec + 32;
        let mut log_matrix = Vec::with_capacity(places.n_sk());
        for (w, place) in places.sk.iter().enumerate() {
            let row = match &place.kind {
                PlaceKind::Real { root } => fundamental
                    .iter()
                    .map(|e| Ok(field.embed(e, root, prec)?.abs().ln()))
                    .collect::<Result<Vec<_>, FieldError>>()?,
                PlaceKind::Finite { norm } => valuations[w]
                    .iter()
                    .map(|&o| splaces::log_abs_finite(o, norm, wprec))
                    .collect(),
            };
            log_matrix.push(row);
        }
        let mut lattice = SUnitLattice {
            field: field.clone(),
            fundamental,
            torsion_order,
            log_matrix,
            valuations,
            galois: Vec::new(),
            prec,
            inverses,
        };
        let tol = lattice.tol();
        for j in 0..t {
            let mut s = Float::new(wprec);
            for row in &lattice.log_matrix {
                s += &row[j];
            }
            if s.abs() > Float::with_val(64, &tol * places.n_sk() as u32) {
                return Err(UnitError::ProductFormula(j));
            }
        }
        let mut galois = Vec::with_capacity(g.order());
        for s in 0..g.order() {
            let sinv = g.inv(s);
            let mut cols = Vec::with_capacity(t);
            let mut signs = Vec::with_capacity(t);
            for j in 0..t {
                let img = field.apply_aut_unchecked(&lattice.fundamental[j], g.map(s));
                // ord_w(eta^s) = ord_{s^{-1} w}(eta)
                let hint: Vec<i64> = (0..places.n_sk())
                    .map(|w| lattice.valuations[places.perm[sinv][w]][j])
                    .collect();
                let u = lattice.decompose(&img, places, &ValuationSource::Given(hint))?;
                signs.push(u.sign);
                cols.push(u.exps);
            }
            let matrix = (0..t).map(|i| (0..t).map(|j| cols[j][i].clone()).collect()).collect();
            galois.push(GaloisMatrix { matrix, signs });
        }
        lattice.galois = galois;
        lattice.check_group_law(g)?;
        Ok(lattice)
    }

    pub fn rank(&self) -> usize {
        self.fundamental.len()
    }

    /// Comparison tolerance 2^(-prec/2).
    pub fn tol(&self) -> Float {
        Float::with_val(64, Float::i_exp(1, -((self.prec / 2) as i32)))
    }

    fn check_group_law(&self, g: &AbelianGroup) -> Result<(), UnitError> {
        let t = self.rank();
        for a in 0..g.order() {
            for b in 0..g.order() {
                let ab = g.mul(a, b);
                let prod = linalg::imat_mul(&self.galois[a].matrix, &self.galois[b].matrix);
                let signs_ok = (0..t).all(|j| {
                    // (eta_j^b)^a
                    let u = SUnit {
                        sign: self.galois[b].signs[j],
                        exps: self.galois[b].matrix.iter().map(|r| r[j].clone()).collect(),
                    };
                    self.apply_element(a, &u).sign == self.galois[ab].signs[j]
                });
                if prod != self.galois[ab].matrix || !signs_ok {
                    return Err(UnitError::GroupLaw(g.label(a).into(), g.label(b).into()));
                }
            }
        }
        Ok(())
    }

    /// Exact value of an S-unit as a field element.
    pub fn to_field(&self, u: &SUnit) -> Result<FieldElement, FieldError> {
        let f = &self.field;
        let mut acc = f.one();
        for (j, e) in u.exps.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            let base = if *e < 0 {
                &self.inverses[j]
            } else {
                &self.fundamental[j]
            };
            let k = e.clone().abs().to_i64().ok_or(FieldError::PrecisionExhausted)?;
            acc = f.mul(&acc, &f.pow(base, k)?);
        }
        if u.sign < 0 {
            acc = f.neg(&acc);
        }
        Ok(acc)
    }

    /// `log|u|_w` for every place of S_K.
    pub fn log_vector(&self, u: &SUnit) -> Vec<Float> {
        self.log_matrix
            .iter()
            .map(|row| {
                let mut s = Float::new(self.prec + 32);
                for (x, e) in row.iter().zip(&u.exps) {
                    if *e != 0 {
                        s += Float::with_val(self.prec + 32, x * e);
                    }
                }
                s
            })
            .collect()
    }

    pub fn log_abs(&self, u: &SUnit, w: usize) -> Float {
        let mut s = Float::new(self.prec + 32);
        for (x, e) in self.log_matrix[w].iter().zip(&u.exps) {
            if *e != 0 {
                s += Float::with_val(self.prec + 32, x * e);
            }
        }
        s
    }

    /// `ord_w(u)` at a finite place.
    pub fn valuation(&self, u: &SUnit, w: usize) -> Integer {
        self.valuations[w]
            .iter()
            .zip(&u.exps)
            .fold(Integer::new(), |acc, (&v, e)| acc + Integer::from(e * v))
    }

    /// Expresses a field element on the fundamental system, verified exactly.
    pub fn decompose(&self, a: &FieldElement, places: &PlaceSet, vals: &ValuationSource) -> Result<SUnit, UnitError> {
        let t = self.rank();
        let wprec = self.prec + 32;
        let ords: Vec<i64> = match vals {
            ValuationSource::Given(v) => v.clone(),
            ValuationSource::Norm => self.valuations_from_norm(a, places)?,
        };
        let mut target = Vec::with_capacity(places.n_sk());
        for (w, place) in places.sk.iter().enumerate() {
            target.push(match &place.kind {
                PlaceKind::Real { root } => self.field.embed(a, root, self.prec)?.abs().ln(),
                PlaceKind::Finite { norm } => splaces::log_abs_finite(ords[w], norm, wprec),
            });
        }
        let a_rows: Vec<Vec<Float>> = self.log_matrix[..t].to_vec();
        let x = linalg::solve_float(&a_rows, &target[..t]).ok_or(UnitError::SingularMatrix)?;
        let mut exps = Vec::with_capacity(t);
        let mut worst = 0f64;
        for xi in &x {
            let r = xi.to_integer().ok_or(UnitError::SingularMatrix)?;
            let res = Float::with_val(wprec, xi - &r).abs().to_f64();
            worst = worst.max(res);
            exps.push(r);
        }
        if worst > 0.25 {
            return Err(UnitError::ResidualTooLarge(worst));
        }
        let mut u = SUnit { sign: 1, exps };
        for (w, place) in places.sk.iter().enumerate() {
            if !place.is_real() && self.valuation(&u, w) != ords[w] {
                return Err(UnitError::ValuationMismatch(place.label.clone()));
            }
        }
        let value = self.to_field(&u)?;
        if value == *a {
            return Ok(u);
        }
        if self.field.neg(&value) == *a {
            u.sign = -1;
            return Ok(u);
        }
        Err(UnitError::NotInLattice(a.to_string()))
    }

    fn valuations_from_norm(&self, a: &FieldElement, places: &PlaceSet) -> Result<Vec<i64>, UnitError> {
        let nrm = self.field.norm(a);
        let mut ords = vec![0i64; places.n_sk()];
        let finite = places.finite_places();
        for &w in &finite {
            let PlaceKind::Finite { norm } = &places.sk[w].kind else {
                unreachable!()
            };
            let (p, f) = prime_power(norm).ok_or_else(|| {
                PlaceError::Inconsistent(format!(
                    "residue norm {norm} of `{}` is not a prime power",
                    places.sk[w].label
                ))
            })?;
            let shared = finite
                .iter()
                .filter(|&&x| {
                    let PlaceKind::Finite { norm: n2 } = &places.sk[x].kind else {
                        return false;
                    };
                    prime_power(n2).is_some_and(|(p2, _)| p2 == p)
                })
                .count();
            if shared > 1 {
                return Err(PlaceError::ValuationUnavailable(places.sk[w].label.clone()).into());
            }
            let v = padic_val_rational(&nrm, &p);
            if v % f as i64 != 0 {
                return Err(UnitError::NotInLattice(format!(
                    "norm valuation {v} at {p} not divisible by residue degree {f}"
                )));
            }
            ords[w] = v / f as i64;
        }
        Ok(ords)
    }

    /// `u^s` for the group element s.
    pub fn apply_element(&self, s: usize, u: &SUnit) -> SUnit {
        let gm = &self.galois[s];
        let exps = linalg::imat_vec(&gm.matrix, &u.exps);
        let mut sign = u.sign;
        for (j, e) in u.exps.iter().enumerate() {
            if gm.signs[j] < 0 && e.is_odd() {
                sign = -sign;
            }
        }
        SUnit { sign, exps }
    }

    /// `a . u = prod_s (u^s)^{a_s}` for integral `a`.
    pub fn act(&self, a: &ZElem, u: &SUnit) -> SUnit {
        let mut out = SUnit::one(self.rank());
        for (s, c) in a.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            out = out.mul(&self.apply_element(s, u).pow(c));
        }
        out
    }

    /// Same as [`act`](Self::act) for a rational element that must be integral.
    pub fn act_rational(&self, a: &groupalg::QElem, u: &SUnit) -> Result<SUnit, UnitError> {
        let z = a.to_integer().ok_or(UnitError::NonIntegralCoefficients)?;
        Ok(self.act(&z, u))
    }

    /// `l_i(u) = -(1/|G_i|) sum_s log|u^s|_{w_i} s^{-1}`.
    pub fn ell_map(&self, i: usize, u: &SUnit, places: &PlaceSet, g: &AbelianGroup) -> CElem {
        let prec = self.prec + 32;
        let wi = places.distinguished[i];
        let gi = places.decomposition[i].len() as u32;
        let mut out = CElem::zero(g.order(), prec);
        for s in 0..g.order() {
            // |u^s|_{w_i} = |u|_{s^{-1} w_i}
            let w = places.perm[g.inv(s)][wi];
            let l = self.log_abs(u, w);
            out.coeffs[g.inv(s)] = Complex::with_val(prec, -l / gi);
        }
        out
    }

    /// `chi(R_I(u_1 ^ ... ^ u_r)) = det(chi(l_{i_s}(u_t)))`.
    pub fn r_i_det(
        &self,
        idx: &[usize],
        units: &[SUnit],
        chi: &Character,
        places: &PlaceSet,
        g: &AbelianGroup,
    ) -> Complex {
        let prec = self.prec + 32;
        let m: Vec<Vec<Complex>> = idx
            .iter()
            .map(|&i| {
                units
                    .iter()
                    .map(|u| groupalg::apply_char(chi, &self.ell_map(i, u, places, g)))
                    .collect()
            })
            .collect();
        linalg::det_complex(&m, prec)
    }

    /// Index of the sublattice generated by `gens` modulo torsion.
    pub fn sublattice_index(&self, gens: &[SUnit]) -> Result<Integer, UnitError> {
        let rows: IMat = gens.iter().map(|u| u.exps.clone()).collect();
        let snf = linalg::smith(&rows);
        if snf.rank() < self.rank() {
            return Err(UnitError::InfiniteIndex);
        }
        Ok(snf.diag.iter().fold(Integer::from(1), |acc, d| acc * d))
    }

    /// |det| of the log matrix of `gens` with the row of place `drop` removed.
    pub fn regulator_dropping(&self, gens: &[SUnit], drop: usize) -> Result<Float, UnitError> {
        if gens.len() != self.rank() {
            return Err(UnitError::SingularMatrix);
        }
        let cols: Vec<Vec<Float>> = gens.iter().map(|u| self.log_vector(u)).collect();
        let m: Vec<Vec<Float>> = (0..self.log_matrix.len())
            .filter(|&w| w != drop)
            .map(|w| cols.iter().map(|c| c[w].clone()).collect())
            .collect();
        let d = linalg::det_float(&m, self.prec + 32).abs();
        let scale: Float = cols.iter().flatten().fold(Float::with_val(64, 1), |acc, x| {
            acc.max(&Float::with_val(64, x.abs_ref()))
        });
        if d < self.tol() * scale {
            return Err(UnitError::SingularMatrix);
        }
        Ok(d)
    }

    pub fn regulator(&self, gens: &[SUnit]) -> Result<Float, UnitError> {
        self.regulator_dropping(gens, self.log_matrix.len() - 1)
    }

    /// Regulator of the fundamental system, R_{K,S}.
    pub fn fundamental_regulator(&self) -> Result<Float, UnitError> {
        let gens: Vec<SUnit> = (0..self.rank()).map(|j| SUnit::basis(self.rank(), j)).collect();
        self.regulator(&gens)
    }

    /// Sign of the real embedding of `u` at a real place, computed from the exact value.
    pub fn embedding_sign(&self, u: &SUnit, places: &PlaceSet, w: usize) -> Result<i8, UnitError> {
        let PlaceKind::Real { root } = &places.sk[w].kind else {
            return Err(PlaceError::Inconsistent("embedding sign needs a real place".into()).into());
        };
        let mut sign = u.sign;
        for (j, e) in u.exps.iter().enumerate() {
            if e.is_odd() && self.field.embed(&self.fundamental[j], root, self.prec)? < 0 {
                sign = -sign;
            }
        }
        Ok(sign)
    }
}

/// `(p, f)` with `n = p^f`, p prime.
pub fn prime_power(n: &Integer) -> Option<(Integer, u32)> {
    if *n < 2 {
        return None;
    }
    let mut p = Integer::from(2);
    loop {
        if Integer::from(&p * &p) > *n {
            return Some((n.clone(), 1));
        }
        if n.is_divisible(&p) {
            let mut m = n.clone();
            let mut f = 0;
            while m.is_divisible(&p) {
                m /= &p;
                f += 1;
            }
            return (m == 1).then_some((p, f));
        }
        p += 1;
    }
}

fn padic_val_rational(r: &Rational, p: &Integer) -> i64 {
    let v = |n: &Integer| {
        let mut m = n.clone().abs();
        let mut k = 0i64;
        while m != 0 && m.is_divisible(p) {
            m /= p;
            k += 1;
        }
        k
    };
    v(r.numer()) - v(r.denom())
}
