//! Stark regulators, the element `beta_S(A) e'_{r,S}`, its rational
//! recognition, and the inverse map used to build L-value tables from a
//! known exact element.

use std::collections::BTreeMap;

use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artin::ArtinSystem;
use crate::cfrac::{self, Recognition, RecognizeParams};
use crate::groupalg::{self, AbelianGroup, CElem, Character, QElem};
use crate::splaces::PlaceSet;
use crate::sunits::{SUnit, SUnitLattice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StarkError {
    #[error("no L-value for character {0}")]
    MissingLValue(String),
    #[error("character {0} in the L-value table is not a character of G")]
    UnknownCharacter(String),
    #[error("L-value for {chi} claims order {claimed}, the place data gives {actual}")]
    OrderMismatch { chi: String, claimed: usize, actual: usize },
    #[error("L-value for {0} is zero")]
    ZeroLValue(String),
    #[error("cannot parse L-value `{0}`")]
    BadNumber(String),
    #[error("values at conjugate characters are not conjugate ({0})")]
    ConjugationAsymmetry(String),
    #[error("imaginary part of coefficient {0} exceeds the tolerance")]
    NonRealCoefficient(usize),
    #[error("Stark regulator vanishes at {0}")]
    RegulatorVanishes(String),
    #[error("coefficient {index} not recognized (best {best}, error {error:e})")]
    RecognitionFailed { index: usize, best: String, error: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LValueEntry {
    /// Angle of the character value at each group element, keyed by label: chi(s) = exp(2 pi i angle).
    pub character: BTreeMap<String, String>,
    pub order: usize,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LValueTable {
    pub precision_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub entries: Vec<LValueEntry>,
}

/// Leading terms resolved against the character table.
#[derive(Clone, Debug)]
pub struct ResolvedLValues {
    /// Indexed like the character table; None where no value was given.
    pub values: Vec<Option<Complex>>,
}

pub fn parse_decimal(s: &str, prec: u32) -> Result<Float, StarkError> {
    let parsed = Float::parse(s.trim()).map_err(|_| StarkError::BadNumber(s.to_string()))?;
    Ok(Float::with_val(prec, parsed))
}

pub fn character_key(chi: &Character, g: &AbelianGroup) -> BTreeMap<String, String> {
    (0..g.order())
        .map(|s| (g.label(s).to_string(), chi.angle(s).to_string()))
        .collect()
}

impl LValueTable {
    pub fn resolve(
        &self,
        g: &AbelianGroup,
        chars: &[Character],
        places: &PlaceSet,
        prec: u32,
    ) -> Result<ResolvedLValues, StarkError> {
        let mut values = vec![None; chars.len()];
        for e in &self.entries {
            let desc = format!("{:?}", e.character);
            let mut angles = vec![Rational::new(); g.order()];
            for (label, a) in &e.character {
                let s = g
                    .index_of(label)
                    .ok_or_else(|| StarkError::UnknownCharacter(desc.clone()))?;
                angles[s] = a
                    .parse::<Rational>()
                    .map_err(|_| StarkError::UnknownCharacter(desc.clone()))?;
            }
            if e.character.len() != g.order() {
                return Err(StarkError::UnknownCharacter(desc));
            }
            let chi = Character::from_angles(angles);
            let c = chars
                .iter()
                .position(|x| *x == chi)
                .ok_or_else(|| StarkError::UnknownCharacter(desc.clone()))?;
            let actual = places.order_of_vanishing(&chi);
            if actual != e.order {
                return Err(StarkError::OrderMismatch {
                    chi: desc,
                    claimed: e.order,
                    actual,
                });
            }
            let z = Complex::with_val(prec, (parse_decimal(&e.re, prec)?, parse_decimal(&e.im, prec)?));
            if z.is_zero() {
                return Err(StarkError::ZeroLValue(desc));
            }
            values[c] = Some(z);
        }
        let tol = tolerance(prec.min(self.precision_bits));
        for (c, chi) in chars.iter().enumerate() {
            let d = chars.iter().position(|x| *x == chi.conj()).unwrap();
            if let (Some(a), Some(b)) = (&values[c], &values[d]) {
                let diff = Complex::with_val(prec, a - Complex::with_val(prec, b.conj_ref()));
                let scale = Float::with_val(prec, a.abs_ref()) + 1u32;
                if Float::with_val(prec, diff.abs_ref()) > tol.clone() * scale {
                    return Err(StarkError::ConjugationAsymmetry(chi.to_string()));
                }
            }
        }
        Ok(ResolvedLValues { values })
    }
}

/// 2^(-bits/2).
pub fn tolerance(bits: u32) -> Float {
    Float::with_val(64, Float::i_exp(1, -((bits / 2) as i32)))
}

/// `R(chi, A)`: the conjugate character applied to `R_I(eps_{w_i1} ^ ... )`.
///
/// For nontrivial `chi`, I is the set of places whose decomposition group
/// lies in the kernel. For the trivial character, I is every place but the
/// last and the units are `eps_{w_i} eps_{w_n}^{-1}`.
pub fn stark_regulator(
    chi: &Character,
    sys: &ArtinSystem,
    lattice: &SUnitLattice,
    places: &PlaceSet,
    g: &AbelianGroup,
) -> Result<Complex, StarkError> {
    let n_s = places.n_s();
    let (idx, units): (Vec<usize>, Vec<SUnit>) = if chi.is_trivial() {
        let last = &sys.eps[places.distinguished[n_s - 1]];
        (0..n_s - 1)
            .map(|i| (i, sys.eps[places.distinguished[i]].div(last)))
            .unzip()
    } else {
        places
            .kernel_places(chi)
            .into_iter()
            .map(|i| (i, sys.eps[places.distinguished[i]].clone()))
            .unzip()
    };
    let r = lattice.r_i_det(&idx, &units, &chi.conj(), places, g);
    if Float::with_val(64, r.abs_ref()) < tolerance(lattice.prec) {
        return Err(StarkError::RegulatorVanishes(chi.to_string()));
    }
    Ok(r)
}

/// `sum_{chi in set} (L*(chi) / R(chi)) e_{conj chi}`.
pub fn beta_numeric(
    char_set: &[usize],
    chars: &[Character],
    lvals: &ResolvedLValues,
    sys: &ArtinSystem,
    lattice: &SUnitLattice,
    places: &PlaceSet,
    g: &AbelianGroup,
) -> Result<CElem, StarkError> {
    let prec = lattice.prec + 32;
    let mut out = CElem::zero(g.order(), prec);
    for &c in char_set {
        let chi = &chars[c];
        let l = lvals.values[c]
            .clone()
            .ok_or_else(|| StarkError::MissingLValue(chi.to_string()))?;
        let r = stark_regulator(chi, sys, lattice, places, g)?;
        let a = Complex::with_val(prec, l / r);
        out = out.add(&groupalg::idempotent(&chi.conj(), g, prec).scale(&a));
    }
    Ok(out)
}

/// Exact element recognized from its numerical approximation.
#[derive(Clone, Debug)]
pub struct BetaResult {
    pub numeric: CElem,
    pub exact: QElem,
    pub d: Integer,
    pub residual: f64,
}

/// Recognizes every coefficient as a rational with denominator at most `max_den`.
pub fn recognize_rationals(b: &CElem, max_den: &Integer, bits: u32) -> Result<BetaResult, StarkError> {
    let params = RecognizeParams::for_bits(bits, max_den.clone());
    let tol = tolerance(bits);
    let mut coeffs = Vec::with_capacity(b.coeffs.len());
    let mut residual = 0f64;
    for (i, c) in b.coeffs.iter().enumerate() {
        if Float::with_val(64, c.imag().abs_ref()) > tol {
            return Err(StarkError::NonRealCoefficient(i));
        }
        match cfrac::recognize(c.real(), &params) {
            Recognition::Accepted(q) => {
                let err = Float::with_val(c.prec().0, c.real() - &q).abs().to_f64();
                residual = residual.max(err);
                coeffs.push(q);
            }
            Recognition::Rejected { best, error } => {
                return Err(StarkError::RecognitionFailed {
                    index: i,
                    best: best.to_string(),
                    error,
                })
            }
        }
    }
    let exact = QElem::new(coeffs);
    let d = exact.denominator();
    Ok(BetaResult {
        numeric: b.clone(),
        exact,
        d,
        residual,
    })
}

#[allow(clippy::too_many_arguments)]
/// `A(chi) = conj(chi)(beta)` and `L*(chi) = A(chi) R(chi)` for every character in the set.
pub fn derive_lvalues(
    beta_exact: &QElem,
    char_set: &[usize],
    chars: &[Character],
    sys: &ArtinSystem,
    lattice: &SUnitLattice,
    places: &PlaceSet,
    g: &AbelianGroup,
    digits: usize,
    source: &str,
) -> Result<LValueTable, StarkError> {
    let prec = lattice.prec + 32;
    let mut entries = Vec::with_capacity(char_set.len());
    for &c in char_set {
        let chi = &chars[c];
        let a = beta_exact.apply_char(&chi.conj(), prec);
        let r = stark_regulator(chi, sys, lattice, places, g)?;
        let l = Complex::with_val(prec, a * r);
        entries.push(LValueEntry {
            character: character_key(chi, g),
            order: places.order_of_vanishing(chi),
            re: to_decimal(l.real(), digits),
            im: to_decimal(l.imag(), digits),
        });
    }
    Ok(LValueTable {
        precision_bits: lattice.prec,
        source: Some(source.to_string()),
        entries,
    })
}

/// Fixed-point decimal rendering with `digits` significant digits.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let s = x.to_string_radix(10, Some(digits));
    // rug renders as d.ddde±x; expand to plain notation
    let (mant, exp) = match s.split_once('e') {
        Some((m, e)) => (m.to_string(), e.parse::<i64>().unwrap_or(0)),
        None => (s.clone(), 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches('-');
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let all: String = format!("{int_part}{frac_part}");
    let point = int_part.len() as i64 + exp;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), all)
    } else if point as usize >= all.len() {
        format!("{}{}", all, "0".repeat(point as usize - all.len()))
    } else {
        format!("{}.{}", &all[..point as usize], &all[point as usize..])
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        let x = Float::with_val(128, Rational::from((-1, 4)));
        assert_eq!(to_decimal(&x, 20), "-0.25");
        let y = Float::with_val(128, 12345);
        assert_eq!(to_decimal(&y, 20), "12345");
        let z = Float::with_val(128, Rational::from((1, 1000)));
        assert_eq!(to_decimal(&z, 5), "0.001");
        let back = parse_decimal(&to_decimal(&Float::with_val(128, 2).sqrt(), 40), 128).unwrap();
        assert!((back - Float::with_val(128, 2).sqrt()).abs() < 1e-38);
    }

    #[test]
    fn recognition_of_group_ring_element() {
        let exact = QElem::new(vec![
            Rational::from((43, 1393)),
            Rational::from((-19, 1393)),
            Rational::from((-24, 1393)),
        ]);
        let num = exact.to_complex(128);
        let r = recognize_rationals(&num, &Integer::from(1_000_000), 128).unwrap();
        assert_eq!(r.exact, exact);
        assert_eq!(r.d, 1393);
    }
}
