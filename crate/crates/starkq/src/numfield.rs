//! Exact arithmetic in `K = Q[x]/(p(x))` and evaluation at real embeddings.
//!
//! Elements are stored as reduced coefficient vectors with big-rational
//! entries. Real embeddings are given by roots of `p` that are supplied
//! approximately and refined with Newton's method inside a rational
//! isolating interval.

use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Integer, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not invertible modulo the defining polynomial")]
    NonInvertible,
    #[error("defining polynomial must be monic with degree >= 1")]
    NotMonic,
    #[error("defining polynomial is not squarefree")]
    NotSquarefree,
    #[error("polynomial does not map x to a root of p: {0}")]
    NotAnAutomorphism(String),
    #[error("cannot parse polynomial `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("root refinement left the isolating interval")]
    RefinementEscapedInterval,
    #[error("no sign change of p near the approximate root {0}")]
    NoIsolatingInterval(String),
    #[error("precision exhausted while evaluating an embedding")]
    PrecisionExhausted,
}

/// Dense polynomial over Q, lowest degree first, no trailing zeros.
pub type QPoly = Vec<Rational>;

fn trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> QPoly {
    let n = a.len().max(b.len());
    let mut out: QPoly = (0..n)
        .map(|i| {
            let mut c = a.get(i).cloned().unwrap_or_default();
            if let Some(bi) = b.get(i) {
                c -= bi;
            }
            c
        })
        .collect();
    trim(&mut out);
    out
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder of `a` by a nonzero `b`.
fn poly_divrem(a: &[Rational], b: &[Rational]) -> (QPoly, QPoly) {
    let mut r: QPoly = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::new(); r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = Rational::from(r.last().unwrap() / &lead);
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] -= Rational::from(&c * bj);
        }
        q[shift] = c;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn poly_derivative(a: &[Rational]) -> QPoly {
    let mut out: QPoly = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| Rational::from(c * i as u64))
        .collect();
    trim(&mut out);
    out
}

/// Returns (g, s) with g = gcd(a, b) monic and s*a = g mod b.
fn poly_ext_gcd(a: &[Rational], b: &[Rational]) -> (QPoly, QPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1): (QPoly, QPoly) = (vec![Rational::from(1)], Vec::new());
    while !r1.is_empty() {
        let (q, r) = poly_divrem(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if let Some(lead) = r0.last().cloned() {
        for c in r0.iter_mut() {
            *c /= &lead;
        }
        for c in s0.iter_mut() {
            *c /= &lead;
        }
    }
    (r0, s0)
}

/// Parses a polynomial in `x` with rational coefficients, e.g.
/// `-9/68*x^5 + 21/68*x^4 - 53/17*x - 69/34`.
pub fn parse_qpoly(src: &str) -> Result<QPoly, FieldError> {
    let err = |reason: &str| FieldError::Parse {
        input: src.to_string(),
        reason: reason.to_string(),
    };
    let cleaned: String = src
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .collect();
    if cleaned.is_empty() {
        return Err(err("empty input"));
    }
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in cleaned.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut out: QPoly = Vec::new();
    for term in terms {
        let (neg, body) = match term.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, term.strip_prefix('+').unwrap_or(&term)),
        };
        if body.is_empty() {
            return Err(err("dangling sign"));
        }
        let (coef_str, deg) = match body.find('x') {
            None => (body, 0usize),
            Some(pos) => {
                let coef = body[..pos].trim_end_matches('*');
                let rest = &body[pos + 1..];
                let deg = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .ok_or_else(|| err("expected ^ after x"))?
                        .parse::<usize>()
                        .map_err(|_| err("bad exponent"))?
                };
                (coef, deg)
            }
        };
        let mut coef = if coef_str.is_empty() {
            Rational::from(1)
        } else {
            coef_str.parse::<Rational>().map_err(|_| err("bad coefficient"))?
        };
        if neg {
            coef = -coef;
        }
        if out.len() <= deg {
            out.resize(deg + 1, Rational::new());
        }
        out[deg] += coef;
    }
    trim(&mut out);
    Ok(out)
}

fn format_qpoly(c: &[Rational]) -> String {
    let mut s = String::new();
    for (deg, coef) in c.iter().enumerate().rev() {
        if *coef == 0 {
            continue;
        }
        let neg = *coef < 0;
        let abs = Rational::from(coef.abs_ref());
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        match deg {
            0 => s.push_str(&abs.to_string()),
            _ => {
                if abs != 1 {
                    s.push_str(&abs.to_string());
                    s.push('*');
                }
                s.push('x');
                if deg > 1 {
                    s.push_str(&format!("^{deg}"));
                }
            }
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    poly: Vec<Integer>,
    qpoly: QPoly,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coeffs: Vec<Rational>,
}

impl FieldElement {
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    /// Order used for canonical element listings: compares coefficients
    /// from the leading (highest-degree) one downwards.
    pub fn cmp_canonical(&self, other: &Self) -> Ordering {
        for (a, b) in self.coeffs.iter().rev().zip(other.coeffs.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_qpoly(&self.coeffs))
    }
}

impl NumberField {
    /// Builds `Q[x]/(p)` from integer coefficients, lowest degree first.
    pub fn new(poly: Vec<Integer>) -> Result<Self, FieldError> {
        let mut poly = poly;
        while poly.last().is_some_and(|c| *c == 0) {
            poly.pop();
        }
        if poly.len() < 2 || *poly.last().unwrap() != 1 {
            return Err(FieldError::NotMonic);
        }
        let qpoly: QPoly = poly.iter().map(Rational::from).collect();
        let (g, _) = poly_ext_gcd(&qpoly, &poly_derivative(&qpoly));
        if g.len() > 1 {
            return Err(FieldError::NotSquarefree);
        }
        Ok(NumberField { poly, qpoly })
    }

    pub fn parse(src: &str) -> Result<Self, FieldError> {
        let q = parse_qpoly(src)?;
        let mut ints = Vec::with_capacity(q.len());
        for c in &q {
            if *c.denom() != 1 {
                return Err(FieldError::Parse {
                    input: src.to_string(),
                    reason: "defining polynomial must have integer coefficients".into(),
                });
            }
            ints.push(c.numer().clone());
        }
        Self::new(ints)
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn min_poly(&self) -> &[Integer] {
        &self.poly
    }

    fn reduce(&self, mut p: QPoly) -> FieldElement {
        trim(&mut p);
        let n = self.degree();
        // p is monic, so reduction needs no division.
        while p.len() > n {
            let top = p.pop().unwrap();
            let shift = p.len() - n;
            for (j, c) in self.poly.iter().enumerate().take(n) {
                p[shift + j] -= Rational::from(&top * c);
            }
            trim(&mut p);
        }
        p.resize(n, Rational::new());
        FieldElement { coeffs: p }
    }

    pub fn from_poly(&self, p: QPoly) -> FieldElement {
        self.reduce(p)
    }

    pub fn element(&self, src: &str) -> Result<FieldElement, FieldError> {
        Ok(self.reduce(parse_qpoly(src)?))
    }

    pub fn from_rational(&self, r: Rational) -> FieldElement {
        self.reduce(vec![r])
    }

    pub fn one(&self) -> FieldElement {
        self.from_rational(Rational::from(1))
    }

    pub fn zero(&self) -> FieldElement {
        self.from_rational(Rational::new())
    }

    pub fn gen(&self) -> FieldElement {
        self.reduce(vec![Rational::new(), Rational::from(1)])
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| Rational::from(x + y))
            .collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| Rational::from(x - y))
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.reduce(poly_mul(&a.coeffs, &b.coeffs))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let mut ap = a.coeffs.clone();
        trim(&mut ap);
        let (g, s) = poly_ext_gcd(&ap, &self.qpoly);
        if g.len() != 1 {
            return Err(FieldError::NonInvertible);
        }
        Ok(self.reduce(s))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, e: i64) -> Result<FieldElement, FieldError> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            k >>= 1;
            if k > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        Ok(acc)
    }

    /// `a(q(x))` reduced mod p, without checking that q is a root.
    fn compose(&self, a: &FieldElement, q: &FieldElement) -> FieldElement {
        let mut acc = self.zero();
        for c in a.coeffs.iter().rev() {
            acc = self.mul(&acc, q);
            acc.coeffs[0] += c;
        }
        acc
    }

    pub fn is_root(&self, q: &FieldElement) -> bool {
        let p = self.reduce(self.qpoly.clone());
        debug_assert!(p.is_zero());
        let mut acc = self.zero();
        for c in self.qpoly.iter().rev() {
            acc = self.mul(&acc, q);
            acc.coeffs[0] += c;
        }
        acc.is_zero()
    }

    /// Applies the automorphism `x -> q(x)` to `a`.
    pub fn apply_aut(&self, a: &FieldElement, q: &FieldElement) -> Result<FieldElement, FieldError> {
        if !self.is_root(q) {
            return Err(FieldError::NotAnAutomorphism(q.to_string()));
        }
        Ok(self.compose(a, q))
    }

    /// Same as [`apply_aut`](Self::apply_aut) for a map already known to be an automorphism.
    pub fn apply_aut_unchecked(&self, a: &FieldElement, q: &FieldElement) -> FieldElement {
        self.compose(a, q)
    }

    /// Matrix of multiplication by `a` on the power basis (column j = a * x^j).
    fn mult_matrix(&self, a: &FieldElement) -> Vec<Vec<Rational>> {
        let n = self.degree();
        let mut cols = Vec::with_capacity(n);
        let mut cur = a.clone();
        let x = self.gen();
        for _ in 0..n {
            cols.push(cur.coeffs.clone());
            cur = self.mul(&cur, &x);
        }
        (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Absolute norm `N_{K/Q}(a)`, the determinant of multiplication by `a`.
    pub fn norm(&self, a: &FieldElement) -> Rational {
        crate::linalg::det_rational(self.mult_matrix(a))
    }

    pub fn trace(&self, a: &FieldElement) -> Rational {
        let m = self.mult_matrix(a);
        m.iter().enumerate().map(|(i, r)| r[i].clone()).sum()
    }

    /// Evaluates `p` at a rational point.
    pub fn eval_min_poly_q(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.poly.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    fn eval_min_poly_f(&self, x: &Float) -> (Float, Float) {
        let prec = x.prec();
        let mut val = Float::with_val(prec, 0);
        let mut der = Float::with_val(prec, 0);
        for c in self.poly.iter().rev() {
            der *= x;
            der += &val;
            val *= x;
            val += c;
        }
        (val, der)
    }

    /// Real embedding of `a` at `root` with `bits` of working precision.
    pub fn embed(&self, a: &FieldElement, root: &RealRoot, bits: u32) -> Result<Float, FieldError> {
        if root.bits < bits {
            return Err(FieldError::PrecisionExhausted);
        }
        let prec = bits + 32;
        let xi = Float::with_val(prec, &root.approx);
        let mut acc = Float::with_val(prec, 0);
        for c in a.coeffs.iter().rev() {
            acc *= &xi;
            acc += c;
        }
        Ok(acc)
    }
}

/// A real root of the defining polynomial with a certified sign change.
#[derive(Clone, Debug)]
pub struct RealRoot {
    pub approx: Float,
    pub lo: Rational,
    pub hi: Rational,
    pub bits: u32,
}

impl RealRoot {
    /// Builds an isolating interval around a decimal approximation.
    pub fn from_decimal(field: &NumberField, approx: &str) -> Result<Self, FieldError> {
        let parsed = Float::parse(approx).map_err(|_| FieldError::Parse {
            input: approx.to_string(),
            reason: "not a decimal number".into(),
        })?;
        let digits = approx.chars().filter(|c| c.is_ascii_digit()).count() as u32;
        let bits = (digits * 10 / 3).max(64) + 16;
        let center = Float::with_val(bits, parsed)
            .to_rational()
            .ok_or_else(|| FieldError::NoIsolatingInterval(approx.to_string()))?;
        let scale = Rational::from(center.abs_ref()) + 1u32;
        let mut width = Rational::from((1u32, 1u32 << 30)) * &scale;
        for _ in 0..24 {
            let lo = Rational::from(&center - &width);
            let hi = Rational::from(&center + &width);
            let a = field.eval_min_poly_q(&lo);
            let b = field.eval_min_poly_q(&hi);
            if (a < 0 && b > 0) || (a > 0 && b < 0) {
                let root = RealRoot {
                    approx: Float::with_val(bits, &center),
                    lo,
                    hi,
                    bits: 0,
                };
                return Ok(root);
            }
            width *= 4u32;
        }
        Err(FieldError::NoIsolatingInterval(approx.to_string()))
    }

    /// Newton refinement to `target_bits`, verified against the isolating interval.
    pub fn refine(&self, field: &NumberField, target_bits: u32) -> Result<RealRoot, FieldError> {
        if self.bits >= target_bits {
            return Ok(self.clone());
        }
        let prec = target_bits + 32;
        let lo = Float::with_val(prec, &self.lo);
        let hi = Float::with_val(prec, &self.hi);
        let mut x = Float::with_val(prec, &self.approx);
        if x < lo || x > hi {
            x = Float::with_val(prec, &lo + &hi) / 2u32;
        }
        let stop = Float::with_val(prec, Float::i_exp(1, -(target_bits as i32) - 8));
        let mut converged = false;
        for _ in 0..200 {
            let (v, d) = field.eval_min_poly_f(&x);
            if d.is_zero() {
                return Err(FieldError::RefinementEscapedInterval);
            }
            let step = Float::with_val(prec, &v / &d);
            x -= &step;
            if x < lo || x > hi {
                return Err(FieldError::RefinementEscapedInterval);
            }
            let rel = Float::with_val(prec, step.abs_ref()) / (Float::with_val(prec, x.abs_ref()) + 1u32);
            if rel < stop {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(FieldError::RefinementEscapedInterval);
        }
        Ok(RealRoot {
            approx: x,
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            bits: target_bits,
        })
    }

    /// |p(approx)| relative to the size of the coefficients.
    pub fn residual(&self, field: &NumberField) -> Float {
        let (v, _) = field.eval_min_poly_f(&self.approx);
        v.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q10() -> NumberField {
        NumberField::parse("x^2 - 10").unwrap()
    }

    #[test]
    fn conjugate_product_of_unit() {
        let k = q10();
        let a = k.element("3 + x").unwrap();
        let b = k.element("3 - x").unwrap();
        assert_eq!(k.mul(&a, &b), k.element("-1").unwrap());
    }

    #[test]
    fn inverse_and_division() {
        let k = NumberField::parse("x^6 - 24*x^4 - 50*x^3 - 3*x^2 + 30*x - 2").unwrap();
        let a = k
            .element("7/68*x^5 - 5/68*x^4 - 145/68*x^3 - 295/68*x^2 - 40/17*x + 133/34")
            .unwrap();
        let ai = k.inv(&a).unwrap();
        assert_eq!(k.mul(&a, &ai), k.one());
        assert_eq!(k.inv(&k.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn parse_roundtrip() {
        let p = "-9/68*x^5 + 21/68*x^4 + 167/68*x^3 + 83/68*x^2 - 53/17*x - 69/34";
        let k = NumberField::parse("x^6 - 24*x^4 - 50*x^3 - 3*x^2 + 30*x - 2").unwrap();
        let e = k.element(p).unwrap();
        assert_eq!(e.to_string(), p);
        assert_eq!(k.element("x^1").unwrap(), k.gen());
        assert!(parse_qpoly("3*y").is_err());
    }

    #[test]
    fn rejects_bad_polynomials() {
        assert_eq!(NumberField::parse("2*x^2 - 1"), Err(FieldError::NotMonic));
        assert_eq!(NumberField::parse("x^2 - 2*x + 1"), Err(FieldError::NotSquarefree));
    }

    #[test]
    fn conjugation_automorphism() {
        let k = q10();
        let a = k.element("3 + x").unwrap();
        let s = k.element("-x").unwrap();
        assert_eq!(k.apply_aut(&a, &s).unwrap(), k.element("3 - x").unwrap());
        assert_eq!(k.apply_aut(&a, &k.gen()).unwrap(), a);
        let bad = k.element("x + 1").unwrap();
        assert!(matches!(k.apply_aut(&a, &bad), Err(FieldError::NotAnAutomorphism(_))));
    }

    #[test]
    fn norm_of_unit_and_rationals() {
        let k = q10();
        assert_eq!(k.norm(&k.element("3 + x").unwrap()), -1);
        assert_eq!(k.norm(&k.element("x").unwrap()), -10);
        assert_eq!(k.norm(&k.element("5/8").unwrap()), Rational::from((25, 64)));
    }

    #[test]
    fn sqrt10_root() {
        let k = q10();
        let r = RealRoot::from_decimal(&k, "3.1622776601").unwrap();
        let r = r.refine(&k, 128).unwrap();
        let expect = Float::with_val(160, 10).sqrt();
        let diff = Float::with_val(160, &r.approx - &expect).abs();
        assert!(diff < Float::with_val(64, Float::i_exp(1, -128)));
        let again = r.refine(&k, 128).unwrap();
        assert_eq!(again.approx, r.approx);
        let v = k.embed(&k.element("3 + x").unwrap(), &r, 128).unwrap();
        assert!((v - 6.162_277_660_168_38_f64).abs() < 1e-15);
        let one = k.embed(&k.one(), &r, 128).unwrap();
        assert_eq!(one, 1);
    }
}
