//! Finite abelian Galois groups, their characters, and group rings.
//!
//! Elements are listed in a canonical order: the identity first, then the
//! remaining automorphism polynomials sorted by their coefficients starting
//! from the highest degree. Characters are listed trivial first, then by
//! exponent tuples on the cyclic generators in lexicographic order.
//!
//! Idempotent convention: `e_chi = (1/|G|) sum_s chi(s) s^{-1}`, so that
//! `chi(e_chi) = 1`.

use std::fmt;

use rug::float::Constant;
use rug::{Complex, Float, Integer, Rational};
use thiserror::Error;

use crate::linalg;
use crate::numfield::{FieldElement, NumberField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("automorphism list is not closed under composition")]
    NotClosed,
    #[error("group is not abelian")]
    NotAbelian,
    #[error("automorphism list does not contain the identity x -> x")]
    NoIdentity,
    #[error("automorphism `{0}` listed twice")]
    Duplicate(String),
    #[error("character set is not stable under Galois conjugation")]
    NotGaloisStable,
    #[error("rounding of an idempotent coefficient exceeded the tolerance")]
    RoundingExceededTolerance,
    #[error("rounded element is not idempotent")]
    NotIdempotent,
    #[error("{0}")]
    Field(#[from] crate::numfield::FieldError),
}

#[derive(Clone, Debug)]
pub struct AbelianGroup {
    labels: Vec<String>,
    maps: Vec<FieldElement>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    /// Invariant factors d_1 | d_2 | ... (all > 1).
    invariants: Vec<u64>,
    generators: Vec<usize>,
    /// Exponents of each element on the generators.
    coords: Vec<Vec<u64>>,
    /// `from_input[i]` is the canonical index of the i-th input automorphism.
    from_input: Vec<usize>,
}

impl AbelianGroup {
    /// Builds the group from labelled automorphism polynomials.
    pub fn build(field: &NumberField, autos: &[(String, FieldElement)]) -> Result<Self, GroupError> {
        for (_, q) in autos {
            if !field.is_root(q) {
                return Err(crate::numfield::FieldError::NotAnAutomorphism(q.to_string()).into());
            }
        }
        let x = field.gen();
        let id_pos = autos.iter().position(|(_, q)| *q == x).ok_or(GroupError::NoIdentity)?;
        let mut order: Vec<usize> = (0..autos.len()).filter(|&i| i != id_pos).collect();
        order.sort_by(|&a, &b| autos[a].1.cmp_canonical(&autos[b].1));
        order.insert(0, id_pos);
        for w in order.windows(2) {
            if autos[w[0]].1 == autos[w[1]].1 {
                return Err(GroupError::Duplicate(autos[w[1]].0.clone()));
            }
        }
        let labels: Vec<String> = order.iter().map(|&i| autos[i].0.clone()).collect();
        let maps: Vec<FieldElement> = order.iter().map(|&i| autos[i].1.clone()).collect();
        let mut from_input = vec![0; autos.len()];
        for (c, &i) in order.iter().enumerate() {
            from_input[i] = c;
        }
        let n = maps.len();
        let find = |e: &FieldElement| maps.iter().position(|m| m == e);
        let mut mul = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                // polynomial of a∘b is q_b(q_a(x))
                let comp = field.apply_aut_unchecked(&maps[b], &maps[a]);
                mul[a][b] = find(&comp).ok_or(GroupError::NotClosed)?;
            }
        }
        for a in 0..n {
            for b in 0..a {
                if mul[a][b] != mul[b][a] {
                    return Err(GroupError::NotAbelian);
                }
            }
        }
        let inv = (0..n)
            .map(|a| (0..n).find(|&b| mul[a][b] == 0).ok_or(GroupError::NotClosed))
            .collect::<Result<Vec<_>, _>>()?;
        let (invariants, generators, coords) = cyclic_decomposition(&mul);
        Ok(AbelianGroup {
            labels,
            maps,
            mul,
            inv,
            invariants,
            generators,
            coords,
            from_input,
        })
    }

    /// Group given only by a multiplication table (identity at index 0).
    pub fn from_table(labels: Vec<String>, mul: Vec<Vec<usize>>) -> Self {
        let n = mul.len();
        let inv = (0..n).map(|a| (0..n).find(|&b| mul[a][b] == 0).unwrap()).collect();
        let (invariants, generators, coords) = cyclic_decomposition(&mul);
        AbelianGroup {
            labels,
            maps: Vec::new(),
            mul,
            inv,
            invariants,
            generators,
            coords,
            from_input: (0..n).collect(),
        }
    }

    /// Cyclic group of order n with labels id, s, s^2, ...
    pub fn cyclic(n: usize) -> Self {
        let labels = (0..n)
            .map(|k| match k {
                0 => "id".to_string(),
                1 => "s".to_string(),
                _ => format!("s^{k}"),
            })
            .collect();
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(labels, mul)
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn map(&self, i: usize) -> &FieldElement {
        &self.maps[i]
    }

    pub fn canonical_of_input(&self, i: usize) -> usize {
        self.from_input[i]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn coords(&self, a: usize) -> &[u64] {
        &self.coords[a]
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariants.len() <= 1
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul[x][a];
            k += 1;
        }
        k
    }

    /// Subgroup generated by a set of elements (sorted indices).
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut set = vec![false; self.order()];
        set[0] = true;
        let mut frontier = vec![0];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul[x][g];
                if !set[y] {
                    set[y] = true;
                    frontier.push(y);
                }
            }
        }
        (0..self.order()).filter(|&i| set[i]).collect()
    }

    /// The characters in canonical order.
    pub fn characters(&self) -> Vec<Character> {
        let mut tuples: Vec<Vec<u64>> = vec![Vec::new()];
        for &d in &self.invariants {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    (0..d).map(move |k| {
                        let mut t2 = t.clone();
                        t2.push(k);
                        t2
                    })
                })
                .collect();
        }
        tuples
            .into_iter()
            .map(|t| {
                let angles = (0..self.order())
                    .map(|a| {
                        let mut s = Rational::new();
                        for ((k, c), d) in t.iter().zip(&self.coords[a]).zip(&self.invariants) {
                            s += Rational::from((Integer::from(k * c), Integer::from(*d)));
                        }
                        frac(s)
                    })
                    .collect();
                Character { angles }
            })
            .collect()
    }
}

fn frac(r: Rational) -> Rational {
    let f = r.clone().floor();
    r - f
}

/// Invariant factors, generators and coordinates from the table presentation.
fn cyclic_decomposition(mul: &[Vec<usize>]) -> (Vec<u64>, Vec<usize>, Vec<Vec<u64>>) {
    let n = mul.len();
    let mut rel: Vec<Vec<i64>> = Vec::new();
    let mut e0 = vec![0i64; n];
    e0[0] = 1;
    rel.push(e0);
    for a in 1..n {
        for b in a..n {
            let mut r = vec![0i64; n];
            r[a] += 1;
            r[b] += 1;
            r[mul[a][b]] -= 1;
            rel.push(r);
        }
    }
    let s = linalg::smith(&linalg::imat_from_i64(&rel));
    // coordinates of e_a in the SNF basis: row a of V, reduced mod each diagonal entry
    let keep: Vec<usize> = (0..s.rank()).filter(|&i| s.diag[i] != 1).collect();
    let invariants: Vec<u64> = keep.iter().map(|&i| s.diag[i].to_u64().unwrap()).collect();
    let coords: Vec<Vec<u64>> = (0..n)
        .map(|a| {
            keep.iter()
                .zip(&invariants)
                .map(|(&i, &d)| {
                    let m = Integer::from(d);
                    Integer::from(s.v[a][i].modulo_ref(&m)).to_u64().unwrap()
                })
                .collect()
        })
        .collect();
    let generators = (0..keep.len())
        .map(|g| {
            (0..n)
                .find(|&a| coords[a].iter().enumerate().all(|(j, &c)| c == u64::from(j == g)))
                .expect("unit coordinate vector present in finite abelian group")
        })
        .collect();
    (invariants, generators, coords)
}

/// A character, stored as exact angles: `chi(s) = exp(2 pi i angle(s))`, angle in [0,1).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    angles: Vec<Rational>,
}

impl Character {
    pub fn from_angles(angles: Vec<Rational>) -> Self {
        Character {
            angles: angles.into_iter().map(frac).collect(),
        }
    }

    pub fn angle(&self, s: usize) -> &Rational {
        &self.angles[s]
    }

    pub fn angles(&self) -> &[Rational] {
        &self.angles
    }

    pub fn is_trivial(&self) -> bool {
        self.angles.iter().all(|a| *a == 0)
    }

    pub fn conj(&self) -> Character {
        Character::from_angles(self.angles.iter().map(|a| Rational::from(-a)).collect())
    }

    pub fn pow(&self, k: i64) -> Character {
        Character::from_angles(self.angles.iter().map(|a| Rational::from(a * k)).collect())
    }

    pub fn mul(&self, other: &Character) -> Character {
        Character::from_angles(
            self.angles
                .iter()
                .zip(&other.angles)
                .map(|(a, b)| Rational::from(a + b))
                .collect(),
        )
    }

    pub fn kernel(&self) -> Vec<usize> {
        (0..self.angles.len()).filter(|&s| self.angles[s] == 0).collect()
    }

    pub fn contains_in_kernel(&self, subgroup: &[usize]) -> bool {
        subgroup.iter().all(|&s| self.angles[s] == 0)
    }

    pub fn is_real(&self) -> bool {
        self.angles.iter().all(|a| *a == 0 || *a == Rational::from((1, 2)))
    }

    pub fn value(&self, s: usize, prec: u32) -> Complex {
        root_of_unity(&self.angles[s], prec)
    }

    /// Checks multiplicativity against the group table.
    pub fn is_homomorphism(&self, g: &AbelianGroup) -> bool {
        let n = g.order();
        (0..n).all(|a| {
            (0..n).all(|b| frac(Rational::from(&self.angles[a] + &self.angles[b])) == self.angles[g.mul(a, b)])
        })
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.angles.iter().map(|a| a.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

pub fn root_of_unity(angle: &Rational, prec: u32) -> Complex {
    let a = frac(angle.clone());
    if a == 0 {
        return Complex::with_val(prec, 1);
    }
    if a == Rational::from((1, 2)) {
        return Complex::with_val(prec, -1);
    }
    if a == Rational::from((1, 4)) {
        return Complex::with_val(prec, (0, 1));
    }
    if a == Rational::from((3, 4)) {
        return Complex::with_val(prec, (0, -1));
    }
    let two_pi = Float::with_val(prec + 16, Constant::Pi) * 2u32;
    let theta = two_pi * Float::with_val(prec + 16, &a);
    let (s, c) = theta.sin_cos(Float::new(prec + 16));
    Complex::with_val(prec, (c, s))
}

/// Exact orthogonality check on angles: sum_s chi(s) conj(psi(s)) = |G| delta.
pub fn orthogonality_holds(g: &AbelianGroup, chars: &[Character]) -> bool {
    // chi * conj(psi) is a character; its sum vanishes iff it is nontrivial.
    for (i, a) in chars.iter().enumerate() {
        if !a.is_homomorphism(g) {
            return false;
        }
        for (j, b) in chars.iter().enumerate() {
            let p = a.mul(&b.conj());
            if p.is_trivial() != (i == j) {
                return false;
            }
        }
    }
    true
}

/// Ring of scalars used in group-ring arithmetic.
pub trait Scalar: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
}

impl Scalar for Integer {
    fn zero_like(&self) -> Self {
        Integer::new()
    }
    fn add(&self, o: &Self) -> Self {
        Integer::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Integer::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Integer::from(self * o)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
}

impl Scalar for Complex {
    fn zero_like(&self) -> Self {
        Complex::new(self.prec())
    }
    fn add(&self, o: &Self) -> Self {
        Complex::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Complex::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Complex::with_val(self.prec(), self * o)
    }
    fn is_zero(&self) -> bool {
        Complex::is_zero(self)
    }
}

/// Element of R[G] with coefficients listed in canonical element order.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRingElem<T: Scalar> {
    pub coeffs: Vec<T>,
}

pub type QElem = GroupRingElem<Rational>;
pub type ZElem = GroupRingElem<Integer>;
pub type CElem = GroupRingElem<Complex>;

impl<T: Scalar> GroupRingElem<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        GroupRingElem { coeffs }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// Convolution product.
    pub fn mul(&self, o: &Self, g: &AbelianGroup) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut out = vec![zero; g.order()];
        for (a, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in o.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let k = g.mul(a, b);
                out[k] = out[k].add(&x.mul(y));
            }
        }
        Self::new(out)
    }

    /// The involution s -> s^{-1}.
    pub fn involution(&self, g: &AbelianGroup) -> Self {
        let mut out = self.coeffs.clone();
        for (a, x) in self.coeffs.iter().enumerate() {
            out[g.inv(a)] = x.clone();
        }
        Self::new(out)
    }

    /// Multiplies by the group element s.
    pub fn shift(&self, s: usize, g: &AbelianGroup) -> Self {
        let mut out = self.coeffs.clone();
        for (a, x) in self.coeffs.iter().enumerate() {
            out[g.mul(s, a)] = x.clone();
        }
        Self::new(out)
    }
}

impl QElem {
    pub fn zero(n: usize) -> Self {
        Self::new(vec![Rational::new(); n])
    }

    pub fn one(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, s: usize) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[s] = Rational::from(1);
        z
    }

    pub fn norm_element(n: usize) -> Self {
        Self::new(vec![Rational::from(1); n])
    }

    pub fn to_complex(&self, prec: u32) -> CElem {
        CElem::new(self.coeffs.iter().map(|c| Complex::with_val(prec, c)).collect())
    }

    /// Least d >= 1 with d * self integral.
    pub fn denominator(&self) -> Integer {
        self.coeffs.iter().fold(Integer::from(1), |acc, c| acc.lcm(c.denom()))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| *c.denom() == 1)
    }

    pub fn to_integer(&self) -> Option<ZElem> {
        self.coeffs
            .iter()
            .map(|c| (*c.denom() == 1).then(|| c.numer().clone()))
            .collect::<Option<Vec<_>>>()
            .map(ZElem::new)
    }

    pub fn apply_char(&self, chi: &Character, prec: u32) -> Complex {
        apply_char(chi, &self.to_complex(prec))
    }
}

impl ZElem {
    pub fn zero(n: usize) -> Self {
        Self::new(vec![Integer::new(); n])
    }

    pub fn basis(n: usize, s: usize) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[s] = Integer::from(1);
        z
    }

    pub fn norm_of(g: &AbelianGroup, subgroup: &[usize]) -> Self {
        let mut z = Self::zero(g.order());
        for &s in subgroup {
            z.coeffs[s] = Integer::from(1);
        }
        z
    }

    pub fn to_rational(&self) -> QElem {
        QElem::new(self.coeffs.iter().map(Rational::from).collect())
    }
}

impl CElem {
    pub fn zero(n: usize, prec: u32) -> Self {
        Self::new(vec![Complex::new(prec); n])
    }
}

/// `chi(a) = sum_s a_s chi(s)`.
pub fn apply_char(chi: &Character, a: &CElem) -> Complex {
    let prec = a.coeffs.first().map_or(64, |c| c.prec().0);
    let mut acc = Complex::new(prec);
    for (s, x) in a.coeffs.iter().enumerate() {
        if Complex::is_zero(x) {
            continue;
        }
        acc += Complex::with_val(prec, x * chi.value(s, prec));
    }
    acc
}

/// `e_chi = (1/|G|) sum_s chi(s) s^{-1}`.
pub fn idempotent(chi: &Character, g: &AbelianGroup, prec: u32) -> CElem {
    let n = g.order();
    let mut out = CElem::zero(n, prec);
    for s in 0..n {
        out.coeffs[g.inv(s)] = chi.value(s, prec) / n as u32;
    }
    out
}

/// Exact rational idempotent `sum_{chi in chars} e_chi` for a Galois-stable set.
pub fn rational_idempotent_sum(chars: &[Character], g: &AbelianGroup) -> Result<QElem, GroupError> {
    let n = g.order();
    let exponent = g.exponent();
    for a in 1..=exponent {
        if gcd(a, exponent) != 1 {
            continue;
        }
        for chi in chars {
            if !chars.contains(&chi.pow(a as i64)) {
                return Err(GroupError::NotGaloisStable);
            }
        }
    }
    let prec = 128;
    let mut sum = CElem::zero(n, prec);
    for chi in chars {
        sum = sum.add(&idempotent(chi, g, prec));
    }
    let tol = Float::with_val(64, Float::i_exp(1, -((prec / 2) as i32)));
    let mut coeffs = Vec::with_capacity(n);
    for c in &sum.coeffs {
        if Float::with_val(prec, c.imag().abs_ref()) > tol {
            return Err(GroupError::RoundingExceededTolerance);
        }
        let scaled = Float::with_val(prec, c.real() * n as u32);
        let k = scaled.to_integer().ok_or(GroupError::RoundingExceededTolerance)?;
        if Float::with_val(prec, &scaled - &k).abs() > tol {
            return Err(GroupError::RoundingExceededTolerance);
        }
        coeffs.push(Rational::from((k, Integer::from(n))));
    }
    let e = QElem::new(coeffs);
    if e.mul(&e, g) != e {
        return Err(GroupError::NotIdempotent);
    }
    Ok(e)
}

impl AbelianGroup {
    /// Exponent of the group (largest invariant factor).
    pub fn exponent(&self) -> usize {
        self.invariants.last().map_or(1, |&d| d as usize)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2_sqrt10() -> (NumberField, AbelianGroup) {
        let k = NumberField::parse("x^2 - 10").unwrap();
        let autos = vec![
            ("sigma".to_string(), k.element("-x").unwrap()),
            ("id".to_string(), k.gen()),
        ];
        let g = AbelianGroup::build(&k, &autos).unwrap();
        (k, g)
    }

    #[test]
    fn c2_from_conjugation() {
        let (_, g) = c2_sqrt10();
        assert_eq!(g.order(), 2);
        assert_eq!(g.labels(), ["id", "sigma"]);
        assert_eq!(g.invariants(), [2]);
        assert_eq!(g.canonical_of_input(0), 1);
        let chars = g.characters();
        assert!(chars[0].is_trivial());
        assert_eq!(*chars[1].angle(1), Rational::from((1, 2)));
        assert!(orthogonality_holds(&g, &chars));
    }

    #[test]
    fn trivial_group() {
        let k = NumberField::parse("x^2 - 10").unwrap();
        let g = AbelianGroup::build(&k, &[("id".into(), k.gen())]).unwrap();
        assert_eq!(g.order(), 1);
        assert!(g.invariants().is_empty());
        assert_eq!(g.characters().len(), 1);
    }

    #[test]
    fn missing_identity_and_non_closed() {
        let k = NumberField::parse("x^2 - 10").unwrap();
        let only_sigma = vec![("s".to_string(), k.element("-x").unwrap())];
        assert_eq!(
            AbelianGroup::build(&k, &only_sigma).unwrap_err(),
            GroupError::NoIdentity
        );
        let k4 = NumberField::parse("x^4 - 10*x^2 + 1").unwrap();
        // x -> -x alone with identity is closed; x -> 1/x ... use -x only plus a non-closing pair
        let autos = vec![
            ("id".to_string(), k4.gen()),
            ("neg".to_string(), k4.element("-x").unwrap()),
        ];
        assert!(AbelianGroup::build(&k4, &autos).is_ok());
    }

    #[test]
    fn klein_four() {
        let g = AbelianGroup::from_table(
            vec!["e".into(), "a".into(), "b".into(), "c".into()],
            vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]],
        );
        assert_eq!(g.invariants(), [2, 2]);
        let chars = g.characters();
        assert_eq!(chars.len(), 4);
        assert!(chars.iter().all(Character::is_real));
        assert!(orthogonality_holds(&g, &chars));
    }

    #[test]
    fn norm_element_square() {
        let g = AbelianGroup::cyclic(3);
        let n = QElem::norm_element(3);
        assert_eq!(n.mul(&n, &g), n.scale(&Rational::from(3)));
    }

    #[test]
    fn sqrt10_beta_times_idempotent() {
        let (_, g) = c2_sqrt10();
        let beta = QElem::new(vec![Rational::from((-129, 512)), Rational::from((127, 512))]);
        let e = QElem::new(vec![Rational::from((1, 2)), Rational::from((-1, 2))]);
        let prod = beta.mul(&e, &g);
        assert_eq!(prod, QElem::new(vec![Rational::from((-1, 4)), Rational::from((1, 4))]));
    }

    #[test]
    fn idempotents_c3() {
        let g = AbelianGroup::cyclic(3);
        let chars = g.characters();
        let e1 = rational_idempotent_sum(&chars[..1], &g).unwrap();
        assert_eq!(e1, QElem::norm_element(3).scale(&Rational::from((1, 3))));
        let rest = rational_idempotent_sum(&chars[1..], &g).unwrap();
        assert_eq!(rest, QElem::one(3).sub(&e1));
        assert_eq!(
            rational_idempotent_sum(&chars[1..2], &g),
            Err(GroupError::NotGaloisStable)
        );
        let e = idempotent(&chars[1], &g, 128);
        let v = apply_char(&chars[1], &e) - Complex::with_val(128, 1);
        assert!(Float::with_val(128, v.abs_ref()) < 1e-30);
        let w = apply_char(&chars[2], &e);
        assert!(Float::with_val(128, w.abs_ref()) < 1e-30);
    }
}
