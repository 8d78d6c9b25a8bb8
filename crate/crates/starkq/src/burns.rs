//! Annihilation of class groups by integral group-ring elements and the
//! four-statement classification.
//!
//! A class group is given abstractly as `Cl = (+) Z/d_i` with one integer
//! matrix per group element acting on generator-exponent columns.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupalg::{AbelianGroup, QElem, ZElem};
use crate::linalg::{self, IMat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassGroupError {
    #[error("class group data has inconsistent dimensions: {0}")]
    Shape(String),
    #[error("divisors must be > 1 and each must divide the next")]
    BadDivisors,
    #[error("action is not well defined: {0}")]
    ActionNotWellDefined(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassGroupData {
    pub divisors: Vec<Integer>,
    /// Per canonical group element, a k x k matrix acting on columns.
    pub action: Vec<IMat>,
    /// Class of each finite place of S_K (label, exponent vector).
    pub s_place_classes: Vec<(String, Vec<Integer>)>,
}

impl ClassGroupData {
    pub fn trivial(n: usize) -> Self {
        ClassGroupData {
            divisors: Vec::new(),
            action: vec![Vec::new(); n],
            s_place_classes: Vec::new(),
        }
    }

    pub fn order(&self) -> Integer {
        self.divisors.iter().fold(Integer::from(1), |a, d| a * d)
    }

    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    fn reduce(&self, v: &[Integer]) -> Vec<Integer> {
        v.iter()
            .zip(&self.divisors)
            .map(|(x, d)| Integer::from(x.modulo_ref(d)))
            .collect()
    }

    fn is_zero(&self, v: &[Integer]) -> bool {
        self.reduce(v).iter().all(|x| *x == 0)
    }

    /// Checks shapes, divisor chain, well-definedness and the group law.
    pub fn validate(&self, g: &AbelianGroup) -> Result<(), ClassGroupError> {
        let k = self.rank();
        if self.action.len() != g.order() {
            return Err(ClassGroupError::Shape("one action matrix per group element".into()));
        }
        if self
            .action
            .iter()
            .any(|m| m.len() != k || m.iter().any(|r| r.len() != k))
        {
            return Err(ClassGroupError::Shape(format!("action matrices must be {k} x {k}")));
        }
        if self.s_place_classes.iter().any(|(_, c)| c.len() != k) {
            return Err(ClassGroupError::Shape(format!("S-place classes must have {k} entries")));
        }
        if self.divisors.iter().any(|d| *d < 2) || self.divisors.windows(2).any(|w| !w[1].is_divisible(&w[0])) {
            return Err(ClassGroupError::BadDivisors);
        }
        for (s, m) in self.action.iter().enumerate() {
            for j in 0..k {
                // image of d_j e_j must vanish
                let col: Vec<Integer> = (0..k).map(|i| Integer::from(&m[i][j] * &self.divisors[j])).collect();
                if !self.is_zero(&col) {
                    return Err(ClassGroupError::ActionNotWellDefined(format!(
                        "`{}` does not preserve the relations",
                        g.label(s)
                    )));
                }
            }
        }
        let id = linalg::identity(k);
        for j in 0..k {
            let diff: Vec<Integer> = (0..k)
                .map(|i| Integer::from(&self.action[0][i][j] - &id[i][j]))
                .collect();
            if !self.is_zero(&diff) {
                return Err(ClassGroupError::ActionNotWellDefined(
                    "identity acts nontrivially".into(),
                ));
            }
        }
        for a in 0..g.order() {
            for b in 0..g.order() {
                let prod = linalg::imat_mul(&self.action[a], &self.action[b]);
                let ab = &self.action[g.mul(a, b)];
                for j in 0..k {
                    let diff: Vec<Integer> = (0..k).map(|i| Integer::from(&prod[i][j] - &ab[i][j])).collect();
                    if !self.is_zero(&diff) {
                        return Err(ClassGroupError::ActionNotWellDefined(format!(
                            "action of `{}` and `{}` violates the group law",
                            g.label(a),
                            g.label(b)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Image of a class under an integral group-ring element.
    pub fn apply(&self, alpha: &ZElem, v: &[Integer]) -> Vec<Integer> {
        let k = self.rank();
        let mut out = vec![Integer::new(); k];
        for (s, c) in alpha.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let img = linalg::imat_vec(&self.action[s], v);
            for i in 0..k {
                out[i] += Integer::from(c * &img[i]);
            }
        }
        self.reduce(&out)
    }
}

/// True when `alpha` kills every generator.
pub fn annihilates(alpha: &ZElem, c: &ClassGroupData) -> bool {
    let k = c.rank();
    (0..k).all(|j| {
        let e: Vec<Integer> = (0..k).map(|i| Integer::from(u8::from(i == j))).collect();
        c.is_zero(&c.apply(alpha, &e))
    })
}

/// `Cl_S = Cl / <classes of the finite places of S_K>`, with the induced action.
pub fn s_quotient(c: &ClassGroupData, g: &AbelianGroup) -> Result<ClassGroupData, ClassGroupError> {
    let k = c.rank();
    if k == 0 {
        return Ok(ClassGroupData::trivial(g.order()));
    }
    let mut rel: IMat = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { c.divisors[i].clone() } else { Integer::new() })
                .collect()
        })
        .collect();
    for (_, cls) in &c.s_place_classes {
        rel.push(cls.clone());
    }
    let snf = linalg::smith(&rel);
    let vinv = linalg::unimodular_inverse(&snf.v).expect("V is unimodular");
    let keep: Vec<usize> = (0..snf.rank()).filter(|&i| snf.diag[i] != 1).collect();
    let divisors: Vec<Integer> = keep.iter().map(|&i| snf.diag[i].clone()).collect();
    // new coordinates of an old column vector x: y = V^T x; lift of new generator j: row j of V^{-1}
    let project = |x: &[Integer]| -> Vec<Integer> {
        keep.iter()
            .zip(&divisors)
            .map(|(&i, d)| {
                let y = (0..k).fold(Integer::new(), |acc, r| acc + Integer::from(&snf.v[r][i] * &x[r]));
                Integer::from(y.modulo_ref(d))
            })
            .collect()
    };
    let mut action = Vec::with_capacity(g.order());
    for m in &c.action {
        let cols: Vec<Vec<Integer>> = keep.iter().map(|&j| project(&linalg::imat_vec(m, &vinv[j]))).collect();
        let kk = keep.len();
        action.push((0..kk).map(|i| (0..kk).map(|j| cols[j][i].clone()).collect()).collect());
    }
    for (s, m) in c.action.iter().enumerate() {
        for (label, cls) in &c.s_place_classes {
            if project(&linalg::imat_vec(m, cls)).iter().any(|x| *x != 0) {
                return Err(ClassGroupError::ActionNotWellDefined(format!(
                    "`{}` moves the class of `{label}` outside the S-class subgroup",
                    g.label(s)
                )));
            }
        }
    }
    let q = ClassGroupData {
        divisors,
        action,
        s_place_classes: Vec::new(),
    };
    q.validate(g)?;
    Ok(q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurnsVerdict {
    /// `w_K m^r beta e'` has integral coefficients.
    pub integral: bool,
    /// Outcome of statements 1..4 in order.
    pub statements: [bool; 4],
    /// Lowest statement that holds (1..=4), or None.
    pub lowest: Option<u8>,
    /// Every statement after a passing one also passes.
    pub monotone: bool,
    pub d_divides_wm: bool,
    pub d_divides_wm_r: bool,
    /// `(s - 1) w_K m^r beta e'` annihilates Cl(K) for every nontrivial s.
    pub twisted_ok: bool,
    /// `w_K m beta e'` annihilates Cl_S(K) (reported, never asserted).
    pub extra_wm_cls: bool,
}

fn integral_multiple(beta_e: &QElem, k: &Integer) -> Option<ZElem> {
    beta_e.scale(&Rational::from(k.clone())).to_integer()
}

/// Evaluates statements 1-4 and the twisted check.
#[allow(clippy::too_many_arguments)]
pub fn classify_statements(
    beta_e: &QElem,
    d: &Integer,
    m: &Integer,
    r: u32,
    w_k: u32,
    cl: &ClassGroupData,
    cl_s: &ClassGroupData,
    g: &AbelianGroup,
) -> BurnsVerdict {
    let wm = Integer::from(m * w_k);
    let wmr = Integer::from(rug::ops::Pow::pow(m, r)) * w_k;
    let ann = |k: &Integer, c: &ClassGroupData| integral_multiple(beta_e, k).is_some_and(|z| annihilates(&z, c));
    let statements = [ann(d, cl), ann(&wm, cl), ann(&wmr, cl), ann(&wmr, cl_s)];
    let lowest = statements.iter().position(|&b| b).map(|p| p as u8 + 1);
    let monotone = match lowest {
        Some(p) => statements[p as usize - 1..].iter().all(|&b| b),
        None => true,
    };
    let twisted_ok = match integral_multiple(beta_e, &wmr) {
        Some(z) => (1..g.order()).all(|s| annihilates(&z.shift(s, g).sub(&z), cl)),
        None => false,
    };
    BurnsVerdict {
        integral: integral_multiple(beta_e, &wmr).is_some(),
        statements,
        lowest,
        monotone,
        d_divides_wm: wm.is_divisible(d),
        d_divides_wm_r: wmr.is_divisible(d),
        twisted_ok,
        extra_wm_cls: ann(&wm, cl_s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z14() -> (AbelianGroup, ClassGroupData) {
        let g = AbelianGroup::cyclic(3);
        let c = ClassGroupData {
            divisors: vec![Integer::from(14)],
            action: vec![
                linalg::imat_from_i64(&[vec![1]]),
                linalg::imat_from_i64(&[vec![11]]),
                linalg::imat_from_i64(&[vec![9]]),
            ],
            s_place_classes: vec![("P".into(), vec![Integer::from(7)])],
        };
        (g, c)
    }

    #[test]
    fn z14_action_valid_and_quotient() {
        let (g, c) = z14();
        c.validate(&g).unwrap();
        let q = s_quotient(&c, &g).unwrap();
        assert_eq!(q.divisors, vec![Integer::from(7)]);
        assert_eq!(q.order() * 2, c.order());
    }

    #[test]
    fn lagrange_and_trivial() {
        let (g, c) = z14();
        let mut z = ZElem::zero(3);
        z.coeffs[0] = Integer::from(14);
        assert!(annihilates(&z, &c));
        let t = ClassGroupData::trivial(3);
        assert!(annihilates(&ZElem::basis(3, 1), &t));
        let _ = g;
    }

    #[test]
    fn bad_action_rejected() {
        let (g, mut c) = z14();
        c.action[1] = linalg::imat_from_i64(&[vec![3]]);
        assert!(c.validate(&g).is_err());
    }
}
