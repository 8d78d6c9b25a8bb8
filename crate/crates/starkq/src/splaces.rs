//! The sets S and S_K, the Galois action on S_K, decomposition groups and
//! the rank bookkeeping of the minimal-order idempotents.
//!
//! Action convention: the real place `s(w)` is the embedding
//! `xi -> q_{s^{-1}}(xi)` where `xi` is the root attached to `w`, so that
//! `|u^s|_{s(w)} = |u|_w`.

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::groupalg::{self, AbelianGroup, Character, GroupError, QElem};
use crate::numfield::{FieldError, NumberField, RealRoot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaceError {
    #[error("valuation of a raw field element at finite place `{0}` is unavailable")]
    ValuationUnavailable(String),
    #[error("Galois action mismatch: {0}")]
    ActionMismatch(String),
    #[error("inconsistent place data: {0}")]
    Inconsistent(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Debug)]
pub enum PlaceKind {
    Real { root: RealRoot },
    Finite { norm: Integer },
}

#[derive(Clone, Debug)]
pub struct SKPlace {
    pub label: String,
    /// Index of the place of k below.
    pub over: usize,
    pub kind: PlaceKind,
}

impl SKPlace {
    pub fn is_real(&self) -> bool {
        matches!(self.kind, PlaceKind::Real { .. })
    }
}

#[derive(Clone, Debug)]
pub struct SPlace {
    pub label: String,
    pub archimedean: bool,
}

#[derive(Clone, Debug)]
pub struct PlaceSet {
    pub s: Vec<SPlace>,
    pub sk: Vec<SKPlace>,
    /// For each v_i the chosen w_i (index into `sk`).
    pub distinguished: Vec<usize>,
    /// For each v_i the stabilizer G_i of w_i (canonical element indices).
    pub decomposition: Vec<Vec<usize>>,
    /// `perm[s][w]` is the index of `s(w)`.
    pub perm: Vec<Vec<usize>>,
}

impl PlaceSet {
    /// Assembles and checks the orbit structure; `perm` is indexed by canonical group elements.
    pub fn new(
        s: Vec<SPlace>,
        sk: Vec<SKPlace>,
        distinguished: Vec<usize>,
        perm: Vec<Vec<usize>>,
        g: &AbelianGroup,
    ) -> Result<Self, PlaceError> {
        let n = g.order();
        let bad = |m: String| Err(PlaceError::Inconsistent(m));
        if distinguished.len() != s.len() {
            return bad("one distinguished place per place of S is required".into());
        }
        if perm.len() != n || perm.iter().any(|p| p.len() != sk.len()) {
            return bad("action table has the wrong shape".into());
        }
        for (a, p) in perm.iter().enumerate() {
            let mut seen = vec![false; sk.len()];
            for (w, &x) in p.iter().enumerate() {
                if x >= sk.len() || seen[x] {
                    return bad(format!("action of `{}` is not a permutation", g.label(a)));
                }
                seen[x] = true;
                if sk[x].over != sk[w].over {
                    return bad(format!(
                        "action of `{}` moves `{}` off its orbit",
                        g.label(a),
                        sk[w].label
                    ));
                }
            }
        }
        if perm[0].iter().enumerate().any(|(w, &x)| w != x) {
            return Err(PlaceError::ActionMismatch("identity does not fix every place".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for w in 0..sk.len() {
                    if perm[a][perm[b][w]] != perm[g.mul(a, b)][w] {
                        return Err(PlaceError::ActionMismatch(format!(
                            "action of `{}` composed with `{}` is not the action of their product",
                            g.label(a),
                            g.label(b)
                        )));
                    }
                }
            }
        }
        let mut decomposition = Vec::with_capacity(s.len());
        for (i, &wi) in distinguished.iter().enumerate() {
            if sk[wi].over != i {
                return bad(format!(
                    "distinguished place `{}` is not over `{}`",
                    sk[wi].label, s[i].label
                ));
            }
            let stab: Vec<usize> = (0..n).filter(|&a| perm[a][wi] == wi).collect();
            let orbit: std::collections::BTreeSet<usize> = (0..n).map(|a| perm[a][wi]).collect();
            let above: std::collections::BTreeSet<usize> = (0..sk.len()).filter(|&w| sk[w].over == i).collect();
            if orbit != above {
                return bad(format!("places over `{}` do not form one orbit", s[i].label));
            }
            if orbit.len() * stab.len() != n {
                return bad(format!("orbit-stabilizer count fails at `{}`", s[i].label));
            }
            let real_above = above.iter().all(|&w| sk[w].is_real());
            if s[i].archimedean != real_above {
                return bad(format!("kind of `{}` disagrees with the places above it", s[i].label));
            }
            decomposition.push(stab);
        }
        Ok(PlaceSet {
            s,
            sk,
            distinguished,
            decomposition,
            perm,
        })
    }

    pub fn n_s(&self) -> usize {
        self.s.len()
    }

    pub fn n_sk(&self) -> usize {
        self.sk.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.sk.iter().position(|w| w.label == label)
    }

    pub fn orbit(&self, i: usize) -> Vec<usize> {
        (0..self.sk.len()).filter(|&w| self.sk[w].over == i).collect()
    }

    pub fn finite_places(&self) -> Vec<usize> {
        (0..self.sk.len()).filter(|&w| !self.sk[w].is_real()).collect()
    }

    /// Some element s with s(w_i) = w.
    pub fn transporter(&self, w: usize) -> usize {
        let wi = self.distinguished[self.sk[w].over];
        (0..self.perm.len())
            .find(|&a| self.perm[a][wi] == w)
            .expect("orbits checked at construction")
    }

    /// Refines every real root to at least `bits`.
    pub fn refine_roots(&mut self, field: &NumberField, bits: u32) -> Result<(), PlaceError> {
        for w in self.sk.iter_mut() {
            if let PlaceKind::Real { root } = &mut w.kind {
                *root = root.refine(field, bits)?;
            }
        }
        Ok(())
    }

    /// Rank of vanishing at s = 0 of the S-truncated L-function of `chi`.
    pub fn order_of_vanishing(&self, chi: &Character) -> usize {
        if chi.is_trivial() {
            return self.n_s() - 1;
        }
        self.decomposition
            .iter()
            .filter(|gv| chi.contains_in_kernel(gv))
            .count()
    }

    /// Places of S whose decomposition group lies in the kernel of `chi`.
    pub fn kernel_places(&self, chi: &Character) -> Vec<usize> {
        (0..self.n_s())
            .filter(|&i| chi.contains_in_kernel(&self.decomposition[i]))
            .collect()
    }

    /// Recomputes the action on real places from the roots and checks it against `perm`.
    pub fn verify_real_action(&self, field: &NumberField, g: &AbelianGroup, bits: u32) -> Result<(), PlaceError> {
        let tol = Float::with_val(64, Float::i_exp(1, -((bits / 2) as i32)));
        for a in 0..g.order() {
            let q = g.map(g.inv(a));
            for (w, place) in self.sk.iter().enumerate() {
                let PlaceKind::Real { root } = &place.kind else {
                    continue;
                };
                let image = field.embed(q, root, bits)?;
                let matches: Vec<usize> = (0..self.sk.len())
                    .filter(|&x| match &self.sk[x].kind {
                        PlaceKind::Real { root: r2 } => {
                            let d = Float::with_val(bits + 32, &image - &r2.approx).abs();
                            d < Float::with_val(64, &tol * (Float::with_val(64, r2.approx.abs_ref()) + 1u32))
                        }
                        PlaceKind::Finite { .. } => false,
                    })
                    .collect();
                if matches != [self.perm[a][w]] {
                    return Err(PlaceError::ActionMismatch(format!(
                        "`{}` sends `{}` to {:?}, action table says `{}`",
                        g.label(a),
                        place.label,
                        matches.iter().map(|&m| self.sk[m].label.clone()).collect::<Vec<_>>(),
                        self.sk[self.perm[a][w]].label
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Characters of minimal order r and the primed idempotent.
#[derive(Clone, Debug)]
pub struct RankData {
    pub r: usize,
    /// Indices (into the character table) of the nontrivial characters of order r.
    pub chars_rs: Vec<usize>,
    /// `chars_rs` plus the trivial character when |S| = r + 1.
    pub chars_rs_prime: Vec<usize>,
    pub e_rs: QElem,
    pub e_rs_prime: QElem,
}

/// Checks the hypothesis for rank r and assembles the rank data.
pub fn rank_data(r: usize, places: &PlaceSet, g: &AbelianGroup, chars: &[Character]) -> Result<RankData, PlaceError> {
    let n_s = places.n_s();
    if r == 0 || r > n_s {
        return Err(PlaceError::HypothesisViolated(format!(
            "rank {r} outside 1..=|S| = {n_s}"
        )));
    }
    if n_s < r + 1 {
        return Err(PlaceError::HypothesisViolated(format!(
            "|S| = {n_s} < r + 1 = {}",
            r + 1
        )));
    }
    let not_split: Vec<&str> = (0..r)
        .filter(|&i| places.decomposition[i].len() != 1)
        .map(|i| places.s[i].label.as_str())
        .collect();
    if !not_split.is_empty() {
        return Err(PlaceError::HypothesisViolated(format!(
            "the first {r} places of S must split completely; {} do not",
            not_split.join(", ")
        )));
    }
    for chi in chars {
        let ord = places.order_of_vanishing(chi);
        if ord < r {
            return Err(PlaceError::HypothesisViolated(format!(
                "character {chi} has order of vanishing {ord} < {r}"
            )));
        }
    }
    let chars_rs: Vec<usize> = (0..chars.len())
        .filter(|&c| !chars[c].is_trivial() && places.order_of_vanishing(&chars[c]) == r)
        .collect();
    let mut chars_rs_prime = chars_rs.clone();
    let trivial = chars.iter().position(Character::is_trivial).expect("trivial character");
    if n_s == r + 1 {
        chars_rs_prime.insert(0, trivial);
    }
    let pick = |ix: &[usize]| ix.iter().map(|&c| chars[c].clone()).collect::<Vec<_>>();
    let n = g.order();
    let e_rs = if chars_rs.is_empty() {
        QElem::zero(n)
    } else {
        groupalg::rational_idempotent_sum(&pick(&chars_rs), g)?
    };
    let e_rs_prime = if chars_rs_prime.is_empty() {
        QElem::zero(n)
    } else {
        groupalg::rational_idempotent_sum(&pick(&chars_rs_prime), g)?
    };
    Ok(RankData {
        r,
        chars_rs,
        chars_rs_prime,
        e_rs,
        e_rs_prime,
    })
}

/// `log|a|_w` for a finite place with known order `ord`.
pub fn log_abs_finite(ord: i64, norm: &Integer, prec: u32) -> Float {
    let ln = Float::with_val(prec, norm).ln();
    ln * Rational::from(-ord)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt10_places() -> (NumberField, AbelianGroup, PlaceSet) {
        let k = NumberField::parse("x^2 - 10").unwrap();
        let g = AbelianGroup::build(
            &k,
            &[("id".into(), k.gen()), ("sigma".into(), k.element("-x").unwrap())],
        )
        .unwrap();
        let r1 = RealRoot::from_decimal(&k, "3.16227766").unwrap();
        let r2 = RealRoot::from_decimal(&k, "-3.16227766").unwrap();
        let sk = vec![
            SKPlace {
                label: "w1".into(),
                over: 0,
                kind: PlaceKind::Real { root: r1 },
            },
            SKPlace {
                label: "w1'".into(),
                over: 0,
                kind: PlaceKind::Real { root: r2 },
            },
            SKPlace {
                label: "P2".into(),
                over: 1,
                kind: PlaceKind::Finite { norm: Integer::from(2) },
            },
            SKPlace {
                label: "P5".into(),
                over: 2,
                kind: PlaceKind::Finite { norm: Integer::from(5) },
            },
        ];
        let s = vec![
            SPlace {
                label: "v1".into(),
                archimedean: true,
            },
            SPlace {
                label: "v2".into(),
                archimedean: false,
            },
            SPlace {
                label: "v3".into(),
                archimedean: false,
            },
        ];
        let perm = vec![vec![0, 1, 2, 3], vec![1, 0, 2, 3]];
        let mut p = PlaceSet::new(s, sk, vec![0, 2, 3], perm, &g).unwrap();
        p.refine_roots(&k, 128).unwrap();
        (k, g, p)
    }

    #[test]
    fn decomposition_and_orders() {
        let (_, g, p) = sqrt10_places();
        assert_eq!(p.decomposition, vec![vec![0], vec![0, 1], vec![0, 1]]);
        let chars = g.characters();
        assert_eq!(p.order_of_vanishing(&chars[0]), 2);
        assert_eq!(p.order_of_vanishing(&chars[1]), 1);
        let total: usize = chars.iter().map(|c| p.order_of_vanishing(c)).sum();
        assert_eq!(total, p.n_sk() - 1);
    }

    #[test]
    fn rank_one_idempotent() {
        let (_, g, p) = sqrt10_places();
        let chars = g.characters();
        let rd = rank_data(1, &p, &g, &chars).unwrap();
        assert_eq!(rd.chars_rs, vec![1]);
        assert_eq!(rd.chars_rs_prime, vec![1]);
        assert_eq!(
            rd.e_rs_prime,
            QElem::new(vec![Rational::from((1, 2)), Rational::from((-1, 2))])
        );
        assert!(matches!(
            rank_data(2, &p, &g, &chars),
            Err(PlaceError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn real_action_recomputed() {
        let (k, g, p) = sqrt10_places();
        p.verify_real_action(&k, &g, 128).unwrap();
        let mut bad = p.clone();
        bad.perm[1] = vec![0, 1, 2, 3];
        assert!(matches!(
            bad.verify_real_action(&k, &g, 128),
            Err(PlaceError::ActionMismatch(_))
        ));
    }

    #[test]
    fn finite_log() {
        let v = log_abs_finite(1, &Integer::from(2), 128);
        let expect = -Float::with_val(128, 2).ln();
        assert!(Float::with_val(128, v - expect).abs() < 1e-35);
        assert_eq!(log_abs_finite(0, &Integer::from(5), 128), 0);
    }
}
