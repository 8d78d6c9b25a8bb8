//! Algebraic invariants checked on random inputs.

mod common;

use proptest::prelude::*;
use rug::{Complex, Float, Integer};
use starkq::artin;
use starkq::burns::{self, ClassGroupData};
use starkq::groupalg::{self, AbelianGroup, CElem, ZElem};
use starkq::linalg;
use starkq::sunits::SUnit;

use common::*;

fn zelem(v: &[i64]) -> ZElem {
    ZElem::new(ints(v))
}

fn small(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, n)
}

/// Z/14 with a generator of order 3 acting as multiplication by 11.
fn z14() -> (AbelianGroup, ClassGroupData) {
    let g = AbelianGroup::cyclic(3);
    let c = ClassGroupData {
        divisors: ints(&[14]),
        action: vec![
            linalg::imat_from_i64(&[vec![1]]),
            linalg::imat_from_i64(&[vec![11]]),
            linalg::imat_from_i64(&[vec![9]]),
        ],
        s_place_classes: Vec::new(),
    };
    (g, c)
}

/// The scalar by which `a` acts on Z/14.
fn z14_value(a: &[i64]) -> i64 {
    (a[0] + 11 * a[1] + 9 * a[2]).rem_euclid(14)
}

fn small_complex(prec: u32) -> impl Strategy<Value = Complex> {
    (-100i32..100, -100i32..100).prop_map(move |(a, b)| Complex::with_val(prec, (a, b)))
}

fn close(a: &CElem, b: &CElem) -> bool {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .all(|(x, y)| Float::with_val(64, Complex::with_val(128, x - y).abs_ref()) < 1e-25)
}

proptest! {
    #[test]
    fn z14_annihilation_matches_scalar(a in small(3)) {
        let (g, c) = z14();
        c.validate(&g).unwrap();
        prop_assert_eq!(burns::annihilates(&zelem(&a), &c), z14_value(&a) == 0);
    }

    #[test]
    fn annihilators_form_an_ideal(a in small(3), b in small(3), x in small(3)) {
        let (g, c) = z14();
        let kill = |v: &[i64]| {
            let mut w = v.to_vec();
            w[0] -= z14_value(v);
            zelem(&w)
        };
        let (ka, kb) = (kill(&a), kill(&b));
        prop_assert!(burns::annihilates(&ka, &c));
        prop_assert!(burns::annihilates(&ka.add(&kb), &c));
        prop_assert!(burns::annihilates(&ka.mul(&zelem(&x), &g), &c));
    }

    #[test]
    fn s_quotient_orders_multiply(cls in prop::collection::vec(0i64..14, 0..3)) {
        let (g, mut c) = z14();
        c.s_place_classes = cls.iter().enumerate().map(|(i, &x)| (format!("P{i}"), ints(&[x]))).collect();
        // classes stable under the action generate their own subgroup
        let h = cls.iter().fold(14i64, |acc, &x| Integer::from(acc).gcd(&Integer::from(x)).to_i64().unwrap());
        let q = burns::s_quotient(&c, &g).unwrap();
        prop_assert_eq!(q.order() * Integer::from(14 / h), Integer::from(14));
        q.validate(&g).unwrap();
    }

    #[test]
    fn group_ring_is_a_commutative_ring(n in 1usize..7, seed in prop::collection::vec(-5i64..=5, 21)) {
        let g = AbelianGroup::cyclic(n);
        let (a, b, c) = (zelem(&seed[..n]), zelem(&seed[7..7 + n]), zelem(&seed[14..14 + n]));
        prop_assert_eq!(a.mul(&b, &g), b.mul(&a, &g));
        prop_assert_eq!(a.mul(&b, &g).mul(&c, &g), a.mul(&b.mul(&c, &g), &g));
        prop_assert_eq!(a.mul(&b.add(&c), &g), a.mul(&b, &g).add(&a.mul(&c, &g)));
        prop_assert_eq!(a.mul(&ZElem::basis(n, 0), &g), a.clone());
        prop_assert_eq!(a.involution(&g).involution(&g), a.clone());
        prop_assert_eq!(a.mul(&b, &g).involution(&g), a.involution(&g).mul(&b.involution(&g), &g));
    }

    #[test]
    fn characters_are_ring_homomorphisms(n in 1usize..7, seed in prop::collection::vec(-5i64..=5, 14)) {
        let g = AbelianGroup::cyclic(n);
        let (a, b) = (zelem(&seed[..n]).to_rational(), zelem(&seed[7..7 + n]).to_rational());
        for chi in g.characters() {
            let ab = Complex::with_val(128, a.apply_char(&chi, 128) * b.apply_char(&chi, 128));
            let prod = a.mul(&b, &g).apply_char(&chi, 128);
            prop_assert!(Float::with_val(64, Complex::with_val(128, ab - prod).abs_ref()) < 1e-25);
        }
    }

    #[test]
    fn idempotents_are_orthogonal(n in 1usize..9, x in small_complex(128)) {
        let g = AbelianGroup::cyclic(n);
        let chars = g.characters();
        prop_assert!(groupalg::orthogonality_holds(&g, &chars));
        let e: Vec<CElem> = chars.iter().map(|c| groupalg::idempotent(c, &g, 128)).collect();
        let mut sum = CElem::zero(n, 128);
        for (i, ei) in e.iter().enumerate() {
            prop_assert!(close(&ei.mul(ei, &g), ei));
            for ej in &e[i + 1..] {
                prop_assert!(close(&ei.mul(ej, &g), &CElem::zero(n, 128)));
            }
            sum = sum.add(ei);
            // chi(e_psi) = [chi = psi]
            for (j, chi) in chars.iter().enumerate() {
                let v = groupalg::apply_char(chi, &ei.scale(&x));
                let want = if i == j { x.clone() } else { Complex::new(128) };
                prop_assert!(Float::with_val(64, Complex::with_val(128, v - want).abs_ref()) < 1e-25);
            }
        }
        let mut one = CElem::zero(n, 128);
        one.coeffs[0] = Complex::with_val(128, 1);
        prop_assert!(close(&sum, &one));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn galois_action_is_a_module_action(e in small(7), a in small(3), b in small(3)) {
        let s = setup("sqrt3", 128);
        let (lat, g) = (&s.ctx.lattice, &s.ctx.group);
        let u = SUnit::from_i64(1, &e);
        let (za, zb) = (zelem(&a), zelem(&b));
        prop_assert_eq!(lat.act(&za.mul(&zb, g), &u), lat.act(&za, &lat.act(&zb, &u)));
        prop_assert_eq!(lat.act(&za.add(&zb), &u), lat.act(&za, &u).mul(&lat.act(&zb, &u)));
        for x in 0..g.order() {
            for y in 0..g.order() {
                prop_assert_eq!(
                    lat.apply_element(g.mul(x, y), &u),
                    lat.apply_element(x, &lat.apply_element(y, &u))
                );
            }
        }
    }

    #[test]
    fn logs_are_additive_and_equivariant(e in small(7), f in small(7)) {
        let s = setup("sqrt3", 128);
        let (lat, g, places) = (&s.ctx.lattice, &s.ctx.group, &s.ctx.places);
        let (u, v) = (SUnit::from_i64(1, &e), SUnit::from_i64(-1, &f));
        let tol = lat.tol() * Float::with_val(64, 1 << 10);
        let (lu, lv, luv) = (lat.log_vector(&u), lat.log_vector(&v), lat.log_vector(&u.mul(&v)));
        for w in 0..lu.len() {
            let d = Float::with_val(lat.prec, &lu[w] + &lv[w]) - &luv[w];
            prop_assert!(d.abs() < tol);
        }
        // |u^s|_{s w} = |u|_w
        for x in 0..g.order() {
            let ux = lat.log_vector(&lat.apply_element(x, &u));
            for w in 0..lu.len() {
                let d = Float::with_val(lat.prec, &ux[places.perm[x][w]] - &lu[w]);
                prop_assert!(d.abs() < tol);
            }
        }
    }

    #[test]
    fn field_images_multiply(e in prop::collection::vec(-2i64..=2, 3), f in prop::collection::vec(-2i64..=2, 3)) {
        let s = setup("sqrt10", 128);
        let (lat, field) = (&s.ctx.lattice, &s.ctx.field);
        let (u, v) = (SUnit::from_i64(1, &e), SUnit::from_i64(-1, &f));
        let prod = field.mul(&lat.to_field(&u).unwrap(), &lat.to_field(&v).unwrap());
        prop_assert_eq!(lat.to_field(&u.mul(&v)).unwrap(), prod);
    }

    #[test]
    fn one_dimensional_dominance(l in 0.05f64..20.0, n0 in 1u64..200) {
        let mut lat = setup("sqrt10", 128).ctx.lattice;
        let ell = Float::with_val(lat.prec, l);
        lat.log_matrix = vec![vec![ell.clone()], vec![Float::with_val(lat.prec, -&ell)]];
        let y = artin::find_beta_once(&lat, 0, n0).unwrap();
        let want = Float::with_val(lat.prec, n0) / &ell;
        prop_assert_eq!(&y.exps[0], &want.to_integer().unwrap());
        if n0 as f64 >= l {
            prop_assert!(artin::is_dominant(&lat, &y, 0));
        }
    }
}
