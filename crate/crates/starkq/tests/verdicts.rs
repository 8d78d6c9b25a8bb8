//! Popescu and Burns checks on the fixtures and on small hand-made inputs.

mod common;

use rug::Integer;
use starkq::burns::{self, ClassGroupData};
use starkq::groupalg::ZElem;
use starkq::popescu;
use starkq::sunits::SUnit;

use common::*;

const PREC: u32 = 128;

fn zelem(v: &[i64]) -> ZElem {
    ZElem::new(ints(v))
}

#[test]
fn functional_one_on_eta_one() {
    let s = setup("sqrt3", PREC);
    let phis = popescu::dual_functionals(&s.ctx.lattice, &s.ctx.group);
    let v = phis[0].apply(&SUnit::basis(s.ctx.lattice.rank(), 0));
    assert_eq!(v.coeffs[0], 1);
    for phi in &phis {
        assert!(popescu::functional_is_equivariant(phi, &s.ctx.lattice, &s.ctx.group));
    }
}

#[test]
fn reference_functionals() {
    let s = setup("sqrt3", PREC);
    let phis = popescu::dual_functionals(&s.ctx.lattice, &s.ctx.group);
    let e = |j: usize| {
        let mut v = vec![0i64; 7];
        v[j] = 1;
        v
    };
    let reference: Vec<Vec<Vec<i64>>> = vec![
        vec![e(0), e(0), e(0)],
        vec![
            vec![0, 1, 0, 0, 0, 0, 0],
            vec![0, -1, -1, 0, 0, -1, 0],
            vec![0, 0, 1, 0, 0, -1, 1],
        ],
        vec![
            vec![0, 0, 1, 0, 0, 0, 0],
            vec![0, 1, 0, 0, 0, 1, -1],
            vec![0, -1, -1, 0, 0, 0, -1],
        ],
        vec![
            vec![0, 0, 0, 1, 0, 0, 0],
            vec![0, 0, 0, -1, 1, 1, -1],
            vec![0, 0, 0, 0, -1, 1, -1],
        ],
        vec![
            vec![0, 0, 0, 0, 1, 0, 0],
            vec![0, 0, 0, -1, 0, 1, -1],
            vec![0, 0, 0, 1, -1, 0, 0],
        ],
        vec![e(5), e(5), e(5)],
        vec![e(6), e(6), e(6)],
    ];
    let got: Vec<Vec<Vec<i64>>> = phis.iter().map(|p| p.rows_i64()).collect();
    assert_eq!(got, reference);
}

#[test]
fn contraction_of_trivial_units() {
    let s = setup("sqrt3", PREC);
    let t = s.ctx.lattice.rank();
    let phi = &popescu::dual_functionals(&s.ctx.lattice, &s.ctx.group)[3];
    let one = SUnit::one(t);
    assert!(popescu::contract(phi, &one, &one, &s.ctx.lattice).is_one());
    // eta_1 is fixed by G and invisible to the fourth functional
    let eta1 = SUnit::basis(t, 0);
    assert!(phi.apply(&eta1).coeffs.iter().all(|c| *c == 0));
    assert!(popescu::contract(phi, &eta1, &eta1, &s.ctx.lattice).is_one());
}

#[test]
fn gamma_delta_of_one() {
    let s = setup("sqrt3", PREC);
    let one = SUnit::one(s.ctx.lattice.rank());
    let beta = qelem(&[43, -19, -24], 1393);
    let (g, d) = popescu::gamma_delta(&one, &beta, &Integer::from(1393), 2, &s.ctx.lattice).unwrap();
    assert!(g.is_one());
    assert!(d.unwrap().is_one());
}

#[test]
fn abelian_test_examples() {
    let s = setup("sqrt3", PREC);
    let t = s.ctx.lattice.rank();
    let (g, lat) = (&s.ctx.group, &s.ctx.lattice);
    let eta1 = SUnit::basis(t, 0);
    assert!(popescu::abelian_test(&eta1.pow(&Integer::from(2)), g, lat).unwrap());
    let minus_eta1 = SUnit { sign: -1, ..eta1 };
    assert!(popescu::twist(&minus_eta1, 1, lat).is_one());
    assert!(popescu::abelian_test(&minus_eta1, g, lat).unwrap());
}

#[test]
fn fixture_deltas_pass() {
    let s = setup("sqrt3", PREC);
    let beta = qelem(&[43, -19, -24], 1393);
    let v = popescu::popescu_verdict(
        &s.sys,
        &beta,
        &Integer::from(1393),
        2,
        2,
        &s.ctx.lattice,
        &s.ctx.places,
        &s.ctx.group,
    )
    .unwrap();
    assert!(v.overall);
    assert!(v
        .entries
        .iter()
        .all(|e| e.abelian_test && e.square_test && e.divisible_by_d));
}

#[test]
fn injected_odd_delta_fails() {
    // beta e' = 1 with d = w_K = 1 makes delta the contracted unit itself
    let s = setup("sqrt3", PREC);
    let beta = qelem(&[1, 0, 0], 1);
    let v = popescu::popescu_verdict(
        &s.sys,
        &beta,
        &Integer::from(1),
        1,
        2,
        &s.ctx.lattice,
        &s.ctx.places,
        &s.ctx.group,
    )
    .unwrap();
    assert!(!v.overall);
    assert!(!v.failing.is_empty());
    for &i in &v.failing {
        assert!(!v.entries[i].abelian_test);
    }
}

#[test]
fn annihilator_examples() {
    let s = setup("sqrt42", PREC);
    let cl = &s.ctx.class_group;
    assert_eq!(cl.order(), 14);
    let alpha = zelem(&[-1088490949, 2645395389, -1960894299]);
    let order: Vec<usize> = ["id", "sigma1", "sigma2"]
        .iter()
        .map(|l| s.ctx.group.index_of(l).unwrap())
        .collect();
    let mut a = ZElem::zero(3);
    for (k, &i) in order.iter().enumerate() {
        a.coeffs[i] = alpha.coeffs[k].clone();
    }
    assert!(!burns::annihilates(&a, cl));
    assert!(burns::annihilates(&a, &s.ctx.class_group_s));
    let mut lagrange = ZElem::zero(3);
    lagrange.coeffs[0] = cl.order();
    assert!(burns::annihilates(&lagrange, cl));
    assert!(burns::annihilates(&a, &ClassGroupData::trivial(3)));
}

#[test]
fn s_quotient_examples() {
    let s = setup("sqrt42", PREC);
    assert_eq!(s.ctx.class_group_s.divisors, ints(&[7]));
    let mut no_places = s.ctx.class_group.clone();
    no_places.s_place_classes.clear();
    assert_eq!(burns::s_quotient(&no_places, &s.ctx.group).unwrap(), no_places);
}

#[test]
fn statements_by_fixture() {
    let s = setup("sqrt3", PREC);
    let m = s.sys.index_m.clone();
    let v = burns::classify_statements(
        &qelem(&[43, -19, -24], 1393),
        &Integer::from(1393),
        &m,
        2,
        2,
        &s.ctx.class_group,
        &s.ctx.class_group_s,
        &s.ctx.group,
    );
    assert_eq!(v.lowest, Some(1));
    assert!(v.twisted_ok && v.monotone);

    let s = setup("sqrt10", PREC);
    let sigma = s.ctx.group.index_of("sigma").unwrap();
    let mut beta = qelem(&[0, 0], 1);
    beta.coeffs[0] = q(-1, 4);
    beta.coeffs[sigma] = q(1, 4);
    let v = burns::classify_statements(
        &beta,
        &Integer::from(4),
        &s.sys.index_m,
        1,
        2,
        &s.ctx.class_group,
        &s.ctx.class_group_s,
        &s.ctx.group,
    );
    assert!(v.statements[0]);
    assert!(v.twisted_ok);
}

#[test]
fn trivial_class_group_twisted_ok() {
    let g = starkq::groupalg::AbelianGroup::cyclic(4);
    let t = ClassGroupData::trivial(4);
    let v = burns::classify_statements(
        &qelem(&[1, 2, 3, 4], 5),
        &Integer::from(5),
        &Integer::from(5),
        1,
        2,
        &t,
        &t,
        &g,
    );
    assert!(v.twisted_ok);
    assert_eq!(v.statements, [true; 4]);
}
