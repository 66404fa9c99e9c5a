mod common;

use proptest::prelude::*;

use common::groupoid;
use eqhp::funcspace::{balanced_tensor, fibre_product, integrate, pullback, FinFn};
use eqhp::gmodule::{arrow_indicator, convolve};
use eqhp::groupoid::{Bisection, FiniteGroupoid};
use eqhp::Q;

fn base(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn ints(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| Q::int(x)).collect()
}

#[test]
fn identity_pullback() {
    let f = FinFn::new(base(&["1", "2"]), ints(&[3, -1]));
    assert_eq!(pullback(base(&["1", "2"]), &[0, 1], &f), f);
}

#[test]
fn constant_pullback() {
    let f = FinFn::new(base(&["a", "b"]), ints(&[3, 7]));
    assert_eq!(pullback(base(&["1", "2", "3"]), &[1, 1, 1], &f).values, ints(&[7, 7, 7]));
}

#[test]
fn pullback_of_indicator_onto_a_point() {
    let f = FinFn::indicator(base(&["a"]), &[0]);
    assert_eq!(pullback(base(&["1", "2"]), &[0, 0], &f), FinFn::indicator(base(&["1", "2"]), &[0, 1]));
}

#[test]
fn integrate_all_arrows_of_z2() {
    let g = FiniteGroupoid::z2();
    let f = FinFn::indicator(base(&["e", "g"]), &[0, 1]);
    assert_eq!(integrate(&g, &f).values, ints(&[2]));
    assert!(integrate(&g, &FinFn::zero(base(&["e", "g"]))).is_zero());
}

#[test]
fn integrate_bisection_indicator_is_range_indicator() {
    let g = FiniteGroupoid::pair2();
    let u = g.bisection(&["(2,1)"]).unwrap();
    assert_eq!(integrate(&g, &arrow_indicator(&g, &u)).values, ints(&[0, 1]));
}

#[test]
fn point_tensor_is_scalar_product() {
    let f = FinFn::new(base(&["p"]), ints(&[3]));
    let g = FinFn::new(base(&["p"]), ints(&[-4]));
    assert_eq!(balanced_tensor(&f, &g, &[0], &[0]).values, ints(&[-12]));
}

#[test]
fn diagonal_fibre_product() {
    assert_eq!(fibre_product(&[0, 1], &[0, 1]), [(0, 0), (1, 1)]);
}

#[test]
fn disjoint_images_tensor_to_zero() {
    let f = FinFn::indicator(base(&["1", "2"]), &[0]);
    let g = FinFn::indicator(base(&["1", "2"]), &[1]);
    assert!(balanced_tensor(&f, &g, &[0, 1], &[0, 1]).is_zero());
}

fn values(n: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((-5i64..=5, 1i64..=3), n).prop_map(|v| v.into_iter().map(|(a, b)| Q::new(a, b)).collect())
}

proptest! {
    #[test]
    fn pointwise_product_is_commutative_and_associative(a in values(4), b in values(4), c in values(4)) {
        let bs = base(&["1", "2", "3", "4"]);
        let (f, g, h) = (FinFn::new(bs.clone(), a), FinFn::new(bs.clone(), b), FinFn::new(bs, c));
        prop_assert_eq!(f.mul(&g), g.mul(&f));
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
        let unit = FinFn::indicator(f.base.clone(), &f.support());
        prop_assert_eq!(unit.mul(&f), f);
    }

    #[test]
    fn pullback_is_multiplicative(a in values(3), b in values(3), phi in prop::collection::vec(0usize..3, 4)) {
        let (f, g) = (FinFn::new(base(&["a", "b", "c"]), a), FinFn::new(base(&["a", "b", "c"]), b));
        let x = base(&["1", "2", "3", "4"]);
        prop_assert_eq!(pullback(x.clone(), &phi, &f.mul(&g)), pullback(x.clone(), &phi, &f).mul(&pullback(x, &phi, &g)));
    }

    #[test]
    fn fibre_product_dimension(p in prop::collection::vec(0usize..3, 0..5), q in prop::collection::vec(0usize..3, 0..5)) {
        let expected: usize = (0..3).map(|z| p.iter().filter(|&&x| x == z).count() * q.iter().filter(|&&y| y == z).count()).sum();
        prop_assert_eq!(fibre_product(&p, &q).len(), expected);
    }

    #[test]
    fn integration_is_equivariant(name in prop::sample::select(vec!["z2", "pair2", "z2z3", "flip"]), v in values(13), pick in 0usize..13) {
        let g = groupoid(name);
        let n = g.n_arrows();
        let f = FinFn::new(g.arrows().iter().map(|a| a.id.clone()).collect(), v[..n].to_vec());
        let u = Bisection([pick % n].into_iter().collect());
        let chi = arrow_indicator(&g, &u);
        let lhs = integrate(&g, &convolve(&g, &chi, &f));
        let lam = integrate(&g, &f);
        let mut rhs = vec![Q::int(0); g.n_units()];
        for &a in &u.0 {
            rhs[g.tgt(a)] += &lam.values[g.src(a)];
        }
        prop_assert_eq!(lhs.values, rhs);
    }
}
