mod common;

use std::sync::Arc;

use proptest::prelude::*;

use common::{corpus_algebras, groupoid, CORPUS};
use eqhp::forms::{build_forms, paramixed_report, FormModule, LoopForms};
use eqhp::galgebra::GAlgebra;
use eqhp::groupoid::FiniteGroupoid;
use eqhp::linalg::SparseVec;
use eqhp::{Error, Q};

/// `(lead', digits)` terms of a tensor `a0 ⊗ a1 ⊗ ... ⊗ an`, `lead' = 0` for the adjoined unit.
type Tensor = Vec<((usize, Vec<usize>), Q)>;

fn to_sparse(l: &LoopForms, t: Tensor) -> SparseVec {
    SparseVec::from_terms(t.into_iter().map(|((lead, digits), c)| (l.encode(lead, &digits), c)).collect())
}

/// `x · e_j` in `A⁺`, as `(lead', coefficient)` pairs.
fn lead_times(l: &LoopForms, lead: usize, j: usize) -> Vec<(usize, Q)> {
    if lead == 0 {
        vec![(j + 1, Q::int(1))]
    } else {
        l.mul_basis(lead - 1, j).iter().map(|(k, c)| (k + 1, c.clone())).collect()
    }
}

/// Twisted Hochschild boundary on `A⁺ ⊗ A^{⊗n}`:
/// `sum_i (-1)^i (.. ⊗ a_i a_{i+1} ⊗ ..) + (-1)^n g(a_n) a0 ⊗ a1 ⊗ .. ⊗ a_{n-1}`.
fn hochschild_oracle(l: &LoopForms, w: usize, n: usize) -> SparseVec {
    let (lead, digits) = l.decode(w, n);
    let sign = |i: usize| if i.is_multiple_of(2) { Q::int(1) } else { Q::int(-1) };
    let mut t: Tensor = Vec::new();
    for (p, c) in lead_times(l, lead, digits[0]) {
        t.push(((p, digits[1..].to_vec()), c));
    }
    for i in 1..n {
        for (k, c) in l.mul_basis(digits[i - 1], digits[i]).iter() {
            let mut d = digits.clone();
            d.splice(i - 1..=i, [*k]);
            t.push(((lead, d), &sign(i) * c));
        }
    }
    for (k, c) in l.twist_of(digits[n - 1]).iter() {
        let front: Vec<(usize, Q)> = if lead == 0 {
            vec![(k + 1, Q::int(1))]
        } else {
            l.mul_basis(*k, lead - 1).iter().map(|(m, e)| (m + 1, e.clone())).collect()
        };
        for (p, e) in front {
            t.push(((p, digits[..n - 1].to_vec()), &(&sign(n) * c) * &e));
        }
    }
    to_sparse(l, t)
}

/// `B(a0 da1 .. dan) = sum_i (-1)^(n i) d(g a_{n+1-i}) .. d(g a_n) da0 da1 .. da_{n-i}`.
fn connes_oracle(l: &LoopForms, w: usize, n: usize) -> SparseVec {
    let (lead, digits) = l.decode(w, n);
    if lead == 0 {
        return SparseVec::zero();
    }
    let word: Vec<usize> = std::iter::once(lead - 1).chain(digits.iter().copied()).collect();
    let mut t: Tensor = Vec::new();
    for i in 0..=n {
        let sign = if (n * i).is_multiple_of(2) { Q::int(1) } else { Q::int(-1) };
        let mut acc: Vec<(Vec<usize>, Q)> = vec![(Vec::new(), sign)];
        for &a in &word[n + 1 - i..] {
            acc = acc
                .into_iter()
                .flat_map(|(p, c)| {
                    l.twist_of(a).iter().map(move |(k, e)| ([p.clone(), vec![*k]].concat(), &c * e)).collect::<Vec<_>>()
                })
                .collect();
        }
        for (p, c) in acc {
            t.push(((0, [p, word[..=n - i].to_vec()].concat()), c));
        }
    }
    to_sparse(l, t)
}

fn test_algebras() -> Vec<(String, GAlgebra)> {
    let mut out = Vec::new();
    for name in CORPUS {
        for (an, a) in corpus_algebras(&groupoid(name)) {
            out.push((format!("{name}/{an}"), a));
        }
    }
    let z3 = Arc::new(FiniteGroupoid::cyclic(3));
    out.push(("z3/group algebra".into(), GAlgebra::group_algebra(z3.clone())));
    out.push(("z2/upper triangular".into(), GAlgebra::matrices(groupoid("z2"), 2, true)));
    out
}

fn basis(l: &LoopForms, n: usize) -> impl Iterator<Item = SparseVec> + '_ {
    (0..l.dim(n)).map(move |k| SparseVec::unit(l.basis_word(n, k)))
}

#[test]
fn form_dimensions() {
    let t = build_forms(&GAlgebra::trivial(groupoid("z2")), 4).unwrap();
    assert_eq!((t.dim(0), t.dim(1)), (2, 4));
    let z = build_forms(&GAlgebra::zero(groupoid("pair2")), 4).unwrap();
    assert!((0..=4).all(|n| z.dim(n) == 0));
    for (name, a) in test_algebras() {
        let fm = build_forms(&a, 4).unwrap();
        for n in 0..=4 {
            let expected: usize = fm.base.iter().map(|&x| if n == 0 { a.dim(x) } else { (a.dim(x) + 1) * a.dim(x).pow(n as u32) }).sum();
            assert_eq!(fm.dim(n), expected, "{name} degree {n}");
        }
    }
}

#[test]
fn small_caps_are_rejected() {
    assert!(build_forms(&GAlgebra::trivial(groupoid("z2")), 1).is_err());
}

#[test]
fn operators_respect_the_cap() {
    let fm = build_forms(&GAlgebra::k_g(groupoid("z2")), 3).unwrap();
    let l = &fm.loops[0];
    let v = SparseVec::unit(l.encode(1, &[0, 0, 0]));
    assert!(matches!(l.d(&v, 3), Err(Error::DegreeCap { degree: 4, cap: 3 })));
    assert!(l.kappa(&v, 3).is_err());
    assert!(l.d(&SparseVec::unit(l.encode(0, &[0, 0, 0])), 3).unwrap().is_zero());
}

#[test]
fn b_matches_the_twisted_hochschild_boundary() {
    for (name, a) in test_algebras() {
        let fm = build_forms(&a, 4).unwrap();
        for l in &fm.loops {
            for n in 1..=4 {
                for w in 0..l.words(n) {
                    assert_eq!(l.b_word(w, n), hochschild_oracle(l, w, n), "{name} degree {n} word {w}");
                }
            }
        }
    }
}

#[test]
fn connes_operator_matches_the_cyclic_sum() {
    for (name, a) in test_algebras() {
        let fm = build_forms(&a, 5).unwrap();
        for l in &fm.loops {
            for n in 0..=3 {
                for v in basis(l, n) {
                    let w = v.iter().next().unwrap().0;
                    assert_eq!(l.connes(&v, n).unwrap(), connes_oracle(l, w, n), "{name} degree {n} word {w}");
                }
            }
        }
    }
}

#[test]
fn b_vanishes_on_one_forms_of_a_commutative_algebra() {
    let a = GAlgebra::diagonal(Arc::new(FiniteGroupoid::cyclic(1)), 3);
    let fm = build_forms(&a, 3).unwrap();
    let l = &fm.loops[0];
    assert!(basis(l, 1).all(|v| l.b(&v, 1).is_zero()));
}

#[test]
fn degree_zero_operators() {
    for (name, a) in test_algebras() {
        let fm = build_forms(&a, 3).unwrap();
        for l in &fm.loops {
            for v in basis(l, 0) {
                assert_eq!(l.connes(&v, 0).unwrap(), l.d(&v, 0).unwrap(), "{name}");
                assert_eq!(l.kappa(&v, 0).unwrap(), l.t(&v, 0), "{name}");
                assert_eq!(l.b(&l.d(&v, 0).unwrap(), 1), v.sub(&l.t(&v, 0)), "{name}");
            }
        }
    }
}

#[test]
fn d_squares_to_zero_and_commutes_with_kappa() {
    for (name, a) in test_algebras() {
        let fm = build_forms(&a, 5).unwrap();
        for l in &fm.loops {
            for n in 0..=3 {
                for v in basis(l, n) {
                    let dv = l.d(&v, n).unwrap();
                    assert!(l.d(&dv, n + 1).unwrap().is_zero(), "{name}");
                    assert_eq!(l.kappa(&dv, n + 1).unwrap(), l.d(&l.kappa(&v, n).unwrap(), n).unwrap(), "{name}");
                }
            }
        }
    }
}

#[test]
fn trivial_group_commutative_algebra_is_a_mixed_complex() {
    let a = GAlgebra::diagonal(Arc::new(FiniteGroupoid::cyclic(1)), 2);
    let fm = build_forms(&a, 5).unwrap();
    let l = &fm.loops[0];
    for n in 0..=3 {
        for v in basis(l, n) {
            assert_eq!(l.t(&v, n), v);
        }
    }
    assert!(paramixed_report(&fm).all_pass());
}

#[test]
fn k_g_on_z2_passes_every_relation_to_degree_four() {
    let fm = build_forms(&GAlgebra::k_g(groupoid("z2")), 6).unwrap();
    let r = paramixed_report(&fm);
    assert_eq!(r.max_degree, 4);
    assert_eq!(r.relations.len(), 10);
    assert!(r.all_pass(), "{r:?}");
}

#[test]
fn twist_is_nontrivial_where_isotropy_acts() {
    let fm = build_forms(&GAlgebra::k_g(groupoid("z2")), 3).unwrap();
    let g = fm.algebra.groupoid();
    let at_g = fm.ad.unit_of_loop(g.arrow_index("g").unwrap());
    let l = &fm.loops[at_g];
    assert!(basis(l, 0).any(|v| l.t(&v, 0) != v));
}

#[test]
fn untwisted_calculus_matches_the_trivial_loop() {
    let a = GAlgebra::matrices(Arc::new(FiniteGroupoid::cyclic(1)), 2, true);
    let fm = build_forms(&a, 4).unwrap();
    let u = LoopForms::untwisted(a.dim(0), 4, Arc::new(a.mul[0].clone()));
    for n in 1..=3 {
        for w in 0..u.words(n) {
            assert_eq!(u.b_word(w, n), fm.loops[0].b_word(w, n));
        }
    }
}

fn small_forms() -> Vec<FormModule> {
    ["z2", "z2z3", "flip"]
        .iter()
        .flat_map(|n| [GAlgebra::k_g(groupoid(n)), GAlgebra::o_g(groupoid(n))])
        .map(|a| build_forms(&a, 5).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn paramixed_identities_on_random_forms(
        pick in 0usize..6,
        li in 0usize..16,
        n in 0usize..=3,
        coeffs in prop::collection::vec((0usize..10_000, -4i64..=4), 1..6),
    ) {
        let fms = small_forms();
        let fm = &fms[pick];
        let l = &fm.loops[li % fm.n_loops()];
        prop_assume!(l.dim(n) > 0);
        let v = SparseVec::from_terms(coeffs.iter().map(|&(k, c)| (l.basis_word(n, k % l.dim(n)), Q::int(c))).collect());
        let bv = l.b(&v, n);
        let big_b = l.connes(&v, n).unwrap();
        prop_assert!(n < 2 || l.b(&bv, n - 1).is_zero());
        prop_assert!(l.connes(&big_b, n + 1).unwrap().is_zero());
        let bb = if n == 0 { SparseVec::zero() } else { l.connes(&bv, n - 1).unwrap() };
        prop_assert_eq!(bb.add(&l.b(&big_b, n + 1)), v.sub(&l.t(&v, n)));
        prop_assert_eq!(l.t(&bv, n.saturating_sub(1)), l.b(&l.t(&v, n), n));
    }
}
