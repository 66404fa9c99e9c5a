mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{groupoid, CORPUS};
use eqhp::galgebra::{GAlgebra, Pairing};
use eqhp::gmodule::{equivariant_homs, random_matrix, GModule, UnitMap};
use eqhp::groupoid::FiniteGroupoid;
use eqhp::homalg::{induced_map, x_complex};
use eqhp::linalg::{Matrix, SparseVec};
use eqhp::stability::{
    chain_map_report, cutoff_sums, equivariant_average, iota, stability_check, trace_map, twisted_trace, Admissible,
};
use eqhp::Q;

/// The operator `x -> sum L_pq e_p h(e_q, x)` of a kernel element, as a matrix `sum L_pq e_p e_q^T G`.
fn operator(h: &Pairing, x: usize, l: &SparseVec) -> Matrix {
    let k = h.module.dims[x];
    let mut m = Matrix::zeros(k, k);
    for (pq, c) in l.iter() {
        let (p, q) = (pq / k, pq % k);
        for r in 0..k {
            m[(p, r)] += &(c * &h.gram[x][(q, r)]);
        }
    }
    m
}

/// `ttr_beta(L) = Tr(M_L rho(beta))`.
fn ttr_oracle(h: &Pairing, b: usize, l: &SparseVec) -> Q {
    let x = h.module.groupoid.src(b);
    operator(h, x, l).mul(&h.module.rho[b]).trace()
}

fn pairings() -> Vec<(String, Pairing)> {
    let mut out: Vec<(String, Pairing)> = CORPUS.iter().map(|n| (n.to_string(), Pairing::regular(groupoid(n)))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let plane = GModule { groupoid: Arc::new(FiniteGroupoid::cyclic(1)), dims: vec![2], rho: vec![Matrix::identity(2)] };
    let g = random_matrix(2, 2, &mut rng);
    out.push(("point plane".into(), Pairing { module: plane, gram: vec![g.add(&g.transpose())] }));
    out
}

#[test]
fn kernel_product_is_operator_composition() {
    for (name, h) in pairings() {
        let tt = twisted_trace(&h);
        for x in 0..tt.kernel.groupoid().n_units() {
            let d = tt.kernel.dim(x);
            for i in 0..d {
                for j in 0..d {
                    let (a, b) = (SparseVec::unit(i), SparseVec::unit(j));
                    let prod = operator(&h, x, &tt.kernel.mul_vec(x, &a, &b));
                    assert_eq!(prod, operator(&h, x, &a).mul(&operator(&h, x, &b)), "{name}");
                }
            }
        }
    }
}

#[test]
fn twisted_trace_matches_the_operator_trace() {
    for (name, h) in pairings() {
        let tt = twisted_trace(&h);
        for (&b, vals) in &tt.values {
            for (j, v) in vals.iter().enumerate() {
                assert_eq!(*v, ttr_oracle(&h, b, &SparseVec::unit(j)), "{name} loop {b} entry {j}");
            }
        }
    }
}

#[test]
fn trivial_group_trace_is_the_pairing() {
    let plane = GModule { groupoid: Arc::new(FiniteGroupoid::cyclic(1)), dims: vec![3], rho: vec![Matrix::identity(3)] };
    let tt = twisted_trace(&Pairing::standard(plane));
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(tt.eval(0, &SparseVec::unit(i * 3 + j)), Q::int((i == j) as i64));
        }
    }
}

#[test]
fn regular_trace_on_z2_is_twisted_at_g() {
    let g = groupoid("z2");
    let tt = twisted_trace(&Pairing::regular(g.clone()));
    let (e, gg) = (g.arrow_index("e").unwrap(), g.arrow_index("g").unwrap());
    // e: the plain trace; g: the trace against the swap
    assert_eq!(tt.values[&e], [1, 0, 0, 1].map(Q::int));
    assert_eq!(tt.values[&gg], [0, 1, 1, 0].map(Q::int));
    assert!(tt.identity_holds());
}

#[test]
fn trace_identity_on_corpus_generators() {
    for (name, h) in pairings() {
        assert!(twisted_trace(&h).identity_holds(), "{name}");
    }
}

#[test]
fn trace_map_is_a_chain_map() {
    for name in ["z2", "pair2", "flip"] {
        let g = groupoid(name);
        let h = Pairing::regular(g.clone());
        let tt = twisted_trace(&h);
        for a in [GAlgebra::trivial(g.clone()), GAlgebra::k_g(g.clone())] {
            let ak = a.tensor(&tt.kernel);
            let (xa, xak) = (x_complex(&a).unwrap(), x_complex(&ak).unwrap());
            let tr = trace_map(&tt, &a, &xak, &xa);
            assert!(chain_map_report(&xak, &xa, &tr).holds(), "{name}");
            let adm = Admissible::cutoff(&h).unwrap();
            let i = induced_map(&xa, &xak, &iota(&a, &tt.kernel, &adm));
            assert!((0..tr.len()).all(|l| tr[l].mul(&i[l]).is_identity()), "{name}");
        }
    }
}

#[test]
fn stability_ranks() {
    for (name, expected) in [("z2", (2, 0)), ("pair2", (1, 0)), ("flip", (1, 0)), ("z2z3", (5, 0))] {
        let g = groupoid(name);
        let h = Pairing::regular(g.clone());
        let r = stability_check(&GAlgebra::trivial(g), &h, &Admissible::cutoff(&h).unwrap()).unwrap();
        assert!(r.all_pass(), "{name}: {r:?}");
        assert_eq!((r.hp_a, r.hp_stabilized), (expected, expected), "{name}");
        assert_eq!(r.chain_homotopy_witness, None);
    }
}

#[test]
fn trivial_module_is_the_identity_case() {
    for name in CORPUS {
        let g = groupoid(name);
        let h = Pairing::standard(GModule::trivial(g.clone()));
        let tt = twisted_trace(&h);
        assert_eq!(tt.kernel, GAlgebra::trivial(g.clone()));
        let r = stability_check(&GAlgebra::trivial(g), &h, &Admissible::generic(&h).unwrap()).unwrap();
        assert!(r.all_pass(), "{name}");
    }
}

#[test]
fn generic_and_cutoff_sections_are_admissible() {
    for name in CORPUS {
        let h = Pairing::regular(groupoid(name));
        for adm in [Admissible::cutoff(&h).unwrap(), Admissible::generic(&h).unwrap()] {
            for x in 0..h.module.dims.len() {
                assert_eq!(h.h(x, &adm.w[x], &adm.v[x]), Q::int(1), "{name}");
                let p = operator(&h, x, &adm.projection(x));
                assert_eq!(p.mul(&p), p, "{name}: projection is idempotent");
            }
        }
    }
}

#[test]
fn inadmissible_pairings_are_reported() {
    let g = groupoid("z2");
    let plain = Pairing::standard(GModule::trivial(g.clone()));
    assert!(Admissible::cutoff(&plain).is_err());
    let degenerate = Pairing { module: GModule::trivial(g.clone()), gram: vec![Matrix::zeros(1, 1)] };
    assert!(Admissible::generic(&degenerate).unwrap_err().to_string().contains("degenerate"));
    let mut skew = Pairing::regular(g.clone());
    skew.gram[0] = Matrix::from_ints(&[&[1, 0], &[0, 2]]);
    assert!(stability_check(&GAlgebra::trivial(g), &skew, &Admissible { v: vec![], w: vec![] }).is_err());
}

#[test]
fn cutoff_sums_are_one() {
    for name in CORPUS {
        assert!(cutoff_sums(&groupoid(name)).iter().all(|s| *s == Q::int(1)), "{name}");
    }
}

#[test]
fn averaging_a_projection_on_z2() {
    let g = groupoid("z2");
    let e = GModule::regular(g);
    let avg = equivariant_average(&e, &e, &vec![Matrix::from_ints(&[&[1, 0], &[0, 0]])]);
    assert_eq!(avg, [Matrix::identity(2).scale(&Q::new(1, 2))]);
    assert!(e.is_equivariant(&e, &avg));
}

#[test]
fn averaging_fixes_equivariant_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in CORPUS {
        let g = groupoid(name);
        let (e, f) = (GModule::regular(g.clone()), GModule::random(g, &mut rng));
        for phi in equivariant_homs(&e, &f) {
            assert_eq!(equivariant_average(&e, &f, &phi), phi, "{name}");
        }
    }
}

fn compose(f: &UnitMap, g: &UnitMap) -> UnitMap {
    f.iter().zip(g).map(|(a, b)| a.mul(b)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn twisted_trace_identity_on_random_operators(pick in 0usize..5, v in prop::collection::vec(-3i64..=3, 32)) {
        let (_, h) = &pairings()[pick];
        let tt = twisted_trace(h);
        for &b in tt.values.keys() {
            let d = tt.kernel.dim(h.module.groupoid.src(b));
            let l0 = SparseVec::from_dense(&v[..d].iter().map(|&x| Q::int(x)).collect::<Vec<_>>());
            let l1 = SparseVec::from_dense(&v[16..16 + d].iter().map(|&x| Q::int(x)).collect::<Vec<_>>());
            prop_assert_eq!(tt.identity_defect(b, &l0, &l1), Q::int(0));
            prop_assert_eq!(tt.eval(b, &l0), ttr_oracle(h, b, &l0));
        }
    }

    #[test]
    fn averages_are_equivariant_and_right_linear(name in prop::sample::select(CORPUS.to_vec()), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = groupoid(name);
        let (e, f) = (GModule::regular(g.clone()), GModule::random(g.clone(), &mut rng));
        let phi: UnitMap = (0..g.n_units()).map(|x| random_matrix(f.dims[x], e.dims[x], &mut rng)).collect();
        let avg = equivariant_average(&e, &f, &phi);
        prop_assert!(e.is_equivariant(&f, &avg));
        for psi in equivariant_homs(&e, &e) {
            prop_assert_eq!(equivariant_average(&e, &f, &compose(&phi, &psi)), compose(&avg, &psi));
        }
    }
}
