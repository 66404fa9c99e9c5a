mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{groupoid, CORPUS};
use eqhp::galgebra::{a_g, GAlgebra};
use eqhp::gmodule::{equivariant_homs, random_invertible, GModule, UnitMap};
use eqhp::greenjulg::{
    discrete_decomposition, green_julg_verify, kappa_average, local_to_global, localise, localise_map,
    localised_exact, right_mul, right_mul_map, AgElement, GammaMap,
};
use eqhp::groupoid::{AdjointGroupoid, FiniteGroupoid};
use eqhp::linalg::{Matrix, SparseVec};
use eqhp::Q;

fn random_element<R: Rng>(ad: &AdjointGroupoid, g: &FiniteGroupoid, rng: &mut R) -> AgElement {
    ad.loops.iter().map(|&a| (0..g.range_fiber(g.src(a)).len()).map(|_| Q::int(rng.gen_range(-3..=3))).collect()).collect()
}

fn flatten(m: &UnitMap) -> Vec<Q> {
    m.iter().flat_map(|b| b.col(0)).collect()
}

fn modules(g: &Arc<FiniteGroupoid>, ad: &AdjointGroupoid) -> (GModule, GModule) {
    let a = a_g(ad, g.clone());
    (GModule::trivial(a.groupoid.clone()), a)
}

#[test]
fn localisation_dimensions() {
    let g = groupoid("z2z3");
    assert_eq!(localise(&GModule::trivial(g.clone()), "u").unwrap().dim, 1);
    assert_eq!(localise(&GModule::regular(g.clone()), "u").unwrap().dim, 2);
    assert_eq!(localise(&GModule::regular(g.clone()), "v").unwrap().dim, 3);
    assert!(localise(&GModule::trivial(g), "w").is_err());
    let p = groupoid("pair2");
    let l = localise(&GModule::regular(p), "2").unwrap();
    assert_eq!((l.units.len(), l.dim), (2, 4));
}

#[test]
fn localisation_of_a_short_exact_sequence() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for name in CORPUS {
        let g = groupoid(name);
        let units = g.n_units();
        let (m, p): (Vec<usize>, Vec<usize>) = (0..units).map(|_| (rng.gen_range(0..3), rng.gen_range(0..3))).unzip();
        let mut f = UnitMap::new();
        let mut h = UnitMap::new();
        for x in 0..units {
            let n = m[x] + p[x];
            let u = random_invertible(n, &mut rng);
            let inc = Matrix::identity(n).block(0, 0, n, m[x]);
            let proj = Matrix::identity(n).block(m[x], 0, p[x], n);
            f.push(u.mul(&inc));
            h.push(proj.mul(&u.inverse().unwrap()));
        }
        assert!(localised_exact(&g, &f, &h).into_iter().all(|ok| ok), "{name}");
        for (o, orbit) in g.orbits().iter().enumerate() {
            let lm: usize = orbit.units.iter().map(|&x| m[x]).sum();
            let lp: usize = orbit.units.iter().map(|&x| p[x]).sum();
            assert_eq!(localise_map(&g, &f, o).rows(), lm + lp);
        }
        let broken: UnitMap = h.iter().map(|b| Matrix::zeros(b.rows(), b.cols())).collect();
        let verdicts = localised_exact(&g, &f, &broken);
        for (o, orbit) in g.orbits().iter().enumerate() {
            let lp: usize = orbit.units.iter().map(|&x| p[x]).sum();
            assert_eq!(verdicts[o], lp == 0, "{name}");
        }
    }
}

#[test]
fn local_to_global_identity_and_failure() {
    let g = groupoid("z2z3");
    let m = GModule::regular(g.clone());
    let id: UnitMap = m.dims.iter().map(|&d| Matrix::identity(d)).collect();
    let v = local_to_global(&g, &id);
    assert!(v.global && v.consistent());
    assert!(v.orbits.iter().all(|(_, ok)| *ok));
    let x = g.unit_index("v").unwrap();
    let mut killed = id.clone();
    killed[x] = Matrix::zeros(m.dims[x], m.dims[x]);
    let v = local_to_global(&g, &killed);
    assert!(!v.global && v.consistent());
    assert_eq!(v.orbits, [("u".to_string(), true), ("v".to_string(), false)]);
}

#[test]
fn random_isomorphisms_are_local_isomorphisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for name in CORPUS {
        let g = groupoid(name);
        let f: UnitMap = (0..g.n_units()).map(|_| random_invertible(rng.gen_range(1..4), &mut rng)).collect();
        let v = local_to_global(&g, &f);
        assert!(v.global && v.consistent(), "{name}");
    }
}

#[test]
fn kappa_on_the_trivial_group_is_multiplication() {
    let g = Arc::new(FiniteGroupoid::cyclic(1));
    let ad = g.adjoint_groupoid();
    let f: AgElement = vec![vec![Q::int(5)]];
    assert_eq!(kappa_average(&ad, &g, &f), [Matrix::from_ints(&[&[5]])]);
}

#[test]
fn kappa_on_z2_sums_over_translates() {
    let g = groupoid("z2");
    let ad = g.adjoint_groupoid();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_element(&ad, &g, &mut rng);
    let k = kappa_average(&ad, &g, &f);
    for (l, &a) in ad.loops.iter().enumerate() {
        let fib = g.range_fiber(g.src(a));
        for (j, &b) in fib.iter().enumerate() {
            let gb = g.compose(g.arrow_index("g").unwrap(), b);
            let j2 = fib.iter().position(|&c| c == gb).unwrap();
            assert_eq!(k[l][(j, 0)], &f[l][j] + &f[l][j2]);
        }
    }
}

#[test]
fn kappa_is_equivariant_and_onto_the_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for name in CORPUS {
        let g = groupoid(name);
        let ad = g.adjoint_groupoid();
        let (o, a) = modules(&g, &ad);
        let homs = equivariant_homs(&o, &a);
        for _ in 0..5 {
            let k = kappa_average(&ad, &g, &random_element(&ad, &g, &mut rng));
            assert!(o.is_equivariant(&a, &k), "{name}");
        }
        // images of the standard basis of A(G) span the equivariant maps
        let mut images = Vec::new();
        for (l, &b) in ad.loops.iter().enumerate() {
            for j in 0..g.range_fiber(g.src(b)).len() {
                let mut f: AgElement = ad.loops.iter().map(|&c| vec![Q::int(0); g.range_fiber(g.src(c)).len()]).collect();
                f[l][j] = Q::int(1);
                images.push(flatten(&kappa_average(&ad, &g, &f)));
            }
        }
        let span = Matrix::from_rows(images).rank();
        assert_eq!(span, homs.len(), "{name}");
        let both = Matrix::from_rows(homs.iter().map(flatten).collect()).rank();
        assert_eq!(both, homs.len());
    }
}

#[test]
fn kappa_is_right_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for name in CORPUS {
        let g = groupoid(name);
        let ad = g.adjoint_groupoid();
        let f = random_element(&ad, &g, &mut rng);
        for u in 0..g.n_arrows() {
            let lhs = kappa_average(&ad, &g, &right_mul(&ad, &g, &f, u));
            let rhs = right_mul_map(&ad, &g, &kappa_average(&ad, &g, &f), u);
            assert_eq!(lhs, rhs, "{name} arrow {u}");
        }
    }
}

#[test]
fn gamma_in_degree_zero() {
    let gm = GammaMap::new(&GAlgebra::trivial(groupoid("pair2")), 3).unwrap();
    let g = groupoid("pair2");
    let labels = &gm.crossed.basis[0];
    for (k, &(c, i)) in labels.iter().enumerate() {
        let image = gm.raw_word(0, k + 1, 0);
        if g.is_loop(c) {
            let (l, form) = image.unwrap();
            assert_eq!(gm.forms.ad.loops[l], c);
            assert_eq!(form, SparseVec::unit(gm.forms.loops[l].encode(i + 1, &[])));
        } else {
            assert!(image.is_none());
        }
    }
}

#[test]
fn gamma_for_the_trivial_group_is_a_reindexing() {
    let a = GAlgebra::matrices(Arc::new(FiniteGroupoid::cyclic(1)), 2, true);
    let gm = GammaMap::new(&a, 3).unwrap();
    let lf = gm.crossed_loop(0);
    for n in 0..=2 {
        for k in 0..lf.dim(n) {
            let w = lf.basis_word(n, k);
            assert_eq!(gm.raw(0, &SparseVec::unit(w), n), [SparseVec::unit(w)]);
            assert_eq!(gm.averaged(0, &SparseVec::unit(w), n), [SparseVec::unit(w)]);
        }
    }
}

#[test]
fn averaged_gamma_is_a_chain_map() {
    for name in CORPUS {
        let g = groupoid(name);
        for a in [GAlgebra::trivial(g.clone()), GAlgebra::k_g(g.clone())] {
            let gm = GammaMap::new(&a, 3).unwrap();
            for n in 1..=2 {
                assert_eq!(gm.compatibility_failure(n, false, true).unwrap(), None, "{name} b degree {n}");
            }
            for n in 0..=1 {
                assert_eq!(gm.compatibility_failure(n, true, true).unwrap(), None, "{name} B degree {n}");
            }
        }
    }
}

#[test]
fn raw_gamma_fails_where_averaging_is_needed() {
    let gm = GammaMap::new(&GAlgebra::k_g(groupoid("z2")), 3).unwrap();
    assert!(gm.compatibility_failure(1, false, false).unwrap().is_some());
    assert_eq!(gm.compatibility_failure(1, false, true).unwrap(), None);
}

#[test]
fn orbitwise_decomposition() {
    let t = GAlgebra::trivial(groupoid("z2z3"));
    let r = discrete_decomposition(&t, &t).unwrap();
    assert_eq!(r.global, (5, 0));
    assert_eq!(r.orbits, [("u".to_string(), (2, 0)), ("v".to_string(), (3, 0))]);
    for name in ["pair2", "flip"] {
        let t = GAlgebra::trivial(groupoid(name));
        let r = discrete_decomposition(&t, &t).unwrap();
        assert_eq!((r.global, r.sums()), ((1, 0), (1, 0)), "{name}");
    }
    let g = groupoid("z2");
    let r = discrete_decomposition(&GAlgebra::trivial(g.clone()), &GAlgebra::k_g(g)).unwrap();
    assert!(r.holds());
}

#[test]
fn green_julg_ranks() {
    for (name, expected) in [("pair2", (1, 0)), ("z2", (2, 0)), ("z2z3", (5, 0)), ("flip", (1, 0))] {
        let r = green_julg_verify(&GAlgebra::trivial(groupoid(name))).unwrap();
        assert!(r.holds(), "{name}: {r:?}");
        assert_eq!((r.lhs, r.rhs), (expected, expected), "{name}");
        assert_eq!(r.orbits.len(), groupoid(name).orbits().len());
    }
}

#[test]
fn green_julg_right_side_is_matrices_for_pair2() {
    let cp = eqhp::galgebra::crossed_product(&GAlgebra::trivial(groupoid("pair2")));
    let q = cp.algebra.groupoid().clone();
    let t = GAlgebra::trivial(q.clone());
    let m = GAlgebra::matrices(q, 2, false);
    let direct = eqhp::homalg::hp_quasifree(&t, &m).unwrap();
    let via = eqhp::homalg::hp_quasifree(&t, &cp.algebra).unwrap();
    assert_eq!((direct.even, direct.odd), (via.even, via.odd));
    assert_eq!((via.even, via.odd), (1, 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kappa_is_linear(name in prop::sample::select(CORPUS.to_vec()), s1 in any::<u64>(), s2 in any::<u64>(), c in -3i64..=3) {
        let g = groupoid(name);
        let ad = g.adjoint_groupoid();
        let f1 = random_element(&ad, &g, &mut ChaCha8Rng::seed_from_u64(s1));
        let f2 = random_element(&ad, &g, &mut ChaCha8Rng::seed_from_u64(s2));
        let sum: AgElement = f1.iter().zip(&f2).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + &(y * &Q::int(c))).collect()).collect();
        let (k1, k2) = (kappa_average(&ad, &g, &f1), kappa_average(&ad, &g, &f2));
        let expected: UnitMap = k1.iter().zip(&k2).map(|(a, b)| a.add(&b.scale(&Q::int(c)))).collect();
        prop_assert_eq!(kappa_average(&ad, &g, &sum), expected);
    }
}
