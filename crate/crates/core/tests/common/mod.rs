#![allow(dead_code)]

use std::sync::Arc;

use eqhp::galgebra::GAlgebra;
use eqhp::groupoid::FiniteGroupoid;
use eqhp::homalg::{hom_differential, Paracomplex};
use eqhp::linalg::Matrix;
use eqhp::Q;

pub const CORPUS: [&str; 4] = ["z2", "pair2", "z2z3", "flip"];

pub fn groupoid(name: &str) -> Arc<FiniteGroupoid> {
    Arc::new(FiniteGroupoid::builtin(name).expect("builtin groupoid"))
}

/// `(name, algebra)` for the trivial algebra, `K_G` and `O_G`.
pub fn corpus_algebras(g: &Arc<FiniteGroupoid>) -> Vec<(&'static str, GAlgebra)> {
    vec![("trivial", GAlgebra::trivial(g.clone())), ("K_G", GAlgebra::k_g(g.clone())), ("O_G", GAlgebra::o_g(g.clone()))]
}

/// An even loopwise map `P -> Q` that fails to commute with the twists: a single matrix unit at one loop.
pub fn non_equivariant_map(p: &Paracomplex, q: &Paracomplex) -> Option<Vec<Matrix>> {
    for l in 0..p.n_loops() {
        let (pe, qe) = (p.even.dims[l], q.even.dims[l]);
        for i in 0..qe {
            for j in 0..pe {
                let mut phi: Vec<Matrix> = (0..p.n_loops())
                    .map(|k| Matrix::zeros(q.even.dims[k] + q.odd.dims[k], p.even.dims[k] + p.odd.dims[k]))
                    .collect();
                phi[l][(i, j)] = Q::int(1);
                if !twist_commutator(p, q, &phi).iter().all(Matrix::is_zero) {
                    return Some(phi);
                }
            }
        }
    }
    None
}

/// `T phi - phi T`, loop by loop.
pub fn twist_commutator(p: &Paracomplex, q: &Paracomplex, phi: &[Matrix]) -> Vec<Matrix> {
    (0..p.n_loops()).map(|l| q.twist(l).mul(&phi[l]).sub(&phi[l].mul(&p.twist(l)))).collect()
}

/// `∂^2 phi` for an even loopwise map.
pub fn hom_square(p: &Paracomplex, q: &Paracomplex, phi: &[Matrix]) -> Vec<Matrix> {
    let once = hom_differential(p, q, phi, 0);
    hom_differential(p, q, &once, 1)
}
