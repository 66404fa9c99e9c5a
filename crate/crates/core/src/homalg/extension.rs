//! Invariant subcomplexes `Hom(O_G[0], C)`, induced maps on their homology, and split-extension sequences.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::build_forms;
use crate::galgebra::GAlgebra;
use crate::gmodule::UnitMap;
use crate::homalg::{hodge_level, induced_map, FormParacomplex, Paracomplex};
use crate::linalg::Matrix;
use crate::tensoralg::{homomorphism_failure, truncated_map, truncated_tensor_algebra};

/// `Hom(O_G[0], C)`: centralizer invariants at one loop per adjoint class, in both parities.
#[derive(Clone, Debug)]
pub struct InvariantComplex {
    /// Per class: the representative loop and invariant bases (columns in parity-block coordinates).
    pub classes: Vec<(usize, [Matrix; 2])>,
    /// `d[p]` maps parity `p` to parity `1 - p`, block diagonal over classes.
    pub d: [Matrix; 2],
}

fn common_fixed(actions: &[Matrix], n: usize) -> Matrix {
    if actions.is_empty() || n == 0 {
        return Matrix::identity(n);
    }
    let stacked = actions.iter().map(|m| m.sub(&Matrix::identity(n))).reduce(|a, b| a.vstack(&b)).unwrap();
    Matrix::from_cols(n, &stacked.kernel())
}

/// Coordinates of the columns of `m` in the column basis `basis`.
fn coords_in(basis: &Matrix, m: &Matrix) -> Matrix {
    if basis.cols() == 0 {
        assert!(m.is_zero(), "vectors outside the subspace");
        return Matrix::zeros(0, m.cols());
    }
    basis.solve_matrix(m).expect("vectors lie in the subspace")
}

fn block_diag(blocks: &[Matrix]) -> Matrix {
    Matrix::direct_sum(blocks)
}

impl InvariantComplex {
    pub fn new(c: &Paracomplex) -> InvariantComplex {
        let h = &c.ad.groupoid;
        let classes: Vec<(usize, [Matrix; 2])> = c
            .base
            .adjoint_classes()
            .into_iter()
            .map(|class| {
                let l = c.ad.unit_of_loop(class[0]);
                let z: Vec<usize> = (0..h.n_arrows()).filter(|&j| h.src(j) == l && h.tgt(j) == l).collect();
                let even = common_fixed(&z.iter().map(|&j| c.even.rho[j].clone()).collect::<Vec<_>>(), c.even.dims[l]);
                let odd = common_fixed(&z.iter().map(|&j| c.odd.rho[j].clone()).collect::<Vec<_>>(), c.odd.dims[l]);
                (l, [even, odd])
            })
            .collect();
        let d = [0usize, 1].map(|p| {
            let blocks: Vec<Matrix> = classes
                .iter()
                .map(|(l, w)| {
                    let dl = if p == 0 { &c.d_even[*l] } else { &c.d_odd[*l] };
                    coords_in(&w[1 - p], &dl.mul(&w[p]))
                })
                .collect();
            block_diag(&blocks)
        });
        InvariantComplex { classes, d }
    }

    pub fn dim(&self, p: usize) -> usize {
        self.classes.iter().map(|(_, w)| w[p].cols()).sum()
    }

    /// Restriction of a loopwise map `f: C -> D` (on `C0 ⊕ C1`) that shifts parity by `shift`.
    pub fn restrict_map(&self, src: &Paracomplex, tgt: &InvariantComplex, tgt_c: &Paracomplex, f: &[Matrix], shift: usize) -> [Matrix; 2] {
        [0usize, 1].map(|p| {
            let q = (p + shift) % 2;
            let blocks: Vec<Matrix> = self
                .classes
                .iter()
                .zip(&tgt.classes)
                .map(|((l, w), (_, v))| {
                    let (se, te) = (src.even.dims[*l], tgt_c.even.dims[*l]);
                    let (rows, r0) = if q == 0 { (te, 0) } else { (tgt_c.odd.dims[*l], te) };
                    let (cols, c0) = if p == 0 { (se, 0) } else { (src.odd.dims[*l], se) };
                    let block = f[*l].block(r0, c0, rows, cols);
                    coords_in(&v[q], &block.mul(&w[p]))
                })
                .collect();
            block_diag(&blocks)
        })
    }

    fn cycles(&self, p: usize) -> Matrix {
        let n = self.dim(p);
        if self.d[p].rows() == 0 {
            return Matrix::identity(n);
        }
        Matrix::from_cols(n, &self.d[p].kernel())
    }

    fn boundaries(&self, p: usize) -> Matrix {
        let d = &self.d[1 - p];
        if d.cols() == 0 {
            return Matrix::zeros(self.dim(p), 0);
        }
        d.column_basis()
    }

    /// `(even, odd)` homology ranks.
    pub fn homology(&self) -> (usize, usize) {
        let h = |p: usize| self.cycles(p).cols() - self.boundaries(p).cols();
        (h(0), h(1))
    }

    /// Whether a parity-preserving self-map induces the identity on homology.
    pub fn induces_identity(&self, f: &[Matrix; 2]) -> bool {
        (0..2).all(|p| {
            let z = self.cycles(p);
            let diff = f[p].mul(&z).sub(&z);
            span_contains(&self.boundaries(p), &diff)
        })
    }
}

fn rank(m: &Matrix) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        0
    } else {
        m.rank()
    }
}

fn hstack(a: &Matrix, b: &Matrix) -> Matrix {
    if a.cols() == 0 {
        return b.clone();
    }
    if b.cols() == 0 {
        return a.clone();
    }
    a.hstack(b)
}

fn span_contains(span: &Matrix, v: &Matrix) -> bool {
    v.is_zero() || rank(&hstack(span, v)) == rank(span)
}

/// One node of a long sequence of homology groups.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct NodeReport {
    pub node: String,
    pub dim: usize,
    pub exact: bool,
}

/// Exactness at `H(D)` for `H(C) -f-> H(D) -g-> H(E)`, with maps given on chains of the right parities.
fn exact_at(c: (&InvariantComplex, usize), d: (&InvariantComplex, usize), e: (&InvariantComplex, usize), f: &Matrix, g: &Matrix) -> (usize, bool) {
    let (zc, zd) = (c.0.cycles(c.1), d.0.cycles(d.1));
    let (bd, be) = (d.0.boundaries(d.1), e.0.boundaries(e.1));
    let h_dim = zd.cols() - bd.cols();
    let im_f = rank(&hstack(&f.mul(&zc), &bd)) - rank(&bd);
    let rank_g = rank(&hstack(&g.mul(&zd), &be)) - rank(&be);
    let composite_zero = span_contains(&be, &g.mul(&f.mul(&zc)));
    (h_dim, composite_zero && im_f == h_dim - rank_g)
}

/// Report of a split extension at a truncation level.
#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub level: usize,
    /// `X(T pi)` is onto at every loop.
    pub surjective: bool,
    /// The kernel is a sub-paracomplex.
    pub kernel_closed: bool,
    /// `dim X(T E) = dim ker + dim X(T Q)` at every loop.
    pub decomposition: bool,
    pub sequence: Vec<NodeReport>,
}

impl SplitReport {
    pub fn all_exact(&self) -> bool {
        self.sequence.iter().all(|n| n.exact)
    }
}

fn left_inverse(k: &Matrix) -> Matrix {
    if k.cols() == 0 {
        return Matrix::zeros(0, k.rows());
    }
    let kt = k.transpose();
    kt.mul(k).inverse().expect("full column rank").mul(&kt)
}

fn right_inverse(p: &Matrix) -> Matrix {
    if p.rows() == 0 {
        return Matrix::zeros(p.cols(), 0);
    }
    let pt = p.transpose();
    pt.mul(&p.mul(&pt).inverse().expect("full row rank"))
}

/// Checks `0 -> K -iota-> E -pi-> Q -> 0` with linear splitting `sigma` and builds the six-term sequence
/// of `Hom(O_G[0], -)` homologies for `ker X(T pi) -> X(T E) -> X(T Q)` at level `n`.
pub fn split_extension(
    k: &GAlgebra,
    e: &GAlgebra,
    q: &GAlgebra,
    iota: &UnitMap,
    pi: &UnitMap,
    sigma: &UnitMap,
    n: usize,
) -> Result<SplitReport> {
    let bad = |s: &str| Err(Error::Invalid(format!("inadmissible extension: {s}")));
    if homomorphism_failure(k, e, iota).is_some() || homomorphism_failure(e, q, pi).is_some() {
        return bad("structure maps are not homomorphisms");
    }
    if !k.module.is_equivariant(&e.module, iota) || !e.module.is_equivariant(&q.module, pi) || !q.module.is_equivariant(&e.module, sigma) {
        return bad("structure maps are not equivariant");
    }
    for x in 0..e.groupoid().n_units() {
        if !pi[x].mul(&iota[x]).is_zero() || !pi[x].mul(&sigma[x]).is_identity() && q.dim(x) > 0 {
            return bad("pi iota != 0 or pi sigma != id");
        }
        if rank(&iota[x]) != k.dim(x) || rank(&iota[x]) + rank(&pi[x]) != e.dim(x) {
            return bad("sequence is not short exact");
        }
    }
    let te = truncated_tensor_algebra(e, n)?;
    let tq = truncated_tensor_algebra(q, n)?;
    let tpi = truncated_map(&te, &tq, pi);
    let xe: FormParacomplex = hodge_level(Arc::new(build_forms(&te.algebra, 2)?), 1)?;
    let xq: FormParacomplex = hodge_level(Arc::new(build_forms(&tq.algebra, 2)?), 1)?;
    let p = induced_map(&xe, &xq, &tpi);
    let loops = xe.complex.n_loops();
    let mut surjective = true;
    let mut kernel_closed = true;
    let mut decomposition = true;
    for (l, pl) in p.iter().enumerate().take(loops) {
        let r = rank(pl);
        surjective &= r == xq.total(l);
        let ker = Matrix::from_cols(xe.total(l), &pl.kernel());
        kernel_closed &= pl.mul(&xe.complex.boundary(l)).mul(&ker).is_zero();
        decomposition &= ker.cols() + xq.total(l) == xe.total(l);
    }
    let ie = InvariantComplex::new(&xe.complex);
    let iq = InvariantComplex::new(&xq.complex);
    let pinv = ie.restrict_map(&xe.complex, &iq, &xq.complex, &p, 0);
    // kernel subcomplex inside the invariants of X(T E)
    let kb: [Matrix; 2] = [0usize, 1].map(|par| Matrix::from_cols(ie.dim(par), &pinv[par].kernel()));
    let ik = InvariantComplex {
        classes: Vec::new(),
        d: [0usize, 1].map(|par| left_inverse(&kb[1 - par]).mul(&ie.d[par]).mul(&kb[par])),
    };
    let ik = InvariantComplex { classes: vec![(0, [Matrix::identity(kb[0].cols()), Matrix::identity(kb[1].cols())])], ..ik };
    let sect: [Matrix; 2] = [0usize, 1].map(|par| right_inverse(&pinv[par]));
    // connecting map H_p(Q) -> H_{1-p}(K)
    let delta: [Matrix; 2] = [0usize, 1].map(|par| left_inverse(&kb[1 - par]).mul(&ie.d[par]).mul(&sect[par]));
    let names = ["K", "E", "Q"];
    let cx = [&ik, &ie, &iq];
    let maps_into = |node: usize, par: usize| -> Matrix {
        // map arriving at node (index into K, E, Q) of parity par
        match node {
            0 => delta[1 - par].clone(),
            1 => kb[par].clone(),
            _ => pinv[par].clone(),
        }
    };
    let mut sequence = Vec::new();
    for par in 0..2 {
        for node in 0..3 {
            let (prev, prev_par) = if node == 0 { (2, 1 - par) } else { (node - 1, par) };
            let (next, next_par) = if node == 2 { (0, 1 - par) } else { (node + 1, par) };
            let f = maps_into(node, par);
            let g = maps_into(next, next_par);
            let (dim, exact) = exact_at((cx[prev], prev_par), (cx[node], par), (cx[next], next_par), &f, &g);
            sequence.push(NodeReport { node: format!("H{par}({})", names[node]), dim, exact });
        }
    }
    Ok(SplitReport { level: n, surjective, kernel_closed, decomposition, sequence })
}

/// `E = Q x Q` over a groupoid with trivial action, `K` the first factor, `Q` the second.
pub fn product_extension(g: Arc<crate::groupoid::FiniteGroupoid>) -> (GAlgebra, GAlgebra, GAlgebra, UnitMap, UnitMap, UnitMap) {
    let one = GAlgebra::diagonal(g.clone(), 1);
    let e = one.product(&one);
    let units = g.n_units();
    let iota = vec![Matrix::from_ints(&[&[1], &[0]]); units];
    let pi = vec![Matrix::from_ints(&[&[0, 1]]); units];
    let sigma = vec![Matrix::from_ints(&[&[0], &[1]]); units];
    (one.clone(), e, one, iota, pi, sigma)
}
