//! Paracomplexes, the Hodge tower, Hom-paracomplexes over `A(G)` and their homology.

pub mod homotopy;
pub mod extension;

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{build_forms, FormModule, LoopForms};
use crate::galgebra::{col_sparse, GAlgebra};
use crate::gmodule::{equivariant_homs, GModule, UnitMap};
use crate::groupoid::{AdjointGroupoid, FiniteGroupoid};
use crate::linalg::{Echelon, Matrix, Quotient, SparseVec};
use crate::q::Q;
use crate::tensoralg::quasifree_certificate;

/// A `Z/2`-graded AYD module with `∂² = id - T`, stored loop by loop.
///
/// Modules live over the adjoint action groupoid; `d_even: C0 -> C1`, `d_odd: C1 -> C0`.
#[derive(Clone, Debug)]
pub struct Paracomplex {
    pub base: Arc<FiniteGroupoid>,
    pub ad: Arc<AdjointGroupoid>,
    pub even: GModule,
    pub odd: GModule,
    pub d_even: Vec<Matrix>,
    pub d_odd: Vec<Matrix>,
    pub t_even: Vec<Matrix>,
    pub t_odd: Vec<Matrix>,
}

impl Paracomplex {
    pub fn n_loops(&self) -> usize {
        self.ad.loops.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.even.total_dim(), self.odd.total_dim())
    }

    /// `∂² = id - T` on both parities at every loop.
    pub fn check_square(&self) -> bool {
        (0..self.n_loops()).all(|l| {
            let e = self.d_odd[l].mul(&self.d_even[l]);
            let o = self.d_even[l].mul(&self.d_odd[l]);
            let ie = Matrix::identity(self.even.dims[l]);
            let io = Matrix::identity(self.odd.dims[l]);
            e == ie.sub(&self.t_even[l]) && o == io.sub(&self.t_odd[l])
        })
    }

    /// Whether some loop has `∂² != 0`.
    pub fn is_genuinely_para(&self) -> bool {
        (0..self.n_loops()).any(|l| !self.t_even[l].is_identity() || !self.t_odd[l].is_identity())
    }

    /// `T` agrees with the canonical AYD twist and all structure maps are equivariant.
    pub fn check_structure(&self) -> bool {
        let h = &self.ad.groupoid;
        let canonical = (0..self.n_loops()).all(|l| {
            let b = self.ad.loops[l];
            let j = self.ad.arrow_of_pair(self.base.inv(b), b);
            self.even.rho[j] == self.t_even[l] && self.odd.rho[j] == self.t_odd[l]
        });
        let equivariant = (0..h.n_arrows()).all(|j| {
            let (s, t) = (h.src(j), h.tgt(j));
            self.d_even[t].mul(&self.even.rho[j]) == self.odd.rho[j].mul(&self.d_even[s])
                && self.d_odd[t].mul(&self.odd.rho[j]) == self.even.rho[j].mul(&self.d_odd[s])
        });
        canonical && equivariant
    }

    /// Total boundary at a loop on `C0 ⊕ C1`.
    pub fn boundary(&self, l: usize) -> Matrix {
        let (e, o) = (self.even.dims[l], self.odd.dims[l]);
        let mut m = Matrix::zeros(e + o, e + o);
        m.set_block(e, 0, &self.d_even[l]);
        m.set_block(0, e, &self.d_odd[l]);
        m
    }

    pub fn twist(&self, l: usize) -> Matrix {
        Matrix::direct_sum(&[self.t_even[l].clone(), self.t_odd[l].clone()])
    }

    /// Action of the adjoint arrow `j` on `C0 ⊕ C1`.
    pub fn action(&self, j: usize) -> Matrix {
        Matrix::direct_sum(&[self.even.rho[j].clone(), self.odd.rho[j].clone()])
    }

    /// `O_G[0]`: the trivial line at every loop, in even degree.
    pub fn o_g_zero(base: Arc<FiniteGroupoid>) -> Paracomplex {
        let ad = Arc::new(base.adjoint_groupoid());
        let h = Arc::new(ad.groupoid.clone());
        let n = ad.loops.len();
        Paracomplex {
            even: GModule::trivial(h.clone()),
            odd: GModule::zero(h),
            d_even: vec![Matrix::zeros(0, 1); n],
            d_odd: vec![Matrix::zeros(1, 0); n],
            t_even: vec![Matrix::identity(1); n],
            t_odd: vec![Matrix::zeros(0, 0); n],
            base,
            ad,
        }
    }
}

/// A summand of a Hodge level at one loop: `Omega^n`, or the quotient `Omega^n / b Omega^{n+1}`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub degree: usize,
    pub quotient: Option<Arc<Quotient>>,
}

impl Piece {
    pub fn dim(&self, lf: &LoopForms) -> usize {
        match &self.quotient {
            Some(q) => q.dim(),
            None => lf.dim(self.degree),
        }
    }

    /// Word representing basis vector `k`.
    pub fn lift(&self, lf: &LoopForms, k: usize) -> SparseVec {
        match &self.quotient {
            Some(q) => q.lift(k),
            None => SparseVec::unit(lf.basis_word(self.degree, k)),
        }
    }

    /// Coordinates of a form of this degree.
    pub fn coords(&self, lf: &LoopForms, v: &SparseVec) -> Vec<Q> {
        match &self.quotient {
            Some(q) => q.project(v),
            None => {
                let mut out = vec![Q::zero(); lf.dim(self.degree)];
                for (w, c) in v.iter() {
                    out[lf.word_coord(self.degree, *w)] = c.clone();
                }
                out
            }
        }
    }
}

/// `Omega^n / b(Omega^{n+1})` at one loop, by sparse elimination of all `b`-images of words.
pub fn b_quotient(lf: &LoopForms, n: usize) -> Arc<Quotient> {
    assert!(n >= 1, "quotients are taken in positive degree");
    let mut ech = Echelon::new(lf.words(n));
    let total = lf.words(n + 1);
    let chunk = 4096;
    let mut start = 0;
    while start < total && ech.rank() < ech.dim() {
        let end = (start + chunk).min(total);
        let images: Vec<SparseVec> = (start..end).into_par_iter().map(|w| lf.b_word(w, n + 1)).collect();
        for v in &images {
            ech.insert(v);
        }
        start = end;
    }
    Arc::new(Quotient::new(ech))
}

/// A paracomplex assembled from form pieces, with per-loop coordinates ordered by degree.
#[derive(Clone, Debug)]
pub struct FormParacomplex {
    pub complex: Paracomplex,
    /// Pieces per loop, in increasing degree.
    pub pieces: Vec<Vec<Piece>>,
    pub forms: Arc<FormModule>,
}

impl FormParacomplex {
    /// Offset of the piece of a given degree inside its parity block at a loop.
    pub fn offset(&self, l: usize, degree: usize) -> usize {
        let lf = &self.forms.loops[l];
        self.pieces[l].iter().filter(|p| p.degree % 2 == degree % 2 && p.degree < degree).map(|p| p.dim(lf)).sum()
    }

    /// The loop (an arrow of the base groupoid) at adjoint unit `l`.
    pub fn ad_loop(&self, l: usize) -> usize {
        self.complex.ad.loops[l]
    }

    pub fn piece(&self, l: usize, degree: usize) -> Option<&Piece> {
        self.pieces[l].iter().find(|p| p.degree == degree)
    }

    /// Coordinates (in the parity block) of a form of a given degree; zero when the degree is absent.
    pub fn embed(&self, l: usize, degree: usize, v: &SparseVec) -> Vec<Q> {
        let lf = &self.forms.loops[l];
        let size = if degree.is_multiple_of(2) { self.complex.even.dims[l] } else { self.complex.odd.dims[l] };
        let mut out = vec![Q::zero(); size];
        if let Some(p) = self.piece(l, degree) {
            let off = self.offset(l, degree);
            for (i, c) in p.coords(lf, v).into_iter().enumerate() {
                out[off + i] = c;
            }
        }
        out
    }

    /// Forms representing the coordinates of a parity block vector, keyed by degree.
    pub fn lift(&self, l: usize, parity: usize, v: &[Q]) -> Vec<(usize, SparseVec)> {
        let lf = &self.forms.loops[l];
        let mut out = Vec::new();
        for p in self.pieces[l].iter().filter(|p| p.degree % 2 == parity) {
            let off = self.offset(l, p.degree);
            let mut acc = SparseVec::zero();
            for k in 0..p.dim(lf) {
                if !v[off + k].is_zero() {
                    acc = acc.add_scaled(&p.lift(lf, k), &v[off + k]);
                }
            }
            out.push((p.degree, acc));
        }
        out
    }
}

impl FormParacomplex {
    /// Dimension of `C0 ⊕ C1` at a loop.
    pub fn total(&self, l: usize) -> usize {
        self.complex.even.dims[l] + self.complex.odd.dims[l]
    }

    /// Coordinates in `C0 ⊕ C1` of a form of the given degree.
    pub fn stack(&self, l: usize, degree: usize, v: &SparseVec) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.total(l)];
        let shift = if degree.is_multiple_of(2) { 0 } else { self.complex.even.dims[l] };
        for (i, c) in self.embed(l, degree, v).into_iter().enumerate() {
            out[shift + i] = c;
        }
        out
    }

    /// Basis of `C0 ⊕ C1` at a loop as `(degree, representative form)`.
    pub fn basis(&self, l: usize) -> Vec<(usize, SparseVec)> {
        let lf = &self.forms.loops[l];
        let mut out = Vec::with_capacity(self.total(l));
        for parity in 0..2 {
            for p in self.pieces[l].iter().filter(|p| p.degree % 2 == parity) {
                out.extend((0..p.dim(lf)).map(|k| (p.degree, p.lift(lf, k))));
            }
        }
        out
    }

    /// Matrix at loop `l` of a form-level map into `tgt`, given on representatives as `(degree, form)` pieces.
    pub fn operator_matrix<F>(&self, tgt: &FormParacomplex, l: usize, f: F) -> Matrix
    where
        F: Fn(usize, &SparseVec) -> Vec<(usize, SparseVec)> + Sync,
    {
        let cols: Vec<Vec<Q>> = self
            .basis(l)
            .par_iter()
            .map(|(deg, v)| {
                let mut col = vec![Q::zero(); tgt.total(l)];
                for (d, w) in f(*deg, v) {
                    for (i, c) in tgt.stack(l, d, &w).into_iter().enumerate() {
                        col[i] += c;
                    }
                }
                col
            })
            .collect();
        Matrix::from_cols(tgt.total(l), &cols)
    }
}

/// The map induced by fiberwise linear maps `f_x: A_x -> B_x` applied to every entry, loop by loop on `C0 ⊕ C1`.
pub fn induced_map(src: &FormParacomplex, tgt: &FormParacomplex, f: &UnitMap) -> Vec<Matrix> {
    let g = src.forms.algebra.groupoid();
    (0..src.complex.n_loops())
        .map(|l| {
            let x = src.forms.base[l];
            let cols: Vec<SparseVec> = (0..f[x].cols()).map(|k| col_sparse(&f[x], k)).collect();
            let (ds, dt) = (f[x].cols(), f[x].rows());
            debug_assert_eq!(g.src(src.ad_loop(l)), x);
            src.operator_matrix(tgt, l, |deg, v| vec![(deg, v.map(|w| LoopForms::map_word(w, deg, ds, dt, &cols)))])
        })
        .collect()
}

/// A per-degree form operator returning `(degree, form)` pieces.
type DegreeOp<'a> = dyn Fn(usize, &SparseVec) -> Result<Vec<(usize, SparseVec)>> + 'a;

/// Assembles the paracomplex with the given pieces; `∂ = B + b`, with `B` zero out of a quotient piece.
pub fn assemble(fm: Arc<FormModule>, pieces: Vec<Vec<Piece>>) -> Result<FormParacomplex> {
    let n_loops = fm.n_loops();
    let g = fm.algebra.groupoid().clone();
    let ad = Arc::new(fm.ad.clone());
    let h = Arc::new(ad.groupoid.clone());
    let parity_dims = |l: usize, par: usize| -> usize {
        pieces[l].iter().filter(|p| p.degree % 2 == par).map(|p| p.dim(&fm.loops[l])).sum()
    };
    let dims_e: Vec<usize> = (0..n_loops).map(|l| parity_dims(l, 0)).collect();
    let dims_o: Vec<usize> = (0..n_loops).map(|l| parity_dims(l, 1)).collect();
    let shell = FormParacomplex {
        complex: Paracomplex {
            base: g.clone(),
            ad: ad.clone(),
            even: GModule { groupoid: h.clone(), dims: dims_e.clone(), rho: Vec::new() },
            odd: GModule { groupoid: h.clone(), dims: dims_o.clone(), rho: Vec::new() },
            d_even: Vec::new(),
            d_odd: Vec::new(),
            t_even: Vec::new(),
            t_odd: Vec::new(),
        },
        pieces,
        forms: fm.clone(),
    };
    // column map of a per-degree operator on one parity block
    let block = |l: usize, par: usize, f: &DegreeOp| -> Result<Matrix> {
        let lf = &fm.loops[l];
        let rows = if par == 0 { dims_o[l] } else { dims_e[l] };
        let cols = if par == 0 { dims_e[l] } else { dims_o[l] };
        let mut m = Matrix::zeros(rows, cols);
        for p in shell.pieces[l].iter().filter(|p| p.degree % 2 == par) {
            let off = shell.offset(l, p.degree);
            for k in 0..p.dim(lf) {
                let mut col = vec![Q::zero(); rows];
                for (deg, v) in f(p.degree, &p.lift(lf, k))? {
                    for (i, c) in shell.embed(l, deg, &v).into_iter().enumerate() {
                        col[i] += c;
                    }
                }
                for (i, c) in col.into_iter().enumerate() {
                    m[(i, off + k)] = c;
                }
            }
        }
        Ok(m)
    };
    let same = |l: usize, par: usize, f: &dyn Fn(usize, &SparseVec) -> SparseVec| -> Matrix {
        let lf = &fm.loops[l];
        let size = if par == 0 { dims_e[l] } else { dims_o[l] };
        let mut m = Matrix::zeros(size, size);
        for p in shell.pieces[l].iter().filter(|p| p.degree % 2 == par) {
            let off = shell.offset(l, p.degree);
            for k in 0..p.dim(lf) {
                for (i, c) in shell.embed(l, p.degree, &f(p.degree, &p.lift(lf, k))).into_iter().enumerate() {
                    if !c.is_zero() {
                        m[(i, off + k)] = c;
                    }
                }
            }
        }
        m
    };
    let mut d_even = Vec::new();
    let mut d_odd = Vec::new();
    let mut t_even = Vec::new();
    let mut t_odd = Vec::new();
    for l in 0..n_loops {
        let lf = &fm.loops[l];
        let boundary = |deg: usize, v: &SparseVec| -> Result<Vec<(usize, SparseVec)>> {
            let mut out = Vec::new();
            if deg > 0 {
                out.push((deg - 1, lf.b(v, deg)));
            }
            let top = shell.piece(l, deg).is_none_or(|p| p.quotient.is_some());
            if !top {
                out.push((deg + 1, lf.connes(v, deg)?));
            }
            Ok(out)
        };
        d_even.push(block(l, 0, &boundary)?);
        d_odd.push(block(l, 1, &boundary)?);
        t_even.push(same(l, 0, &|deg, v| lf.t(v, deg)));
        t_odd.push(same(l, 1, &|deg, v| lf.t(v, deg)));
    }
    let mut rho_e = Vec::new();
    let mut rho_o = Vec::new();
    for j in 0..h.n_arrows() {
        let (s, t) = (h.src(j), h.tgt(j));
        for (par, out) in [(0usize, &mut rho_e), (1usize, &mut rho_o)] {
            let lf = &fm.loops[s];
            let rows = if par == 0 { dims_e[t] } else { dims_o[t] };
            let cols = if par == 0 { dims_e[s] } else { dims_o[s] };
            let mut m = Matrix::zeros(rows, cols);
            for p in shell.pieces[s].iter().filter(|p| p.degree % 2 == par) {
                let off = shell.offset(s, p.degree);
                for k in 0..p.dim(lf) {
                    let moved = fm.transport(j, &p.lift(lf, k), p.degree);
                    for (i, c) in shell.embed(t, p.degree, &moved).into_iter().enumerate() {
                        if !c.is_zero() {
                            m[(i, off + k)] = c;
                        }
                    }
                }
            }
            out.push(m);
        }
    }
    let mut out = shell;
    out.complex.even.rho = rho_e;
    out.complex.odd.rho = rho_o;
    out.complex.d_even = d_even;
    out.complex.d_odd = d_odd;
    out.complex.t_even = t_even;
    out.complex.t_odd = t_odd;
    Ok(out)
}

/// `theta^n = Omega^0 ⊕ ... ⊕ Omega^{n-1} ⊕ Omega^n / b Omega^{n+1}`.
pub fn hodge_level(fm: Arc<FormModule>, n: usize) -> Result<FormParacomplex> {
    if n == 0 || fm.cap < n + 1 {
        return Err(Error::Invalid(format!("Hodge level {n} needs a degree cap of at least {}", n + 1)));
    }
    let quotients: Vec<Arc<Quotient>> = fm.loops.iter().map(|lf| b_quotient(lf, n)).collect();
    let pieces = (0..fm.n_loops())
        .map(|l| {
            let mut v: Vec<Piece> = (0..n).map(|degree| Piece { degree, quotient: None }).collect();
            v.push(Piece { degree: n, quotient: Some(quotients[l].clone()) });
            v
        })
        .collect();
    assemble(fm, pieces)
}

/// The X-complex `Omega^0 ⊕ Omega^1 / b Omega^2`.
pub fn x_complex(a: &GAlgebra) -> Result<FormParacomplex> {
    hodge_level(Arc::new(build_forms(a, 2)?), 1)
}

/// The Hom-paracomplex over `A(G)` with its differential on a basis of equivariant maps.
#[derive(Clone, Debug)]
pub struct HomComplex {
    /// Even and odd carrier bases, each map given per loop on `C0 ⊕ C1`.
    pub carrier: [Vec<Vec<Matrix>>; 2],
    /// `differential[p]` maps parity `p` coordinates to parity `1 - p` coordinates.
    pub differential: [Matrix; 2],
}

/// `∂(phi) = phi ∂_P - (-1)^|phi| ∂_Q phi`, loop by loop.
pub fn hom_differential(p: &Paracomplex, q: &Paracomplex, phi: &[Matrix], parity: usize) -> Vec<Matrix> {
    (0..p.n_loops())
        .map(|l| {
            let a = phi[l].mul(&p.boundary(l));
            let b = q.boundary(l).mul(&phi[l]);
            if parity == 0 {
                a.sub(&b)
            } else {
                a.add(&b)
            }
        })
        .collect()
}

fn block_map(p: &Paracomplex, q: &Paracomplex, l: usize, rows_odd: bool, cols_odd: bool, m: &Matrix) -> Matrix {
    let (pe, po) = (p.even.dims[l], p.odd.dims[l]);
    let (qe, qo) = (q.even.dims[l], q.odd.dims[l]);
    let mut out = Matrix::zeros(qe + qo, pe + po);
    out.set_block(if rows_odd { qe } else { 0 }, if cols_odd { pe } else { 0 }, m);
    out
}

fn flatten(maps: &[Matrix]) -> Vec<Q> {
    maps.iter().flat_map(|m| (0..m.rows()).flat_map(move |r| m.row(r).to_vec())).collect()
}

/// Direct construction: equivariant maps over the adjoint groupoid, and `∂` in carrier coordinates.
pub fn hom_paracomplex(p: &Paracomplex, q: &Paracomplex) -> HomComplex {
    let mut carrier: [Vec<Vec<Matrix>>; 2] = [Vec::new(), Vec::new()];
    for (parity, slot) in carrier.iter_mut().enumerate() {
        for src_odd in [false, true] {
            let tgt_odd = src_odd ^ (parity == 1);
            let (ms, mt) = (if src_odd { &p.odd } else { &p.even }, if tgt_odd { &q.odd } else { &q.even });
            for phi in equivariant_homs(ms, mt) {
                slot.push((0..p.n_loops()).map(|l| block_map(p, q, l, tgt_odd, src_odd, &phi[l])).collect());
            }
        }
    }
    let differential = [0, 1].map(|parity| {
        let target = &carrier[1 - parity];
        let basis: Vec<Vec<Q>> = target.iter().map(|m| flatten(m)).collect();
        let len = basis.first().map_or(0, Vec::len);
        let bm = Matrix::from_cols(len, &basis);
        let cols: Vec<Vec<Q>> = carrier[parity]
            .iter()
            .map(|phi| {
                let d = flatten(&hom_differential(p, q, phi, parity));
                if target.is_empty() {
                    assert!(d.iter().all(Q::is_zero), "differential leaves the carrier");
                    return Vec::new();
                }
                bm.solve(&d).expect("differential of an equivariant map is equivariant")
            })
            .collect();
        Matrix::from_cols(target.len(), &cols)
    });
    HomComplex { carrier, differential }
}

impl HomComplex {
    pub fn dims(&self) -> (usize, usize) {
        (self.carrier[0].len(), self.carrier[1].len())
    }

    /// `∂² = 0` on the carrier.
    pub fn square_is_zero(&self) -> bool {
        self.differential[1].mul(&self.differential[0]).is_zero() && self.differential[0].mul(&self.differential[1]).is_zero()
    }

    /// Carrier coordinates of a map given loop by loop, if it lies in the carrier.
    pub fn coordinates(&self, parity: usize, maps: &[Matrix]) -> Option<Vec<Q>> {
        let basis: Vec<Vec<Q>> = self.carrier[parity].iter().map(|m| flatten(m)).collect();
        let target = flatten(maps);
        if basis.is_empty() {
            return target.iter().all(Q::is_zero).then(Vec::new);
        }
        Matrix::from_cols(target.len(), &basis).solve(&target)
    }

    /// Whether carrier coordinates of parity `parity` lie in the image of the differential.
    pub fn is_boundary(&self, parity: usize, coords: &[Q]) -> bool {
        let d = &self.differential[1 - parity];
        if coords.iter().all(Q::is_zero) {
            return true;
        }
        if d.cols() == 0 {
            return false;
        }
        d.rank() == d.hstack(&Matrix::from_cols(coords.len(), &[coords.to_vec()])).rank()
    }

    /// `(even, odd)` homology ranks.
    pub fn homology(&self) -> (usize, usize) {
        let (r0, r1) = (self.differential[0].rank(), self.differential[1].rank());
        let (c0, c1) = self.dims();
        (c0 - r0 - r1, c1 - r1 - r0)
    }
}

/// Whether two even cycles `Hom(P, Q)` given loop by loop define the same homology class.
pub fn same_class(p: &Paracomplex, q: &Paracomplex, f0: &[Matrix], f1: &[Matrix]) -> bool {
    let hom = hom_paracomplex(p, q);
    let diff: Vec<Matrix> = f1.iter().zip(f0).map(|(a, b)| a.sub(b)).collect();
    match hom.coordinates(0, &diff) {
        Some(c) => hom.is_boundary(0, &c),
        None => false,
    }
}

/// Homology data of a paracomplex at one adjoint class: characters of the centralizer on `H(C^T)`.
#[derive(Clone, Debug)]
pub struct ClassHomology {
    /// Adjoint-groupoid arrows forming the centralizer of the representative loop.
    pub centralizer: Vec<usize>,
    pub inverse: Vec<usize>,
    pub chi: [Vec<Q>; 2],
    pub dims: [usize; 2],
}

/// Trace of `m` restricted to the invariant subspace spanned by the columns of `w`.
fn restricted_trace(m: &Matrix, w: &Matrix) -> Q {
    if w.cols() == 0 {
        return Q::zero();
    }
    w.solve_matrix(&m.mul(w)).expect("subspace is invariant").trace()
}

/// Characters of the centralizers on the homology of the `T`-fixed subcomplex, one entry per adjoint class.
pub fn class_homology(c: &Paracomplex) -> Vec<ClassHomology> {
    let base = &c.base;
    let h = &c.ad.groupoid;
    base.adjoint_classes()
        .into_par_iter()
        .map(|class| {
            let b = class[0];
            let l = c.ad.unit_of_loop(b);
            let centralizer: Vec<usize> = base.centralizer(b).into_iter().map(|a| c.ad.arrow_of_pair(a, b)).collect();
            let inverse: Vec<usize> =
                centralizer.iter().map(|&j| h.inv(j)).map(|j| centralizer.iter().position(|&k| k == j).unwrap()).collect();
            let fixed = |t: &Matrix| Matrix::from_cols(t.rows(), &Matrix::identity(t.rows()).sub(t).kernel());
            let ke = fixed(&c.t_even[l]);
            let ko = fixed(&c.t_odd[l]);
            // restricted differentials in fixed-space coordinates
            let de = if ko.cols() == 0 { Matrix::zeros(0, ke.cols()) } else { ko.solve_matrix(&c.d_even[l].mul(&ke)).unwrap() };
            let dd = if ke.cols() == 0 { Matrix::zeros(0, ko.cols()) } else { ke.solve_matrix(&c.d_odd[l].mul(&ko)).unwrap() };
            let z_e = ker_im(&ke, &de, &dd);
            let z_o = ker_im(&ko, &dd, &de);
            let chi = [(&z_e, 0usize), (&z_o, 1usize)].map(|((ker, im), par)| {
                centralizer
                    .iter()
                    .map(|&j| {
                        let act = if par == 0 { &c.even.rho[j] } else { &c.odd.rho[j] };
                        restricted_trace(act, ker) - restricted_trace(act, im)
                    })
                    .collect::<Vec<Q>>()
            });
            let dims = [z_e.0.cols() - z_e.1.cols(), z_o.0.cols() - z_o.1.cols()];
            ClassHomology { centralizer, inverse, chi, dims }
        })
        .collect()
}

/// Kernel of `out` and image of `inc` inside the space spanned by `basis`, as columns in ambient coordinates.
fn ker_im(basis: &Matrix, out: &Matrix, inc: &Matrix) -> (Matrix, Matrix) {
    let n = basis.cols();
    let ker = if out.rows() == 0 {
        Matrix::identity(n)
    } else {
        Matrix::from_cols(n, &out.kernel())
    };
    let im = if inc.cols() == 0 { Matrix::zeros(n, 0) } else { inc.column_basis() };
    (basis.mul(&ker), basis.mul(&im))
}

/// `dim Hom_Z(V, W) = (1/|Z|) sum_z chi_V(z^-1) chi_W(z)`.
fn hom_dim(v: &[Q], w: &[Q], inverse: &[usize]) -> usize {
    let s: Q = (0..v.len()).map(|k| &v[inverse[k]] * &w[k]).sum();
    let d = s / Q::from(v.len());
    assert!(d.is_integer(), "character inner product is integral");
    usize::try_from(d.to_big().numer()).expect("nonnegative dimension")
}

/// Homology ranks of `Hom_{A(G)}(P, Q)` from class characters (the reduced route).
pub fn reduced_hom_homology(p: &[ClassHomology], q: &[ClassHomology]) -> (usize, usize) {
    let mut even = 0;
    let mut odd = 0;
    for (a, b) in p.iter().zip(q) {
        even += hom_dim(&a.chi[0], &b.chi[0], &a.inverse) + hom_dim(&a.chi[1], &b.chi[1], &a.inverse);
        odd += hom_dim(&a.chi[0], &b.chi[1], &a.inverse) + hom_dim(&a.chi[1], &b.chi[0], &a.inverse);
    }
    (even, odd)
}

/// `H(Hom(O_G[0], C))`: centralizer invariants of the fixed-part homology.
pub fn univariant_homology(c: &[ClassHomology]) -> (usize, usize) {
    let one: Vec<Vec<Q>> = c.iter().map(|k| vec![Q::one(); k.centralizer.len()]).collect();
    let mut even = 0;
    let mut odd = 0;
    for (k, t) in c.iter().zip(&one) {
        even += hom_dim(t, &k.chi[0], &k.inverse);
        odd += hom_dim(t, &k.chi[1], &k.inverse);
    }
    (even, odd)
}

/// Ranks reported by the HP engine.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct HomologyReport {
    pub even: usize,
    pub odd: usize,
    pub level: usize,
    pub reduction: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilized: Option<bool>,
}

/// Homology of `Hom(X(A), X(B))` for algebras with quasifree certificates.
pub fn hp_quasifree(a: &GAlgebra, b: &GAlgebra) -> Result<HomologyReport> {
    let distinct = if std::ptr::eq(a, b) { 1 } else { 2 };
    for (name, alg) in [("the source", a), ("the target", b)].into_iter().take(distinct) {
        if quasifree_certificate(alg)?.is_none() {
            return Err(Error::NoCertificate(format!("{name}; use a Hodge level instead")));
        }
    }
    let (xa, xb) = (x_complex(a)?, x_complex(b)?);
    let (even, odd) = reduced_hom_homology(&class_homology(&xa.complex), &class_homology(&xb.complex));
    Ok(HomologyReport { even, odd, level: 1, reduction: "quasifree".into(), stabilized: None })
}

/// Homology of `Hom(theta^m A, theta^m B)` for `m = 1..=levels`; the last report carries the stabilization flag.
pub fn hp_level(a: &GAlgebra, b: &GAlgebra, levels: usize, guard: usize) -> Result<Vec<HomologyReport>> {
    if levels == 0 {
        return Err(Error::Invalid("level bound must be positive".into()));
    }
    let fa = Arc::new(build_forms(a, levels + 1)?);
    let fb = Arc::new(build_forms(b, levels + 1)?);
    let mut out: Vec<HomologyReport> = Vec::new();
    for m in 1..=levels {
        for f in [&fa, &fb] {
            let dim: usize = (0..=m).map(|n| f.dim(n)).sum::<usize>() + f.dim(m + 1);
            if dim > guard {
                return Err(Error::Guard { dim, limit: guard });
            }
        }
        let pa = hodge_level(fa.clone(), m)?;
        let pb = hodge_level(fb.clone(), m)?;
        let (even, odd) = reduced_hom_homology(&class_homology(&pa.complex), &class_homology(&pb.complex));
        out.push(HomologyReport { even, odd, level: m, reduction: "level".into(), stabilized: None });
    }
    let stable = out.len() >= 2 && {
        let (x, y) = (&out[out.len() - 2], &out[out.len() - 1]);
        (x.even, x.odd) == (y.even, y.odd)
    };
    if let Some(last) = out.last_mut() {
        last.stabilized = Some(stable);
    }
    Ok(out)
}
