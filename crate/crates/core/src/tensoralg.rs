//! Fedosov products, truncated tensor algebras, curvature, lonilcur extensions and quasifreeness certificates.
//!
//! A level `n` truncation `T A / (J A)^n` has carrier `A ⊕ Omega^2 ⊕ ... ⊕ Omega^{2(n-1)}`, so level 1 is `A`.

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::LoopForms;
use crate::galgebra::{col_sparse, GAlgebra};
use crate::gmodule::{GModule, UnitMap};
use crate::linalg::{Echelon, Matrix, SparseVec};
use crate::q::Q;

/// Largest number of unknowns handed to the exact feasibility solver.
pub const SOLVER_LIMIT: usize = 4096;

/// Untwisted form calculus of the fiber at `x`.
pub fn fiber_forms(a: &GAlgebra, x: usize, cap: usize) -> LoopForms {
    LoopForms::untwisted(a.dim(x), cap, Arc::new(a.mul[x].clone()))
}

fn rho_cols(a: &GAlgebra, arrow: usize) -> Vec<SparseVec> {
    let rho = &a.module.rho[arrow];
    (0..rho.cols()).map(|k| col_sparse(rho, k)).collect()
}

/// Image of a form of degree `n` under `rho(arrow)` applied entrywise.
pub fn transport_form(a: &GAlgebra, arrow: usize, v: &SparseVec, n: usize) -> SparseVec {
    let g = a.groupoid();
    let cols = rho_cols(a, arrow);
    let (ds, dt) = (a.dim(g.src(arrow)), a.dim(g.tgt(arrow)));
    v.map(|w| LoopForms::map_word(w, n, ds, dt, &cols))
}

/// `<1> dx dy` for fiber vectors `x`, `y`.
fn dd(lf: &LoopForms, x: &SparseVec, y: &SparseVec) -> SparseVec {
    let mut terms = Vec::new();
    for (i, c) in x.iter() {
        for (j, e) in y.iter() {
            terms.push((lf.encode(0, &[*i, *j]), c * e));
        }
    }
    SparseVec::from_terms(terms)
}

/// How a connection was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact linear feasibility, free variables set to zero.
    Solver,
    /// Closed form from the separability idempotent of the trace form.
    Casimir,
    /// Supplied explicitly.
    Explicit,
}

/// An equivariant `phi: A -> Omega^2(A)` with `phi(xy) = phi(x) y + x phi(y) - dx dy`.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionCertificate {
    #[serde(skip)]
    pub algebra: GAlgebra,
    pub method: Method,
    pub units: Vec<String>,
    /// `phi[x][i]` is the image of basis vector `i` of `A_x`, in word coordinates of `Omega^2`.
    pub phi: Vec<Vec<SparseVec>>,
}

impl ConnectionCertificate {
    fn new(algebra: &GAlgebra, method: Method, phi: Vec<Vec<SparseVec>>) -> ConnectionCertificate {
        ConnectionCertificate { units: algebra.groupoid().units().to_vec(), algebra: algebra.clone(), method, phi }
    }

    /// The connection `phi(f) = 2 <f> dchi dchi - <1> df dchi` on the unit fibers of the trivial algebra.
    pub fn explicit_trivial(a: &GAlgebra) -> Result<ConnectionCertificate> {
        let g = a.groupoid();
        if a != &GAlgebra::trivial(g.clone()) {
            return Err(Error::Invalid("the explicit connection needs the trivial algebra".into()));
        }
        let phi = (0..g.n_units())
            .map(|x| {
                let lf = fiber_forms(a, x, 3);
                vec![SparseVec::from_terms(vec![(lf.encode(1, &[0, 0]), Q::int(2)), (lf.encode(0, &[0, 0]), -Q::one())])]
            })
            .collect();
        Ok(ConnectionCertificate::new(a, Method::Explicit, phi))
    }

    pub fn phi_vec(&self, x: usize, v: &SparseVec) -> SparseVec {
        v.map(|i| self.phi[x][i].clone())
    }

    /// `phi(xy) - phi(x) y - x phi(y) + dx dy` on basis vectors.
    pub fn defect(&self, x: usize, i: usize, j: usize) -> SparseVec {
        let lf = fiber_forms(&self.algebra, x, 3);
        let (ei, ej) = (SparseVec::unit(i), SparseVec::unit(j));
        self.phi_vec(x, self.algebra.mul_basis(x, i, j))
            .sub(&lf.right_mul(&self.phi[x][i], 2, &ej))
            .sub(&lf.left_mul(&ei, &self.phi[x][j], 2))
            .add(&dd(&lf, &ei, &ej))
    }

    /// First basis pair `(unit, i, j)` violating the cocycle identity.
    pub fn cocycle_failure(&self) -> Option<(usize, usize, usize)> {
        let a = &self.algebra;
        (0..a.groupoid().n_units()).find_map(|x| {
            let d = a.dim(x);
            (0..d * d).into_par_iter().find_first(|&ij| !self.defect(x, ij / d, ij % d).is_zero()).map(|ij| (x, ij / d, ij % d))
        })
    }

    /// First `(arrow, i)` with `rho(a) phi(e_i) != phi(rho(a) e_i)`.
    pub fn equivariance_failure(&self) -> Option<(usize, usize)> {
        let a = &self.algebra;
        let g = a.groupoid();
        (0..g.n_arrows()).find_map(|arrow| {
            let (s, t) = (g.src(arrow), g.tgt(arrow));
            (0..a.dim(s))
                .into_par_iter()
                .find_first(|&i| {
                    transport_form(a, arrow, &self.phi[s][i], 2) != self.phi_vec(t, &a.act(arrow, &SparseVec::unit(i)))
                })
                .map(|i| (arrow, i))
        })
    }

    pub fn verify(&self) -> bool {
        self.cocycle_failure().is_none() && self.equivariance_failure().is_none()
    }

    /// `nabla(<a0> da1 ... dan) = a0 phi(a1) da2 ... dan` on `Omega^n(A_x)`, `n >= 1`.
    pub fn nabla(&self, x: usize, v: &SparseVec, n: usize) -> SparseVec {
        assert!(n >= 1, "nabla acts on positive degrees");
        let lf = fiber_forms(&self.algebra, x, n + 1);
        v.map(|w| {
            let (lead, digits) = lf.decode(w, n);
            let mut head = self.phi[x][digits[0]].clone();
            if lead > 0 {
                head = lf.left_mul(&SparseVec::unit(lead - 1), &head, 2);
            }
            let tail = lf.encode(0, &digits[1..]);
            lf.mul_forms(&head, 2, &SparseVec::unit(tail), n - 1)
        })
    }

    /// `nabla(x w) = x nabla(w)` and `nabla(w x) = nabla(w) x - w dx` on `Omega^1` basis forms.
    pub fn nabla_identities_hold(&self) -> bool {
        let a = &self.algebra;
        (0..a.groupoid().n_units()).all(|x| {
            let lf = fiber_forms(a, x, 3);
            (0..lf.dim(1)).into_par_iter().all(|w| {
                let om = SparseVec::unit(w);
                let nw = self.nabla(x, &om, 1);
                (0..a.dim(x)).all(|k| {
                    let ek = SparseVec::unit(k);
                    let left = self.nabla(x, &lf.left_mul(&ek, &om, 1), 1) == lf.left_mul(&ek, &nw, 2);
                    let dx = SparseVec::unit(lf.encode(0, &[k]));
                    let right = self.nabla(x, &lf.right_mul(&om, 1, &ek), 1)
                        == lf.right_mul(&nw, 2, &ek).sub(&lf.mul_forms(&om, 1, &dx, 1));
                    left && right
                })
            })
        })
    }
}

/// Closed-form connection for a separable fiber; `None` when the fiber is not unital or the trace form degenerates.
fn casimir_phi(a: &GAlgebra, x: usize) -> Option<Vec<SparseVec>> {
    let d = a.dim(x);
    if d == 0 {
        return Some(Vec::new());
    }
    let one = a.unit_element(x)?;
    let gram = Matrix::from_rows(
        (0..d).map(|i| (0..d).map(|j| a.left_matrix(x, a.mul_basis(x, i, j)).trace()).collect()).collect(),
    );
    let ginv = gram.inverse()?;
    let dual: Vec<SparseVec> = (0..d).map(|i| SparseVec::from_dense(&ginv.col(i))).collect();
    let c = (0..d).fold(SparseVec::zero(), |acc, i| acc.add(&a.mul_vec(x, &SparseVec::unit(i), &dual[i])));
    let cinv = SparseVec::from_dense(&a.left_matrix(x, &c).solve(&one.to_dense(d))?);
    let v: Vec<SparseVec> = dual.iter().map(|xi| a.mul_vec(x, xi, &cinv)).collect();
    let lf = fiber_forms(a, x, 3);
    let l = |w: &SparseVec| lf.left_mul(&one, w, 2);
    let r = |w: &SparseVec| lf.right_mul(w, 2, &one);
    Some(
        (0..d)
            .into_par_iter()
            .map(|k| {
                let ek = SparseVec::unit(k);
                let mut acc = SparseVec::zero();
                for (i, vi) in v.iter().enumerate() {
                    let ei = SparseVec::unit(i);
                    acc = acc.add(&lf.left_mul(&ei, &l(&dd(&lf, vi, &ek)), 2));
                    let rc = r(&dd(&lf, &ek, &ei));
                    acc = acc.add(&lf.right_mul(&rc.sub(&l(&rc)), 2, vi));
                }
                let c1 = dd(&lf, &ek, &one);
                let rc1 = r(&c1);
                acc.sub(&c1.sub(&l(&c1)).sub(&rc1).add(&l(&rc1)))
            })
            .collect(),
    )
}

/// Solves for `phi` at each orbit representative under isotropy equivariance, then transports.
///
/// `Ok(None)` means the linear system is infeasible.
fn solve_phi(a: &GAlgebra) -> Result<Option<Vec<Vec<SparseVec>>>> {
    let g = a.groupoid();
    let mut phi = vec![Vec::new(); g.n_units()];
    for orbit in g.orbits() {
        let x = orbit.rep;
        let d = a.dim(x);
        let lf = fiber_forms(a, x, 3);
        let w2 = lf.words(2);
        let n = d * w2;
        if n > SOLVER_LIMIT {
            return Err(Error::Guard { dim: n, limit: SOLVER_LIMIT });
        }
        let mut ech = Echelon::new(n + 1);
        let mut push = |rows: Vec<Vec<(usize, Q)>>| -> bool {
            for r in rows {
                let v = SparseVec::from_terms(r);
                if !v.is_zero() {
                    ech.insert(&v);
                }
                if ech.is_pivot(n) {
                    return false;
                }
            }
            true
        };
        for i in 0..d {
            for j in 0..d {
                let mut rows = vec![Vec::new(); w2];
                for (k, c) in a.mul_basis(x, i, j).iter() {
                    for (w, row) in rows.iter_mut().enumerate() {
                        row.push((k * w2 + w, c.clone()));
                    }
                }
                for w in 0..w2 {
                    for (u, f) in lf.right_mul_word(w, 2, j).0 {
                        rows[u].push((i * w2 + w, -f));
                    }
                    for (u, f) in lf.left_mul_word(i, w, 2).0 {
                        rows[u].push((j * w2 + w, -f));
                    }
                }
                rows[lf.encode(0, &[i, j])].push((n, -Q::one()));
                if !push(rows) {
                    return Ok(None);
                }
            }
        }
        for &h in orbit.isotropy.iter().filter(|&&h| !g.is_unit_arrow(h)) {
            let cols = rho_cols(a, h);
            for (i, col) in cols.iter().enumerate() {
                let mut rows = vec![Vec::new(); w2];
                for (k, c) in col.iter() {
                    for (w, row) in rows.iter_mut().enumerate() {
                        row.push((k * w2 + w, c.clone()));
                    }
                }
                for w in 0..w2 {
                    for (u, f) in LoopForms::map_word(w, 2, d, d, &cols).0 {
                        rows[u].push((i * w2 + w, -f));
                    }
                }
                if !push(rows) {
                    return Ok(None);
                }
            }
        }
        // back substitution with free variables set to zero
        let mut sol = vec![Q::zero(); n];
        for p in (0..n).rev() {
            let Some(row) = ech.row(p) else { continue };
            let mut val = Q::zero();
            for (j, c) in &row[1..] {
                if *j == n {
                    val += c;
                } else {
                    val -= c * &sol[*j];
                }
            }
            sol[p] = val;
        }
        let at_rep: Vec<SparseVec> = (0..d).map(|i| SparseVec::from_dense(&sol[i * w2..(i + 1) * w2])).collect();
        for &y in &orbit.units {
            let arrow = g.arrow_between(x, y).expect("units of an orbit are connected");
            let back = g.inv(arrow);
            phi[y] = (0..a.dim(y))
                .map(|k| {
                    let pre = a.act(back, &SparseVec::unit(k));
                    let v = pre.map(|i| at_rep[i].clone());
                    transport_form(a, arrow, &v, 2)
                })
                .collect();
        }
    }
    Ok(Some(phi))
}

/// Decides quasifreeness through a connection `phi`.
///
/// Small fibers go to the exact solver, which also proves infeasibility. Larger fibers use the
/// closed form for separable algebras; if that fails to verify the question is left open as a guard error.
pub fn quasifree_certificate(a: &GAlgebra) -> Result<Option<ConnectionCertificate>> {
    let g = a.groupoid();
    let small = g.orbits().iter().all(|o| {
        let d = a.dim(o.rep);
        d * (d + 1) * d * d <= SOLVER_LIMIT
    });
    if small {
        return Ok(solve_phi(a)?.map(|phi| ConnectionCertificate::new(a, Method::Solver, phi)));
    }
    let phi: Option<Vec<Vec<SparseVec>>> = (0..g.n_units()).map(|x| casimir_phi(a, x)).collect();
    if let Some(phi) = phi {
        let cert = ConnectionCertificate::new(a, Method::Casimir, phi);
        if cert.verify() {
            return Ok(Some(cert));
        }
    }
    let dim = g.orbits().iter().map(|o| a.dim(o.rep)).max().unwrap_or(0);
    Err(Error::Guard { dim: dim * (dim + 1) * dim * dim, limit: SOLVER_LIMIT })
}

/// `T A / (J A)^n` with the Fedosov product `w ∘ v = wv - dw dv`, as a G-algebra.
#[derive(Clone, Debug)]
pub struct TruncatedTA {
    pub base: GAlgebra,
    pub level: usize,
    pub algebra: GAlgebra,
    /// Per unit, the offset of the block of degree `2k` for `k < level`.
    pub offsets: Vec<Vec<usize>>,
}

impl TruncatedTA {
    pub fn top_degree(&self) -> usize {
        2 * (self.level - 1)
    }

    /// Coordinate of a word of degree `2k` in the carrier at `x`.
    pub fn index(&self, x: usize, degree: usize, w: usize) -> usize {
        let lf = fiber_forms(&self.base, x, 1);
        self.offsets[x][degree / 2] + lf.word_coord(degree, w)
    }

    /// Carrier vector of a form of degree `2k`, zero when `2k` exceeds the top degree.
    pub fn embed(&self, x: usize, degree: usize, v: &SparseVec) -> SparseVec {
        if degree > self.top_degree() {
            return SparseVec::zero();
        }
        SparseVec(v.iter().map(|(w, c)| (self.index(x, degree, *w), c.clone())).collect())
    }

    /// `(degree, word, coefficient)` terms of a carrier vector at `x`.
    pub fn split(&self, x: usize, v: &SparseVec) -> Vec<(usize, usize, Q)> {
        let lf = fiber_forms(&self.base, x, 1);
        v.iter()
            .map(|(i, c)| {
                let k = self.offsets[x].iter().rposition(|&o| o <= *i).expect("offsets start at zero");
                (2 * k, lf.basis_word(2 * k, i - self.offsets[x][k]), c.clone())
            })
            .collect()
    }

    /// `tau_A`: projection to degree zero.
    pub fn tau(&self) -> UnitMap {
        (0..self.offsets.len()).map(|x| Matrix::identity(self.algebra.dim(x)).block(0, 0, self.base.dim(x), self.algebra.dim(x))).collect()
    }

    /// `sigma_A`: inclusion of degree zero.
    pub fn sigma(&self) -> UnitMap {
        (0..self.offsets.len()).map(|x| Matrix::identity(self.algebra.dim(x)).block(0, 0, self.algebra.dim(x), self.base.dim(x))).collect()
    }

    /// Fedosov product in the carrier at `x`.
    pub fn fedosov_mul(&self, x: usize, u: &SparseVec, v: &SparseVec) -> SparseVec {
        self.algebra.mul_vec(x, u, v)
    }
}

/// Builds the level `n` truncation; the result is validated as a G-algebra.
pub fn truncated_tensor_algebra(a: &GAlgebra, n: usize) -> Result<TruncatedTA> {
    if n == 0 {
        return Err(Error::Invalid("truncation level must be positive".into()));
    }
    let g = a.groupoid().clone();
    let top = 2 * (n - 1);
    let forms: &Vec<LoopForms> = &(0..g.n_units()).map(|x| fiber_forms(a, x, top + 2)).collect();
    let offsets: Vec<Vec<usize>> = forms
        .iter()
        .map(|lf| {
            (0..n)
                .scan(0, |acc, k| {
                    let o = *acc;
                    *acc += lf.dim(2 * k);
                    Some(o)
                })
                .collect()
        })
        .collect();
    let dims: Vec<usize> = forms.iter().map(|lf| (0..n).map(|k| lf.dim(2 * k)).sum()).collect();
    // basis of the carrier at x as (degree, word)
    let basis = &|x: usize| -> Vec<(usize, usize)> {
        (0..n).flat_map(|k| (0..forms[x].dim(2 * k)).map(move |i| (2 * k, forms[x].basis_word(2 * k, i)))).collect()
    };
    let coord = |x: usize, deg: usize, w: usize| offsets[x][deg / 2] + forms[x].word_coord(deg, w);
    let mul = (0..g.n_units())
        .map(|x| {
            let lf = &forms[x];
            let b = basis(x);
            b.par_iter()
                .flat_map_iter(|&(p, w)| {
                    b.iter()
                        .map(|&(q, u)| {
                            let mut terms = Vec::new();
                            if p + q <= top {
                                for (k, c) in lf.mul_words(w, p, u, q).0 {
                                    terms.push((coord(x, p + q, k), c));
                                }
                            }
                            if p + q + 2 <= top {
                                if let (Some(dw), Some(du)) = (lf.d_word(w, p), lf.d_word(u, q)) {
                                    for (k, c) in lf.mul_words(dw, p + 1, du, q + 1).0 {
                                        terms.push((coord(x, p + q + 2, k), -c));
                                    }
                                }
                            }
                            SparseVec::from_terms(terms)
                        })
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let rho = (0..g.n_arrows())
        .map(|arrow| {
            let (s, t) = (g.src(arrow), g.tgt(arrow));
            let mut m = Matrix::zeros(dims[t], dims[s]);
            for (j, (deg, w)) in basis(s).into_iter().enumerate() {
                for (k, c) in transport_form(a, arrow, &SparseVec::unit(w), deg).0 {
                    m[(coord(t, deg, k), j)] = c;
                }
            }
            m
        })
        .collect();
    let algebra = GAlgebra::new(GModule { groupoid: g, dims, rho }, mul)?;
    Ok(TruncatedTA { base: a.clone(), level: n, algebra, offsets })
}

/// `T f`: the map of truncated tensor algebras applying `f` to every entry of every form.
pub fn truncated_map(src: &TruncatedTA, tgt: &TruncatedTA, f: &UnitMap) -> UnitMap {
    (0..src.offsets.len())
        .map(|x| {
            let (ds, dt) = (f[x].cols(), f[x].rows());
            let cols: Vec<SparseVec> = (0..ds).map(|k| col_sparse(&f[x], k)).collect();
            let mut m = Matrix::zeros(tgt.algebra.dim(x), src.algebra.dim(x));
            for j in 0..src.algebra.dim(x) {
                for (deg, w, c) in src.split(x, &SparseVec::unit(j)) {
                    let img = tgt.embed(x, deg, &SparseVec(LoopForms::map_word(w, deg, ds, dt, &cols).iter().map(|(u, e)| (*u, e * &c)).collect()));
                    for (i, e) in img.iter() {
                        m[(*i, j)] += e;
                    }
                }
            }
            m
        })
        .collect()
}

/// `omega_l(a, b) = l(ab) - l(a) l(b)` on basis pairs.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub target: GAlgebra,
    pub source_dims: Vec<usize>,
    /// `values[x][i * dim A_x + j]`.
    pub values: Vec<Vec<SparseVec>>,
}

/// Curvature of an equivariant linear map `l: A -> B`.
pub fn curvature(a: &GAlgebra, b: &GAlgebra, l: &UnitMap) -> Result<Curvature> {
    if !a.module.is_equivariant(&b.module, l) {
        return Err(Error::Invalid("curvature needs an equivariant map".into()));
    }
    let apply = |x: usize, v: &SparseVec| SparseVec::from_dense(&l[x].mul_vec(&v.to_dense(a.dim(x))));
    let values = (0..a.groupoid().n_units())
        .map(|x| {
            let d = a.dim(x);
            let images: Vec<SparseVec> = (0..d).map(|i| apply(x, &SparseVec::unit(i))).collect();
            (0..d * d)
                .map(|ij| {
                    let (i, j) = (ij / d, ij % d);
                    apply(x, a.mul_basis(x, i, j)).sub(&b.mul_vec(x, &images[i], &images[j]))
                })
                .collect()
        })
        .collect();
    Ok(Curvature { target: b.clone(), source_dims: a.module.dims.clone(), values })
}

/// Spanning set of a subspace together with its echelon form.
struct Span {
    ech: Echelon,
    vecs: Vec<SparseVec>,
}

impl Span {
    fn new(dim: usize) -> Span {
        Span { ech: Echelon::new(dim), vecs: Vec::new() }
    }

    fn insert(&mut self, v: &SparseVec) -> bool {
        let grew = self.ech.insert(v);
        if grew {
            self.vecs.push(v.clone());
        }
        grew
    }
}

impl Curvature {
    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(SparseVec::is_zero)
    }

    /// First `(unit, i, j)` with nonzero curvature.
    pub fn first_nonzero(&self) -> Option<(usize, usize, usize)> {
        self.values.iter().enumerate().find_map(|(x, vals)| {
            let d = self.source_dims[x];
            vals.iter().position(|v| !v.is_zero()).map(|ij| (x, ij / d, ij % d))
        })
    }

    /// Least `k` with `I^k = 0` for the ideal `I` generated by the curvature, or `None` if `I` is not nilpotent.
    pub fn nilpotency(&self) -> Option<usize> {
        let b = &self.target;
        let mut order = 1;
        for (x, vals) in self.values.iter().enumerate() {
            let d = b.dim(x);
            let mut ideal = Span::new(d);
            let mut queue: Vec<SparseVec> = vals.iter().filter(|v| !v.is_zero()).cloned().collect();
            while let Some(v) = queue.pop() {
                if !ideal.insert(&v) {
                    continue;
                }
                for k in 0..d {
                    let e = SparseVec::unit(k);
                    queue.push(b.mul_vec(x, &e, &v));
                    queue.push(b.mul_vec(x, &v, &e));
                }
            }
            let mut power = ideal.vecs.clone();
            let mut k = 1;
            while !power.is_empty() {
                let mut next = Span::new(d);
                for p in &power {
                    for v in &ideal.vecs {
                        next.insert(&b.mul_vec(x, p, v));
                    }
                }
                if next.vecs.len() == power.len() {
                    return None;
                }
                power = next.vecs;
                k += 1;
            }
            order = order.max(k);
        }
        Some(order)
    }
}

/// `[[l]](<a0> da1 ... da2k) = l(a0) omega(a1, a2) ... omega(a2k-1, a2k)`, the algebra map extending `l`.
pub fn lonilcur_extend(ta: &TruncatedTA, b: &GAlgebra, l: &UnitMap) -> Result<UnitMap> {
    let a = &ta.base;
    let curv = curvature(a, b, l)?;
    match curv.nilpotency() {
        Some(k) if k <= ta.level => {}
        _ => return Err(Error::Nilpotency { level: ta.level }),
    }
    let g = a.groupoid();
    Ok((0..g.n_units())
        .map(|x| {
            let (da, db) = (a.dim(x), b.dim(x));
            let lf = fiber_forms(a, x, ta.top_degree() + 2);
            let cols: Vec<Vec<Q>> = (0..ta.algebra.dim(x))
                .map(|i| {
                    let (deg, w, _) = ta.split(x, &SparseVec::unit(i)).remove(0);
                    let (lead, digits) = lf.decode(w, deg);
                    let mut acc: Option<SparseVec> = (lead > 0).then(|| SparseVec::from_dense(&l[x].col(lead - 1)));
                    for pair in digits.chunks(2) {
                        let om = &curv.values[x][pair[0] * da + pair[1]];
                        acc = Some(match acc {
                            None => om.clone(),
                            Some(v) => b.mul_vec(x, &v, om),
                        });
                    }
                    acc.unwrap_or_default().to_dense(db)
                })
                .collect();
            Matrix::from_cols(db, &cols)
        })
        .collect())
}

/// First basis triple `(unit, i, j)` where a per-unit linear map fails to be multiplicative.
pub fn homomorphism_failure(a: &GAlgebra, b: &GAlgebra, f: &UnitMap) -> Option<(usize, usize, usize)> {
    (0..a.groupoid().n_units()).find_map(|x| {
        let d = a.dim(x);
        let img = |v: &SparseVec| SparseVec::from_dense(&f[x].mul_vec(&v.to_dense(d)));
        (0..d * d)
            .find(|&ij| {
                let (i, j) = (ij / d, ij % d);
                img(a.mul_basis(x, i, j)) != b.mul_vec(x, &img(&SparseVec::unit(i)), &img(&SparseVec::unit(j)))
            })
            .map(|ij| (x, ij / d, ij % d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroupoid;

    #[test]
    fn level_one_is_the_algebra() {
        let g = Arc::new(FiniteGroupoid::z2());
        let a = GAlgebra::k_g(g);
        let ta = truncated_tensor_algebra(&a, 1).unwrap();
        assert_eq!(ta.algebra.mul, a.mul);
        assert!(ta.tau()[0].is_identity());
    }

    #[test]
    fn dual_numbers_have_no_connection() {
        let g = Arc::new(FiniteGroupoid::builtin("trivial").unwrap());
        assert!(quasifree_certificate(&GAlgebra::dual_numbers(g)).unwrap().is_none());
    }
}
