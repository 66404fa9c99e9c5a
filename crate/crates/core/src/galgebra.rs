//! G-algebras: function algebras, unitarisation, smoothing algebras, crossed products, AYD modules.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmodule::{GModule, RawModule};
use crate::groupoid::{AdjointGroupoid, FiniteGroupoid};
use crate::linalg::{Matrix, SparseVec};
use crate::q::Q;

/// Column `j` of a matrix as a sparse vector.
pub fn col_sparse(m: &Matrix, j: usize) -> SparseVec {
    SparseVec((0..m.rows()).filter(|&i| !m[(i, j)].is_zero()).map(|i| (i, m[(i, j)].clone())).collect())
}

/// A G-module with a fiberwise associative, equivariant product.
///
/// `mul[x][i * d + j]` is the product of basis vectors `i` and `j` of the fiber at `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GAlgebra {
    pub module: GModule,
    pub mul: Vec<Vec<SparseVec>>,
}

/// File form of an algebra: a module plus structure constants `mul[unit][i][j][k]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawAlgebra {
    #[serde(flatten)]
    pub module: RawModule,
    pub mul: BTreeMap<String, Vec<Vec<Vec<Q>>>>,
}

/// A left G-space: points anchored at units with an action table.
#[derive(Clone, Debug)]
pub struct GSpace {
    pub groupoid: Arc<FiniteGroupoid>,
    pub points: Vec<String>,
    pub anchor: Vec<usize>,
    /// `action[a][p]` is `a · p` for `anchor(p) = s(a)`.
    pub action: Vec<BTreeMap<usize, usize>>,
}

/// File form of a G-space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawSpace {
    pub points: Vec<String>,
    pub anchor: BTreeMap<String, String>,
    pub action: Vec<[String; 3]>,
}

impl GSpace {
    /// Checks totality, anchoring, unit neutrality and compatibility with products.
    pub fn validate(&self) -> Result<()> {
        let g = &*self.groupoid;
        let bad = |s: String| Err(Error::Space(s));
        for a in 0..g.n_arrows() {
            for p in 0..self.points.len() {
                if self.anchor[p] != g.src(a) {
                    continue;
                }
                let Some(&q) = self.action[a].get(&p) else {
                    return bad(format!("action of `{}` on `{}` undefined", g.arrow_id(a), self.points[p]));
                };
                if self.anchor[q] != g.tgt(a) {
                    return bad(format!("`{}` · `{}` has the wrong anchor", g.arrow_id(a), self.points[p]));
                }
                if g.is_unit_arrow(a) && q != p {
                    return bad(format!("unit `{}` moves `{}`", g.arrow_id(a), self.points[p]));
                }
            }
        }
        for a in 0..g.n_arrows() {
            for b in 0..g.n_arrows() {
                let Some(ab) = g.mul(a, b) else { continue };
                for (&p, &q) in &self.action[b] {
                    if self.action[a].get(&q) != self.action[ab].get(&p) {
                        return bad(format!(
                            "action not compatible with ({}, {}) at `{}`",
                            g.arrow_id(a),
                            g.arrow_id(b),
                            self.points[p]
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_raw(g: Arc<FiniteGroupoid>, raw: &RawSpace) -> Result<GSpace> {
        let pos: BTreeMap<&str, usize> = raw.points.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let pt = |s: &str| pos.get(s).copied().ok_or_else(|| Error::Space(format!("unknown point `{s}`")));
        let mut anchor = vec![usize::MAX; raw.points.len()];
        for (p, u) in &raw.anchor {
            anchor[pt(p)?] = g.unit_index(u).ok_or_else(|| Error::Space(format!("unknown unit `{u}`")))?;
        }
        if let Some(p) = anchor.iter().position(|&a| a == usize::MAX) {
            return Err(Error::Space(format!("point `{}` has no anchor", raw.points[p])));
        }
        let mut action = vec![BTreeMap::new(); g.n_arrows()];
        for p in 0..raw.points.len() {
            action[g.unit_arrow(anchor[p])].insert(p, p);
        }
        for [a, p, q] in &raw.action {
            let a = g.arrow_index(a).ok_or_else(|| Error::Space(format!("unknown arrow `{a}`")))?;
            action[a].insert(pt(p)?, pt(q)?);
        }
        let s = GSpace { groupoid: g, points: raw.points.clone(), anchor, action };
        s.validate()?;
        Ok(s)
    }

    /// `G^(0)` with the translation action.
    pub fn units(g: Arc<FiniteGroupoid>) -> GSpace {
        let action = (0..g.n_arrows()).map(|a| BTreeMap::from([(g.src(a), g.tgt(a))])).collect();
        GSpace { points: g.units().to_vec(), anchor: (0..g.n_units()).collect(), action, groupoid: g }
    }

    /// `G_ad` with the adjoint action; points are loops in arrow order.
    pub fn adjoint(g: Arc<FiniteGroupoid>) -> GSpace {
        let loops = g.loops();
        let idx: BTreeMap<usize, usize> = loops.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let action = (0..g.n_arrows())
            .map(|a| {
                loops.iter().filter(|&&b| g.src(b) == g.src(a)).map(|&b| (idx[&b], idx[&g.conj(a, b)])).collect()
            })
            .collect();
        GSpace {
            points: loops.iter().map(|&l| g.arrow_id(l).to_string()).collect(),
            anchor: loops.iter().map(|&l| g.src(l)).collect(),
            action,
            groupoid: g,
        }
    }
}

impl GAlgebra {
    /// Builds and validates an algebra.
    pub fn new(module: GModule, mul: Vec<Vec<SparseVec>>) -> Result<GAlgebra> {
        let a = GAlgebra { module, mul };
        a.validate()?;
        Ok(a)
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.module.groupoid
    }

    pub fn dim(&self, x: usize) -> usize {
        self.module.dims[x]
    }

    /// Product of basis vectors `i`, `j` in the fiber at `x`.
    pub fn mul_basis(&self, x: usize, i: usize, j: usize) -> &SparseVec {
        &self.mul[x][i * self.dim(x) + j]
    }

    /// Product of two vectors in the fiber at `x`.
    pub fn mul_vec(&self, x: usize, a: &SparseVec, b: &SparseVec) -> SparseVec {
        let mut terms = Vec::new();
        for (i, c) in a.iter() {
            for (j, e) in b.iter() {
                let ce = c * e;
                for (k, f) in self.mul_basis(x, *i, *j).iter() {
                    terms.push((*k, &ce * f));
                }
            }
        }
        SparseVec::from_terms(terms)
    }

    /// Image of a fiber vector under `rho(a)`.
    pub fn act(&self, a: usize, v: &SparseVec) -> SparseVec {
        v.map(|i| col_sparse(&self.module.rho[a], i))
    }

    /// Checks the module axioms, associativity and equivariance.
    pub fn validate(&self) -> Result<()> {
        self.module.validate()?;
        let g = self.groupoid().clone();
        for x in 0..g.n_units() {
            let d = self.dim(x);
            if self.mul[x].len() != d * d {
                return Err(Error::Algebra(format!("product table at `{}` has wrong size", g.units()[x])));
            }
            for i in 0..d {
                for j in 0..d {
                    let ij = self.mul_basis(x, i, j).clone();
                    for k in 0..d {
                        let l = self.mul_vec(x, &ij, &SparseVec::unit(k));
                        let r = self.mul_vec(x, &SparseVec::unit(i), self.mul_basis(x, j, k));
                        if l != r {
                            return Err(Error::Algebra(format!("associativity fails at `{}` on ({i}, {j}, {k})", g.units()[x])));
                        }
                    }
                }
            }
        }
        for a in 0..g.n_arrows() {
            let (s, r) = (g.src(a), g.tgt(a));
            let cols: Vec<SparseVec> = (0..self.dim(s)).map(|i| col_sparse(&self.module.rho[a], i)).collect();
            for i in 0..self.dim(s) {
                for j in 0..self.dim(s) {
                    if self.act(a, self.mul_basis(s, i, j)) != self.mul_vec(r, &cols[i], &cols[j]) {
                        return Err(Error::Algebra(format!("product not equivariant for arrow `{}`", g.arrow_id(a))));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_raw(g: Arc<FiniteGroupoid>, raw: &RawAlgebra) -> Result<GAlgebra> {
        let module = GModule::from_raw(g.clone(), &raw.module)?;
        let mut mul: Vec<Vec<SparseVec>> = module.dims.iter().map(|&d| vec![SparseVec::zero(); d * d]).collect();
        for (u, t) in &raw.mul {
            let x = g.unit_index(u).ok_or_else(|| Error::Algebra(format!("unknown unit `{u}`")))?;
            let d = module.dims[x];
            if t.len() != d || t.iter().any(|r| r.len() != d || r.iter().any(|c| c.len() != d)) {
                return Err(Error::Algebra(format!("product table at `{u}` has wrong shape")));
            }
            for i in 0..d {
                for j in 0..d {
                    mul[x][i * d + j] = SparseVec::from_dense(&t[i][j]);
                }
            }
        }
        GAlgebra::new(module, mul)
    }

    pub fn from_json(g: Arc<FiniteGroupoid>, s: &str) -> Result<GAlgebra> {
        GAlgebra::from_raw(g, &serde_json::from_str(s)?)
    }

    pub fn to_raw(&self) -> RawAlgebra {
        let g = self.groupoid();
        RawAlgebra {
            module: self.module.to_raw(),
            mul: (0..g.n_units())
                .map(|x| {
                    let d = self.dim(x);
                    let t = (0..d).map(|i| (0..d).map(|j| self.mul_basis(x, i, j).to_dense(d)).collect()).collect();
                    (g.units()[x].clone(), t)
                })
                .collect(),
        }
    }

    /// `C_c(G^(0))`.
    pub fn trivial(g: Arc<FiniteGroupoid>) -> GAlgebra {
        let n = g.n_units();
        GAlgebra { module: GModule::trivial(g), mul: vec![vec![SparseVec::unit(0)]; n] }
    }

    pub fn zero(g: Arc<FiniteGroupoid>) -> GAlgebra {
        let n = g.n_units();
        GAlgebra { module: GModule::zero(g), mul: vec![Vec::new(); n] }
    }

    /// `C_c(X)` with pointwise product; the fiber at `x` is spanned by the points anchored at `x`.
    pub fn function_algebra(space: &GSpace) -> GAlgebra {
        let g = space.groupoid.clone();
        let fibers: Vec<Vec<usize>> =
            (0..g.n_units()).map(|x| (0..space.points.len()).filter(|&p| space.anchor[p] == x).collect()).collect();
        let pos = |x: usize, p: usize| fibers[x].iter().position(|&q| q == p).unwrap();
        let rho = (0..g.n_arrows())
            .map(|a| {
                let (s, r) = (g.src(a), g.tgt(a));
                let mut m = Matrix::zeros(fibers[r].len(), fibers[s].len());
                for (j, &p) in fibers[s].iter().enumerate() {
                    m[(pos(r, space.action[a][&p]), j)] = Q::one();
                }
                m
            })
            .collect();
        let mul = fibers
            .iter()
            .map(|f| {
                let d = f.len();
                (0..d * d).map(|ij| if ij / d == ij % d { SparseVec::unit(ij / d) } else { SparseVec::zero() }).collect()
            })
            .collect();
        GAlgebra { module: GModule { dims: fibers.iter().map(Vec::len).collect(), rho, groupoid: g }, mul }
    }

    /// `O_G`: functions on loops with the adjoint action.
    pub fn o_g(g: Arc<FiniteGroupoid>) -> GAlgebra {
        GAlgebra::function_algebra(&GSpace::adjoint(g))
    }

    /// `K_G = K(D(G))` with the regular pairing.
    pub fn k_g(g: Arc<FiniteGroupoid>) -> GAlgebra {
        smoothing_algebra(&Pairing::regular(g))
    }

    /// Fiberwise algebra with trivial action, the same structure constants at every unit.
    pub fn constant(g: Arc<FiniteGroupoid>, d: usize, table: Vec<SparseVec>) -> GAlgebra {
        let n = g.n_units();
        let rho = vec![Matrix::identity(d); g.n_arrows()];
        GAlgebra { module: GModule { groupoid: g, dims: vec![d; n], rho }, mul: vec![table; n] }
    }

    /// Dual numbers `Q[t]/(t^2)` on basis `(1, t)` with trivial action.
    pub fn dual_numbers(g: Arc<FiniteGroupoid>) -> GAlgebra {
        let table = vec![SparseVec::unit(0), SparseVec::unit(1), SparseVec::unit(1), SparseVec::zero()];
        GAlgebra::constant(g, 2, table)
    }

    /// `M_n(Q)`, or its upper-triangular subalgebra, with trivial action; basis `e_ij` in row-major order.
    pub fn matrices(g: Arc<FiniteGroupoid>, n: usize, upper: bool) -> GAlgebra {
        let units: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| !upper || i <= j).collect();
        let d = units.len();
        let pos = |p: (usize, usize)| units.iter().position(|&q| q == p).unwrap();
        let mut table = vec![SparseVec::zero(); d * d];
        for (a, &(i, j)) in units.iter().enumerate() {
            for (b, &(k, l)) in units.iter().enumerate() {
                if j == k {
                    table[a * d + b] = SparseVec::unit(pos((i, l)));
                }
            }
        }
        GAlgebra::constant(g, d, table)
    }

    /// `Q^k` with trivial action.
    pub fn diagonal(g: Arc<FiniteGroupoid>, k: usize) -> GAlgebra {
        let table = (0..k * k).map(|ij| if ij / k == ij % k { SparseVec::unit(ij / k) } else { SparseVec::zero() }).collect();
        GAlgebra::constant(g, k, table)
    }

    /// Algebra of the isotropy bundle: the fiber at `x` is `Q[G^x_x]`, arrows act by conjugation.
    pub fn group_algebra(g: Arc<FiniteGroupoid>) -> GAlgebra {
        let fibers: Vec<Vec<usize>> = (0..g.n_units()).map(|x| g.isotropy(x)).collect();
        let pos = |x: usize, c: usize| fibers[x].iter().position(|&d| d == c).unwrap();
        let rho = (0..g.n_arrows())
            .map(|a| {
                let (s, r) = (g.src(a), g.tgt(a));
                let mut m = Matrix::zeros(fibers[r].len(), fibers[s].len());
                for (j, &c) in fibers[s].iter().enumerate() {
                    m[(pos(r, g.conj(a, c)), j)] = Q::one();
                }
                m
            })
            .collect();
        let mul = (0..g.n_units())
            .map(|x| {
                let f = &fibers[x];
                f.iter().flat_map(|&a| f.iter().map(move |&b| (a, b))).map(|(a, b)| SparseVec::unit(pos(x, g.compose(a, b)))).collect()
            })
            .collect();
        GAlgebra { module: GModule { dims: fibers.iter().map(Vec::len).collect(), rho, groupoid: g }, mul }
    }

    /// `A⁺ = A ⊕ C_c(G^(0))`; the adjoined unit is the last basis vector of each fiber.
    pub fn unitarise(&self) -> GAlgebra {
        let g = self.groupoid().clone();
        let module = self.module.direct_sum(&GModule::trivial(g.clone()));
        let mul = (0..g.n_units())
            .map(|x| {
                let d = self.dim(x);
                let e = d + 1;
                let mut t = vec![SparseVec::zero(); e * e];
                for i in 0..d {
                    for j in 0..d {
                        t[i * e + j] = self.mul_basis(x, i, j).clone();
                    }
                    t[i * e + d] = SparseVec::unit(i);
                    t[d * e + i] = SparseVec::unit(i);
                }
                t[d * e + d] = SparseVec::unit(d);
                t
            })
            .collect();
        GAlgebra { module, mul }
    }

    /// Diagonal tensor product `(a ⊗ b)(a' ⊗ b') = aa' ⊗ bb'`; basis index `i * dim B + j`.
    pub fn tensor(&self, o: &GAlgebra) -> GAlgebra {
        let g = self.groupoid().clone();
        let module = self.module.tensor(&o.module);
        let mul = (0..g.n_units())
            .map(|x| {
                let (p, q) = (self.dim(x), o.dim(x));
                let d = p * q;
                let mut t = vec![SparseVec::zero(); d * d];
                for i in 0..d {
                    for j in 0..d {
                        let (a, b) = (self.mul_basis(x, i / q, j / q), o.mul_basis(x, i % q, j % q));
                        let mut terms = Vec::new();
                        for (k, c) in a.iter() {
                            for (l, e) in b.iter() {
                                terms.push((k * q + l, c * e));
                            }
                        }
                        t[i * d + j] = SparseVec::from_terms(terms);
                    }
                }
                t
            })
            .collect();
        GAlgebra { module, mul }
    }

    /// Direct product `A × B`, fiberwise; `B`'s basis follows `A`'s.
    pub fn product(&self, o: &GAlgebra) -> GAlgebra {
        let g = self.groupoid().clone();
        let module = self.module.direct_sum(&o.module);
        let mul = (0..g.n_units())
            .map(|x| {
                let (p, q) = (self.dim(x), o.dim(x));
                let d = p + q;
                let mut t = vec![SparseVec::zero(); d * d];
                for i in 0..p {
                    for j in 0..p {
                        t[i * d + j] = self.mul_basis(x, i, j).clone();
                    }
                }
                for i in 0..q {
                    for j in 0..q {
                        t[(p + i) * d + p + j] =
                            SparseVec(o.mul_basis(x, i, j).iter().map(|(k, c)| (k + p, c.clone())).collect());
                    }
                }
                t
            })
            .collect();
        GAlgebra { module, mul }
    }

    /// Restriction to the full subgroupoid on the given units.
    pub fn restrict(&self, units: &[usize]) -> GAlgebra {
        let g = self.groupoid();
        let sub = Arc::new(g.restrict(units));
        let unit_map: Vec<usize> = sub.units().iter().map(|u| g.unit_index(u).unwrap()).collect();
        let rho = (0..sub.n_arrows()).map(|a| self.module.rho[g.arrow_index(sub.arrow_id(a)).unwrap()].clone()).collect();
        GAlgebra {
            module: GModule { dims: unit_map.iter().map(|&x| self.dim(x)).collect(), rho, groupoid: sub },
            mul: unit_map.iter().map(|&x| self.mul[x].clone()).collect(),
        }
    }

    /// Two-sided unit of the fiber at `x`, if one exists.
    pub fn unit_element(&self, x: usize) -> Option<SparseVec> {
        let d = self.dim(x);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for a in 0..d {
            for side in 0..2 {
                for k in 0..d {
                    let row: Vec<Q> = (0..d)
                        .map(|e| if side == 0 { self.mul_basis(x, e, a).get(k) } else { self.mul_basis(x, a, e).get(k) })
                        .collect();
                    rows.push(row);
                    rhs.push(if k == a { Q::one() } else { Q::zero() });
                }
            }
        }
        if d == 0 {
            return Some(SparseVec::zero());
        }
        Matrix::from_rows(rows).solve(&rhs).map(|v| SparseVec::from_dense(&v))
    }

    /// Matrix of left multiplication by a fiber vector.
    pub fn left_matrix(&self, x: usize, a: &SparseVec) -> Matrix {
        let d = self.dim(x);
        let cols: Vec<Vec<Q>> = (0..d).map(|j| self.mul_vec(x, a, &SparseVec::unit(j)).to_dense(d)).collect();
        Matrix::from_cols(d, &cols)
    }
}

/// An equivariant bilinear pairing `h_x` on the fibers of a module, stored as Gram matrices.
#[derive(Clone, Debug)]
pub struct Pairing {
    pub module: GModule,
    pub gram: Vec<Matrix>,
}

impl Pairing {
    /// `h(rho(a) e, rho(a) f) = h(e, f)` for every arrow.
    pub fn is_equivariant(&self) -> bool {
        let g = &*self.module.groupoid;
        (0..g.n_arrows()).all(|a| {
            let r = &self.module.rho[a];
            r.transpose().mul(&self.gram[g.tgt(a)]).mul(r) == self.gram[g.src(a)]
        })
    }

    /// The regular pairing on `D(G)`: `delta_c` orthonormal.
    pub fn regular(g: Arc<FiniteGroupoid>) -> Pairing {
        let module = GModule::regular(g);
        let gram = module.dims.iter().map(|&d| Matrix::identity(d)).collect();
        Pairing { module, gram }
    }

    /// Standard pairing on a trivially acted module.
    pub fn standard(module: GModule) -> Pairing {
        let gram = module.dims.iter().map(|&d| Matrix::identity(d)).collect();
        Pairing { module, gram }
    }

    pub fn h(&self, x: usize, e: &[Q], f: &[Q]) -> Q {
        let gf = self.gram[x].mul_vec(f);
        e.iter().zip(&gf).map(|(a, b)| a * b).sum()
    }
}

/// `K(E) = E ⊗ E` with `(e1 ⊗ f1)(e2 ⊗ f2) = h(f1, e2) e1 ⊗ f2`; basis `(i, j)` at index `i * k + j`.
pub fn smoothing_algebra(p: &Pairing) -> GAlgebra {
    let module = p.module.tensor(&p.module);
    let mul = (0..module.groupoid.n_units())
        .map(|x| {
            let k = p.module.dims[x];
            let d = k * k;
            let mut t = vec![SparseVec::zero(); d * d];
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        for m in 0..k {
                            let c = &p.gram[x][(j, l)];
                            if !c.is_zero() {
                                t[(i * k + j) * d + l * k + m] = SparseVec(vec![(i * k + m, c.clone())]);
                            }
                        }
                    }
                }
            }
            t
        })
        .collect();
    GAlgebra { module, mul }
}

/// `A ⋊ G` as an algebra over the orbit space; each orbit fiber has basis `a_i ⊗ delta_c`.
#[derive(Clone, Debug)]
pub struct CrossedProduct {
    pub algebra: GAlgebra,
    /// Per orbit, the basis labels `(arrow c, index i of A_{r(c)})`.
    pub basis: Vec<Vec<(usize, usize)>>,
}

/// Crossed product with `(a ⊗ delta_c)(b ⊗ delta_e) = a rho(c)(b) ⊗ delta_{ce}`.
pub fn crossed_product(a: &GAlgebra) -> CrossedProduct {
    let g = a.groupoid().clone();
    let quotient = Arc::new(g.quotient());
    let orbits = g.orbits();
    let mut basis = Vec::new();
    let mut mul = Vec::new();
    for orbit in &orbits {
        let labels: Vec<(usize, usize)> = (0..g.n_arrows())
            .filter(|&c| orbit.units.contains(&g.tgt(c)))
            .flat_map(|c| (0..a.dim(g.tgt(c))).map(move |i| (c, i)))
            .collect();
        let pos: BTreeMap<(usize, usize), usize> = labels.iter().enumerate().map(|(k, &l)| (l, k)).collect();
        let d = labels.len();
        let mut t = vec![SparseVec::zero(); d * d];
        for (p, &(c, i)) in labels.iter().enumerate() {
            for (q, &(e, j)) in labels.iter().enumerate() {
                let Some(ce) = g.mul(c, e) else { continue };
                let moved = a.act(c, &SparseVec::unit(j));
                let prod = a.mul_vec(g.tgt(c), &SparseVec::unit(i), &moved);
                t[p * d + q] = SparseVec::from_terms(prod.iter().map(|(k, v)| (pos[&(ce, *k)], v.clone())).collect());
            }
        }
        mul.push(t);
        basis.push(labels);
    }
    let dims = basis.iter().map(Vec::len).collect::<Vec<_>>();
    let module = GModule {
        rho: (0..quotient.n_arrows()).map(|x| Matrix::identity(dims[x])).collect(),
        dims,
        groupoid: quotient,
    };
    CrossedProduct { algebra: GAlgebra { module, mul }, basis }
}

impl CrossedProduct {
    /// Index of `a_i ⊗ delta_c` in its orbit fiber.
    pub fn index(&self, orbit: usize, c: usize, i: usize) -> usize {
        self.basis[orbit].iter().position(|&l| l == (c, i)).expect("label in orbit")
    }
}

/// `psi(a ⊗ delta_c) = phi(a) pi(c)` from a covariant pair on a space `V`.
///
/// `phi[x][i]` represents basis vector `i` of `A_x`, `pi[c]` the arrow `c`. Covariance
/// `phi(rho(c) a) pi(c) = pi(c) phi(a)` is checked for every arrow and basis vector of `A_{s(c)}`.
pub fn integrate_covariant(
    a: &GAlgebra,
    cp: &CrossedProduct,
    phi: &[Vec<Matrix>],
    pi: &[Matrix],
) -> Result<Vec<Vec<Matrix>>> {
    let g = a.groupoid();
    for c in 0..g.n_arrows() {
        let s = g.src(c);
        for i in 0..a.dim(s) {
            let moved = a.act(c, &SparseVec::unit(i));
            let dim_v = pi[c].rows();
            let mut lhs = Matrix::zeros(dim_v, dim_v);
            for (k, v) in moved.iter() {
                lhs = lhs.add(&phi[g.tgt(c)][*k].scale(v));
            }
            if lhs.mul(&pi[c]) != pi[c].mul(&phi[s][i]) {
                return Err(Error::Covariance { arrow: g.arrow_id(c).to_string(), index: i });
            }
        }
    }
    Ok(cp
        .basis
        .iter()
        .map(|labels| labels.iter().map(|&(c, i)| phi[g.tgt(c)][i].mul(&pi[c])).collect())
        .collect())
}

/// `O_G ⊗ M` as a module over the adjoint action groupoid: fiber `M_x` at each loop based at `x`.
pub fn ayd_from_module(ad: &AdjointGroupoid, m: &GModule) -> GModule {
    let g = &*m.groupoid;
    let h = &ad.groupoid;
    let dims = ad.loops.iter().map(|&l| m.dims[g.src(l)]).collect();
    let rho = (0..h.n_arrows()).map(|j| m.rho[ad.pairs[j].0].clone()).collect();
    GModule { groupoid: Arc::new(h.clone()), dims, rho }
}

/// `A(G) = O_G ⋊ G` as an AYD module: `O_G ⊗ D(G)`.
pub fn a_g(ad: &AdjointGroupoid, g: Arc<FiniteGroupoid>) -> GModule {
    ayd_from_module(ad, &GModule::regular(g))
}

/// Canonical twist `T_b = rho((b^-1, b))` at each loop `b`.
pub fn ayd_canonical_t(ad: &AdjointGroupoid, base: &FiniteGroupoid, n: &GModule) -> Vec<Matrix> {
    ad.loops.iter().map(|&b| n.rho[ad.arrow_of_pair(base.inv(b), b)].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_algebras_validate() {
        for name in ["z2", "pair2", "z2z3", "flip"] {
            let g = Arc::new(FiniteGroupoid::builtin(name).unwrap());
            for a in [GAlgebra::trivial(g.clone()), GAlgebra::k_g(g.clone()), GAlgebra::o_g(g.clone())] {
                a.validate().unwrap();
            }
            GAlgebra::group_algebra(g.clone()).validate().unwrap();
            crossed_product(&GAlgebra::k_g(g)).algebra.validate().unwrap();
        }
    }
}
