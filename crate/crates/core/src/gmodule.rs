//! Steinberg convolution, G-modules in functorial form, and the comodule picture.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::FinFn;
use crate::groupoid::{Bisection, FiniteGroupoid};
use crate::linalg::Matrix;
use crate::q::Q;

/// Convolution `(f*g)(a) = sum_{b in G^{r(a)}} f(b) g(b^-1 a)` of functions on arrows.
pub fn convolve(g: &FiniteGroupoid, f: &FinFn, h: &FinFn) -> FinFn {
    let mut out = vec![Q::zero(); g.n_arrows()];
    for (a, slot) in out.iter_mut().enumerate() {
        for b in g.range_fiber(g.tgt(a)) {
            let (x, y) = (&f.values[b], &h.values[g.compose(g.inv(b), a)]);
            if !x.is_zero() && !y.is_zero() {
                *slot += x * y;
            }
        }
    }
    FinFn::new(g.arrows().iter().map(|a| a.id.clone()).collect(), out)
}

/// Indicator of a set of arrows as an element of the convolution algebra.
pub fn arrow_indicator(g: &FiniteGroupoid, u: &Bisection) -> FinFn {
    FinFn::indicator(g.arrows().iter().map(|a| a.id.clone()).collect(), &u.0.iter().copied().collect::<Vec<_>>())
}

/// A unit-graded vector space with functorial arrow maps `rho(a): M_{s(a)} -> M_{r(a)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GModule {
    pub groupoid: Arc<FiniteGroupoid>,
    pub dims: Vec<usize>,
    pub rho: Vec<Matrix>,
}

/// A family of per-unit linear maps `M_x -> N_x`.
pub type UnitMap = Vec<Matrix>;

/// File form of a module.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawModule {
    pub fibers: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub rho: BTreeMap<String, Vec<Vec<Q>>>,
}

impl GModule {
    /// Builds and validates a module.
    pub fn new(groupoid: Arc<FiniteGroupoid>, dims: Vec<usize>, rho: Vec<Matrix>) -> Result<GModule> {
        let m = GModule { groupoid, dims, rho };
        m.validate()?;
        Ok(m)
    }

    /// Checks shapes, unit neutrality and functoriality.
    pub fn validate(&self) -> Result<()> {
        let g = &*self.groupoid;
        let bad = |s: String| Err(Error::Module(s));
        if self.dims.len() != g.n_units() || self.rho.len() != g.n_arrows() {
            return bad("fiber or arrow count mismatch".into());
        }
        for a in 0..g.n_arrows() {
            let m = &self.rho[a];
            if m.rows() != self.dims[g.tgt(a)] || m.cols() != self.dims[g.src(a)] {
                return bad(format!("rho({}) has wrong shape", g.arrow_id(a)));
            }
            if g.is_unit_arrow(a) && !m.is_identity() && m.rows() > 0 {
                return bad(format!("rho({}) is not the identity", g.arrow_id(a)));
            }
        }
        for a in 0..g.n_arrows() {
            for b in 0..g.n_arrows() {
                if let Some(p) = g.mul(a, b) {
                    if self.rho[a].mul(&self.rho[b]) != self.rho[p] {
                        return bad(format!("rho({}) rho({}) != rho({})", g.arrow_id(a), g.arrow_id(b), g.arrow_id(p)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_raw(g: Arc<FiniteGroupoid>, raw: &RawModule) -> Result<GModule> {
        let mut dims = vec![0; g.n_units()];
        for (u, names) in &raw.fibers {
            let x = g.unit_index(u).ok_or_else(|| Error::Module(format!("unknown unit `{u}`")))?;
            dims[x] = names.len();
        }
        for id in raw.rho.keys() {
            if g.arrow_index(id).is_none() {
                return Err(Error::Module(format!("unknown arrow `{id}`")));
            }
        }
        let mut rho = Vec::with_capacity(g.n_arrows());
        for a in 0..g.n_arrows() {
            let (r, c) = (dims[g.tgt(a)], dims[g.src(a)]);
            let m = match raw.rho.get(g.arrow_id(a)) {
                Some(rows) => {
                    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
                        return Err(Error::Module(format!("rho({}) has wrong shape", g.arrow_id(a))));
                    }
                    let mut m = Matrix::zeros(r, c);
                    for (i, row) in rows.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            m[(i, j)] = v.clone();
                        }
                    }
                    m
                }
                None if g.is_unit_arrow(a) => Matrix::identity(r),
                None => return Err(Error::Module(format!("missing rho for arrow `{}`", g.arrow_id(a)))),
            };
            rho.push(m);
        }
        GModule::new(g, dims, rho)
    }

    pub fn from_json(g: Arc<FiniteGroupoid>, s: &str) -> Result<GModule> {
        GModule::from_raw(g, &serde_json::from_str(s)?)
    }

    pub fn to_raw(&self) -> RawModule {
        let g = &*self.groupoid;
        RawModule {
            fibers: (0..g.n_units())
                .map(|x| (g.units()[x].clone(), (0..self.dims[x]).map(|i| format!("{}:{i}", g.units()[x])).collect()))
                .collect(),
            rho: (0..g.n_arrows())
                .map(|a| {
                    let m = &self.rho[a];
                    (g.arrow_id(a).to_string(), (0..m.rows()).map(|r| m.row(r).to_vec()).collect())
                })
                .collect(),
        }
    }

    /// The unit object `C_c(G^(0))`: one dimension per unit, trivial action.
    pub fn trivial(g: Arc<FiniteGroupoid>) -> GModule {
        let dims = vec![1; g.n_units()];
        let rho = vec![Matrix::identity(1); g.n_arrows()];
        GModule { groupoid: g, dims, rho }
    }

    /// The zero module.
    pub fn zero(g: Arc<FiniteGroupoid>) -> GModule {
        let dims = vec![0; g.n_units()];
        let rho = vec![Matrix::zeros(0, 0); g.n_arrows()];
        GModule { groupoid: g, dims, rho }
    }

    /// `D(G)` with left translation; the fiber at `x` has basis `delta_c` for `r(c) = x` in arrow order.
    pub fn regular(g: Arc<FiniteGroupoid>) -> GModule {
        let fibers: Vec<Vec<usize>> = (0..g.n_units()).map(|x| g.range_fiber(x)).collect();
        let pos = |x: usize, c: usize| fibers[x].iter().position(|&d| d == c).unwrap();
        let rho = (0..g.n_arrows())
            .map(|a| {
                let (s, r) = (g.src(a), g.tgt(a));
                let mut m = Matrix::zeros(fibers[r].len(), fibers[s].len());
                for (j, &c) in fibers[s].iter().enumerate() {
                    m[(pos(r, g.compose(a, c)), j)] = Q::one();
                }
                m
            })
            .collect();
        GModule { dims: fibers.iter().map(Vec::len).collect(), rho, groupoid: g }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Offset of each fiber in the concatenated basis.
    pub fn offsets(&self) -> Vec<usize> {
        let mut o = Vec::with_capacity(self.dims.len());
        let mut acc = 0;
        for &d in &self.dims {
            o.push(acc);
            acc += d;
        }
        o
    }

    /// Action of `chi_U` on a unit-graded vector.
    pub fn act(&self, u: &Bisection, v: &[Vec<Q>]) -> Vec<Vec<Q>> {
        let g = &*self.groupoid;
        let mut out: Vec<Vec<Q>> = self.dims.iter().map(|&d| vec![Q::zero(); d]).collect();
        for &a in &u.0 {
            let w = self.rho[a].mul_vec(&v[g.src(a)]);
            for (o, x) in out[g.tgt(a)].iter_mut().zip(w) {
                *o += x;
            }
        }
        out
    }

    /// Diagonal tensor product `(M ⊗ N)_x = M_x ⊗ N_x`.
    pub fn tensor(&self, o: &GModule) -> GModule {
        assert!(Arc::ptr_eq(&self.groupoid, &o.groupoid) || *self.groupoid == *o.groupoid);
        GModule {
            groupoid: self.groupoid.clone(),
            dims: self.dims.iter().zip(&o.dims).map(|(a, b)| a * b).collect(),
            rho: self.rho.iter().zip(&o.rho).map(|(a, b)| a.kron(b)).collect(),
        }
    }

    /// Direct sum, fiberwise `M_x ⊕ N_x`.
    pub fn direct_sum(&self, o: &GModule) -> GModule {
        GModule {
            groupoid: self.groupoid.clone(),
            dims: self.dims.iter().zip(&o.dims).map(|(a, b)| a + b).collect(),
            rho: self.rho.iter().zip(&o.rho).map(|(a, b)| Matrix::direct_sum(&[a.clone(), b.clone()])).collect(),
        }
    }

    /// Whether a unit map commutes with every arrow.
    pub fn is_equivariant(&self, n: &GModule, phi: &UnitMap) -> bool {
        let g = &*self.groupoid;
        (0..g.n_arrows()).all(|a| phi[g.tgt(a)].mul(&self.rho[a]) == n.rho[a].mul(&phi[g.src(a)]))
    }

    /// A seeded random module: per orbit, trivial ⊕ regular isotropy representation, randomly conjugated.
    pub fn random<R: Rng>(g: Arc<FiniteGroupoid>, rng: &mut R) -> GModule {
        let mut dims = vec![0; g.n_units()];
        let mut rho = vec![Matrix::zeros(0, 0); g.n_arrows()];
        for orbit in g.orbits() {
            let iso = &orbit.isotropy;
            let k = iso.len() + 1;
            let pi = |h: usize| {
                let mut m = Matrix::zeros(k, k);
                m[(0, 0)] = Q::one();
                for (j, &c) in iso.iter().enumerate() {
                    let i = iso.iter().position(|&d| d == g.compose(h, c)).unwrap();
                    m[(i + 1, j + 1)] = Q::one();
                }
                m
            };
            let tau: BTreeMap<usize, usize> =
                orbit.units.iter().map(|&y| (y, g.arrow_between(orbit.rep, y).unwrap())).collect();
            let s: BTreeMap<usize, (Matrix, Matrix)> = orbit
                .units
                .iter()
                .map(|&y| {
                    let m = random_invertible(k, rng);
                    let inv = m.inverse().unwrap();
                    (y, (m, inv))
                })
                .collect();
            for &y in &orbit.units {
                dims[y] = k;
            }
            for (a, slot) in rho.iter_mut().enumerate() {
                let (y, z) = (g.src(a), g.tgt(a));
                if !orbit.units.contains(&y) {
                    continue;
                }
                let h = g.compose(g.compose(g.inv(tau[&z]), a), tau[&y]);
                *slot = s[&z].0.mul(&pi(h)).mul(&s[&y].1);
            }
        }
        GModule { groupoid: g, dims, rho }
    }
}

/// Random invertible integer matrix with small entries.
pub fn random_invertible<R: Rng>(k: usize, rng: &mut R) -> Matrix {
    loop {
        let rows = (0..k).map(|_| (0..k).map(|_| Q::int(rng.gen_range(-2..=2))).collect()).collect();
        let m = Matrix::from_rows(rows);
        if k == 0 || m.rank() == k {
            return m;
        }
    }
}

/// Random matrix with small integer entries.
pub fn random_matrix<R: Rng>(r: usize, c: usize, rng: &mut R) -> Matrix {
    Matrix::from_rows((0..r).map(|_| (0..c).map(|_| Q::int(rng.gen_range(-3..=3))).collect()).collect())
}

/// Linear system `phi A - B phi = 0` in the row-major entries of an `n x m` matrix `phi`.
fn commutation_rows(a: &Matrix, b: &Matrix, out: &mut Vec<Vec<Q>>) {
    let (n, m) = (b.rows(), a.rows());
    for i in 0..n {
        for j in 0..m {
            let mut row = vec![Q::zero(); n * m];
            for k in 0..m {
                if !a[(k, j)].is_zero() {
                    row[i * m + k] += &a[(k, j)];
                }
            }
            for k in 0..n {
                if !b[(i, k)].is_zero() {
                    row[k * m + j] -= &b[(i, k)];
                }
            }
            if row.iter().any(|x| !x.is_zero()) {
                out.push(row);
            }
        }
    }
}

/// Basis of `Hom_{D(G)}(M, N)`.
///
/// Each map is determined on orbit representatives by an isotropy-commuting matrix and
/// transported along the least arrows; basis vectors have first nonzero coordinate 1.
pub fn equivariant_homs(mm: &GModule, nn: &GModule) -> Vec<UnitMap> {
    let g = &*mm.groupoid;
    let mut basis = Vec::new();
    for orbit in g.orbits() {
        let x = orbit.rep;
        let (n, m) = (nn.dims[x], mm.dims[x]);
        if n * m == 0 {
            continue;
        }
        let mut rows = Vec::new();
        for &h in &orbit.isotropy {
            commutation_rows(&mm.rho[h], &nn.rho[h], &mut rows);
        }
        let kernel = if rows.is_empty() {
            standard_basis(n * m)
        } else {
            Matrix::from_rows(rows).kernel()
        };
        for v in kernel {
            let phi_x = Matrix::from_rows((0..n).map(|i| v[i * m..(i + 1) * m].to_vec()).collect());
            let mut phi: UnitMap = (0..g.n_units()).map(|y| Matrix::zeros(nn.dims[y], mm.dims[y])).collect();
            for &y in &orbit.units {
                let t = g.arrow_between(x, y).unwrap();
                phi[y] = nn.rho[t].mul(&phi_x).mul(&mm.rho[g.inv(t)]);
            }
            basis.push(phi);
        }
    }
    basis
}

/// Standard basis of `Q^n`.
pub fn standard_basis(n: usize) -> Vec<Vec<Q>> {
    (0..n)
        .map(|i| {
            let mut v = vec![Q::zero(); n];
            v[i] = Q::one();
            v
        })
        .collect()
}

/// Comodule form: `T(delta_a ⊗ m) = delta_a ⊗ rho(a^-1) m` on `C_c(G) ⊗_r M -> C_c(G) ⊗_s M`.
///
/// The domain basis is `(a, i)` with `i < dim M_{r(a)}`, the codomain `(a, i)` with `i < dim M_{s(a)}`,
/// both ordered by arrow then index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComoduleMap {
    pub groupoid: Arc<FiniteGroupoid>,
    pub dims: Vec<usize>,
    pub matrix: Matrix,
}

impl ComoduleMap {
    fn offsets(&self, by_range: bool) -> Vec<usize> {
        let g = &*self.groupoid;
        let mut acc = 0;
        (0..g.n_arrows())
            .map(|a| {
                let o = acc;
                acc += self.dims[if by_range { g.tgt(a) } else { g.src(a) }];
                o
            })
            .collect()
    }

    /// Block of `T` at arrow `a`, a map `M_{r(a)} -> M_{s(a)}`.
    pub fn block(&self, a: usize) -> Matrix {
        let g = &*self.groupoid;
        let (ro, so) = (self.offsets(true), self.offsets(false));
        self.matrix.block(so[a], ro[a], self.dims[g.src(a)], self.dims[g.tgt(a)])
    }

    /// Whether `T` is `C_c(G)`-linear, i.e. block diagonal over arrows.
    pub fn is_block_diagonal(&self) -> bool {
        let g = &*self.groupoid;
        let (ro, so) = (self.offsets(true), self.offsets(false));
        let mut copy = self.matrix.clone();
        for a in 0..g.n_arrows() {
            let z = Matrix::zeros(self.dims[g.src(a)], self.dims[g.tgt(a)]);
            copy.set_block(so[a], ro[a], &z);
        }
        copy.is_zero()
    }

    /// The three pullbacks `d0^*T`, `d1^*T`, `d2^*T` on bases indexed by composable pairs.
    pub fn pullbacks(&self) -> (Matrix, Matrix, Matrix) {
        let g = &*self.groupoid;
        let pairs: Vec<(usize, usize)> = (0..g.n_arrows())
            .flat_map(|a| (0..g.n_arrows()).map(move |b| (a, b)))
            .filter(|&(a, b)| g.mul(a, b).is_some())
            .collect();
        let d2: Vec<Matrix> = pairs.iter().map(|&(a, _)| self.block(a)).collect();
        let d0: Vec<Matrix> = pairs.iter().map(|&(_, b)| self.block(b)).collect();
        let d1: Vec<Matrix> = pairs.iter().map(|&(a, b)| self.block(g.compose(a, b))).collect();
        (Matrix::direct_sum(&d0), Matrix::direct_sum(&d1), Matrix::direct_sum(&d2))
    }

    /// Coaction identity `d0^*(T) d2^*(T) = d1^*(T)`.
    pub fn coaction_identity(&self) -> bool {
        let (d0, d1, d2) = self.pullbacks();
        d0.mul(&d2) == d1
    }
}

pub fn module_to_comodule(m: &GModule) -> ComoduleMap {
    let g = &*m.groupoid;
    let blocks: Vec<Matrix> = (0..g.n_arrows()).map(|a| m.rho[g.inv(a)].clone()).collect();
    ComoduleMap { groupoid: m.groupoid.clone(), dims: m.dims.clone(), matrix: Matrix::direct_sum(&blocks) }
}

/// Recovers the module with `rho(a) = T_a^-1`, after checking linearity and the coaction identity.
pub fn comodule_to_module(c: &ComoduleMap) -> Result<GModule> {
    if !c.is_block_diagonal() {
        return Err(Error::Module("comodule map is not C_c(G)-linear".into()));
    }
    if !c.coaction_identity() {
        return Err(Error::Module("coaction identity fails".into()));
    }
    let g = &*c.groupoid;
    let rho = (0..g.n_arrows())
        .map(|a| {
            let t = c.block(a);
            if t.rows() == 0 {
                return Ok(t);
            }
            t.inverse().ok_or_else(|| Error::Module(format!("T is not invertible at arrow `{}`", g.arrow_id(a))))
        })
        .collect::<Result<Vec<_>>>()?;
    GModule::new(c.groupoid.clone(), c.dims.clone(), rho)
}
