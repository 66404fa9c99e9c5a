//! Orbit localisation, the averaging map `kappa^G`, the comparison map `gamma^G`, and Green-Julg verification.

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{build_forms, FormModule, LoopForms};
use crate::galgebra::{crossed_product, CrossedProduct, GAlgebra};
use crate::gmodule::{GModule, UnitMap};
use crate::groupoid::{AdjointGroupoid, FiniteGroupoid};
use crate::homalg::{hp_quasifree, HomologyReport};
use crate::linalg::{Matrix, SparseVec};
use crate::q::Q;

/// `M_[x] = M / m_[x] M`: for a unit-graded module, the sum of the fibers over the orbit.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitLocalisation {
    pub orbit: usize,
    pub units: Vec<usize>,
    pub dim: usize,
}

pub fn localise(m: &GModule, token: &str) -> Result<OrbitLocalisation> {
    let g = &*m.groupoid;
    let x = g.unit_index(token).ok_or_else(|| Error::Invalid(format!("unknown orbit token {token}")))?;
    let orbit = g.orbit_of(x);
    let units = g.orbits()[orbit].units.clone();
    let dim = units.iter().map(|&u| m.dims[u]).sum();
    Ok(OrbitLocalisation { orbit, units, dim })
}

/// Localisation of a unit-graded map at an orbit: the block-diagonal sum of its fibers.
pub fn localise_map(g: &FiniteGroupoid, f: &UnitMap, orbit: usize) -> Matrix {
    Matrix::direct_sum(&g.orbits()[orbit].units.iter().map(|&u| f[u].clone()).collect::<Vec<_>>())
}

fn rank(m: &Matrix) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        0
    } else {
        m.rank()
    }
}

fn is_iso(m: &Matrix) -> bool {
    m.rows() == m.cols() && rank(m) == m.rows()
}

/// Whether `M -f-> N -g-> P` is exact at `N` after localising at every orbit, and `0 -> M -> N -> P -> 0` is short exact.
pub fn localised_exact(g: &FiniteGroupoid, f: &UnitMap, gm: &UnitMap) -> Vec<bool> {
    (0..g.orbits().len())
        .map(|o| {
            let (lf, lg) = (localise_map(g, f, o), localise_map(g, gm, o));
            let composite = lg.rows() == 0 || lf.cols() == 0 || lg.mul(&lf).is_zero();
            composite && rank(&lf) == lf.cols() && rank(&lg) == lg.rows() && rank(&lf) + rank(&lg) == lf.rows()
        })
        .collect()
}

/// Local-to-global verdict for a module map.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct LocalVerdict {
    pub global: bool,
    /// Per orbit: representative token and whether the localisation is invertible.
    pub orbits: Vec<(String, bool)>,
}

impl LocalVerdict {
    pub fn consistent(&self) -> bool {
        self.global == self.orbits.iter().all(|(_, ok)| *ok)
    }
}

pub fn local_to_global(g: &FiniteGroupoid, f: &UnitMap) -> LocalVerdict {
    let global = is_iso(&Matrix::direct_sum(f));
    let orbits = g.orbits().iter().enumerate().map(|(o, orb)| (g.units()[orb.rep].clone(), is_iso(&localise_map(g, f, o)))).collect();
    LocalVerdict { global, orbits }
}

/// An element of `A(G) = O_G ⊗ D(G)`: at each loop `a` (adjoint unit), a function on `G^{s(a)}`.
pub type AgElement = Vec<Vec<Q>>;

fn fiber_pos(g: &FiniteGroupoid, x: usize, c: usize) -> usize {
    g.range_fiber(x).iter().position(|&d| d == c).expect("arrow in range fiber")
}

/// `kappa^G(F)` as a map `O_G -> A(G)` of modules over the adjoint groupoid:
/// `kappa(F)(f)(a, b) = f(a) sum_{c in G^{r(a)}} F(c^-1 a c, c^-1 b)`.
pub fn kappa_average(ad: &AdjointGroupoid, g: &FiniteGroupoid, f: &AgElement) -> UnitMap {
    ad.loops
        .iter()
        .map(|&a| {
            let x = g.src(a);
            let col: Vec<Q> = g
                .range_fiber(x)
                .iter()
                .map(|&b| {
                    g.range_fiber(x)
                        .iter()
                        .map(|&c| {
                            let ci = g.inv(c);
                            let l = ad.unit_of_loop(g.conj(ci, a));
                            f[l][fiber_pos(g, g.src(c), g.compose(ci, b))].clone()
                        })
                        .sum()
                })
                .collect();
            Matrix::from_cols(col.len(), &[col])
        })
        .collect()
}

/// `F . delta_u`: right multiplication in `D(G)`, `(F . delta_u)(a, b u) = F(a, b)`.
pub fn right_mul(ad: &AdjointGroupoid, g: &FiniteGroupoid, f: &AgElement, u: usize) -> AgElement {
    ad.loops
        .iter()
        .enumerate()
        .map(|(l, &a)| {
            let x = g.src(a);
            let fiber = g.range_fiber(x);
            fiber
                .iter()
                .map(|&bu| {
                    if g.src(bu) != g.src(u) {
                        return Q::zero();
                    }
                    f[l][fiber_pos(g, x, g.compose(bu, g.inv(u)))].clone()
                })
                .collect()
        })
        .collect()
}

/// Right multiplication by `delta_u` on a column of `A(G)` values, one column per loop.
pub fn right_mul_map(ad: &AdjointGroupoid, g: &FiniteGroupoid, k: &UnitMap, u: usize) -> UnitMap {
    let f: AgElement = k.iter().map(|m| m.col(0)).collect();
    right_mul(ad, g, &f, u).into_iter().map(|c| Matrix::from_cols(c.len(), &[c])).collect()
}

/// Forms of `A` and of `A ⋊ G` together with the map between them.
pub struct GammaMap {
    pub algebra: GAlgebra,
    pub crossed: CrossedProduct,
    pub forms: FormModule,
    pub crossed_forms: FormModule,
}

impl GammaMap {
    pub fn new(a: &GAlgebra, cap: usize) -> Result<GammaMap> {
        let crossed = crossed_product(a);
        Ok(GammaMap {
            forms: build_forms(a, cap)?,
            crossed_forms: build_forms(&crossed.algebra, cap)?,
            algebra: a.clone(),
            crossed,
        })
    }

    fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.algebra.groupoid()
    }

    /// Forms of the crossed product at an orbit.
    pub fn crossed_loop(&self, orbit: usize) -> &LoopForms {
        let q = self.crossed.algebra.groupoid();
        &self.crossed_forms.loops[self.crossed_forms.ad.unit_of_loop(q.unit_arrow(orbit))]
    }

    /// Raw `gamma` on a word of degree `n` at an orbit: the adjoint unit and the image form, or nothing
    /// when the arrows do not compose to a loop.
    pub fn raw_word(&self, orbit: usize, w: usize, n: usize) -> Option<(usize, SparseVec)> {
        let g = self.groupoid();
        let a = &self.algebra;
        let (lead, digits) = self.crossed_loop(orbit).decode(w, n);
        let labels = &self.crossed.basis[orbit];
        let mut arrows: Vec<usize> = Vec::with_capacity(n + 1);
        if lead > 0 {
            arrows.push(labels[lead - 1].0);
        }
        arrows.extend(digits.iter().map(|&k| labels[k].0));
        let first = *arrows.first()?;
        let mut prefix = vec![g.unit_arrow(g.tgt(first))];
        for &c in &arrows {
            let last = *prefix.last().unwrap();
            prefix.push(g.mul(last, c)?);
        }
        let product = *prefix.last().unwrap();
        if !g.is_loop(product) {
            return None;
        }
        let x = g.tgt(product);
        let l = self.forms.ad.unit_of_loop(product);
        let lf = &self.forms.loops[l];
        // entries: a0 as lead, then rho(c0 ... c_{k-1}) a_k
        let shift = usize::from(lead > 0);
        let mut acc: Vec<(usize, Q)> = if lead == 0 { vec![(0, Q::one())] } else { vec![(labels[lead - 1].1 + 1, Q::one())] };
        for (k, &digit) in digits.iter().enumerate() {
            let moved = a.act(prefix[k + shift], &SparseVec::unit(labels[digit].1));
            let mut next = Vec::with_capacity(acc.len() * moved.len());
            for (u, c) in &acc {
                for (i, e) in moved.iter() {
                    next.push((u * a.dim(x) + i, c * e));
                }
            }
            acc = next;
        }
        debug_assert_eq!(lf.d, a.dim(x));
        Some((l, SparseVec::from_terms(acc)))
    }

    /// `gamma^G`: the raw image transported to every conjugate loop, one vector per adjoint unit.
    pub fn averaged(&self, orbit: usize, v: &SparseVec, n: usize) -> Vec<SparseVec> {
        self.apply(orbit, v, n, true)
    }

    pub fn raw(&self, orbit: usize, v: &SparseVec, n: usize) -> Vec<SparseVec> {
        self.apply(orbit, v, n, false)
    }

    fn apply(&self, orbit: usize, v: &SparseVec, n: usize, average: bool) -> Vec<SparseVec> {
        let g = self.groupoid();
        let ad = &self.forms.ad;
        let mut out = vec![SparseVec::zero(); ad.loops.len()];
        for (w, c) in v.iter() {
            let Some((l, form)) = self.raw_word(orbit, *w, n) else { continue };
            let form = form.scale(c);
            if !average {
                out[l] = out[l].add(&form);
                continue;
            }
            let b = ad.loops[l];
            for gamma in g.source_fiber(g.src(b)) {
                let j = ad.arrow_of_pair(gamma, b);
                let t = ad.groupoid.tgt(j);
                let moved = if g.is_unit_arrow(gamma) { form.clone() } else { self.forms.transport(j, &form, n) };
                out[t] = out[t].add(&moved);
            }
        }
        out
    }

    /// First failure of `b gamma = gamma b` (`connes = false`) or `B gamma = gamma B` on degree-`n` words.
    pub fn compatibility_failure(&self, n: usize, connes: bool, average: bool) -> Result<Option<(usize, usize)>> {
        let orbits = self.crossed.basis.len();
        for o in 0..orbits {
            let lf = self.crossed_loop(o);
            let m = if connes { n + 1 } else { n - 1 };
            let failure = (0..lf.words(n)).into_par_iter().find_map_first(|w| {
                if n == 0 && w == 0 {
                    return None;
                }
                let v = SparseVec::unit(w);
                let image = self.apply(o, &v, n, average);
                let op_v = if connes { lf.connes(&v, n).ok()? } else { lf.b(&v, n) };
                let lhs = self.apply(o, &op_v, m, average);
                let ok = image.iter().zip(&lhs).enumerate().all(|(l, (x, y))| {
                    let fl = &self.forms.loops[l];
                    let rhs = if connes { fl.connes(x, n).ok() } else { Some(fl.b(x, n)) };
                    rhs.is_some_and(|r| r == *y)
                });
                (!ok).then_some((o, w))
            });
            if failure.is_some() {
                return Ok(failure);
            }
        }
        Ok(None)
    }
}

/// Even and odd homology ranks.
pub type Ranks = (usize, usize);

/// Global ranks against the orbit-wise sum over isotropy groups.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub global: Ranks,
    /// Per orbit: representative token and ranks over its isotropy group.
    pub orbits: Vec<(String, Ranks)>,
}

impl DecompositionReport {
    pub fn sums(&self) -> Ranks {
        self.orbits.iter().fold((0, 0), |(e, o), (_, (x, y))| (e + x, o + y))
    }

    pub fn holds(&self) -> bool {
        self.global == self.sums()
    }
}

fn ranks(r: &HomologyReport) -> Ranks {
    (r.even, r.odd)
}

pub fn discrete_decomposition(a: &GAlgebra, b: &GAlgebra) -> Result<DecompositionReport> {
    let g = a.groupoid().clone();
    let global = ranks(&hp_quasifree(a, b)?);
    let orbits = g
        .orbits()
        .par_iter()
        .map(|o| {
            let r = hp_quasifree(&a.restrict(&[o.rep]), &b.restrict(&[o.rep]))?;
            Ok((g.units()[o.rep].clone(), ranks(&r)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecompositionReport { global, orbits })
}

/// Both sides of the Green-Julg isomorphism, globally and per orbit.
#[derive(Clone, Debug, Serialize)]
pub struct GreenJulgReport {
    /// `HP^G(C(G^0), A)`.
    pub lhs: Ranks,
    /// `HP^{C(G\G^0)}(C(G\G^0), A ⋊ G)`.
    pub rhs: Ranks,
    /// Per orbit: token, isotropy-group side and group crossed-product side.
    pub orbits: Vec<(String, Ranks, Ranks)>,
}

impl GreenJulgReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs && self.orbits.iter().all(|(_, l, r)| l == r)
    }
}

pub fn green_julg_verify(a: &GAlgebra) -> Result<GreenJulgReport> {
    let g = a.groupoid().clone();
    let lhs = ranks(&hp_quasifree(&GAlgebra::trivial(g.clone()), a)?);
    let cp = crossed_product(a);
    let q = cp.algebra.groupoid().clone();
    let rhs = ranks(&hp_quasifree(&GAlgebra::trivial(q.clone()), &cp.algebra)?);
    let orbits = g
        .orbits()
        .par_iter()
        .enumerate()
        .map(|(k, o)| {
            let local = a.restrict(&[o.rep]);
            let l = ranks(&hp_quasifree(&GAlgebra::trivial(local.groupoid().clone()), &local)?);
            let group_cp = crossed_product(&local).algebra;
            let r = ranks(&hp_quasifree(&GAlgebra::trivial(group_cp.groupoid().clone()), &group_cp)?);
            debug_assert_eq!(q.units()[k], g.units()[o.rep]);
            Ok((g.units()[o.rep].clone(), l, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GreenJulgReport { lhs, rhs, orbits })
}
