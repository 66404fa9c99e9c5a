//! Twisted traces, the trace chain map `X_G(A ⊗ K(E)) -> X_G(A)`, admissible pairings and averaging.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::galgebra::{smoothing_algebra, GAlgebra, Pairing};
use crate::gmodule::{equivariant_homs, GModule, UnitMap};
use crate::homalg::extension::InvariantComplex;
use crate::homalg::{hp_quasifree, induced_map, x_complex, FormParacomplex};
use crate::linalg::{Matrix, SparseVec};
use crate::q::Q;

/// `ttr_beta(e_p ⊗ e_q) = h(rho(beta^-1) e_q, e_p)` at every loop `beta`, as a functional on `K(E)_{s(beta)}`.
#[derive(Clone, Debug)]
pub struct TwistedTrace {
    pub pairing: Pairing,
    pub kernel: GAlgebra,
    /// Keyed by loop arrow.
    pub values: BTreeMap<usize, Vec<Q>>,
}

pub fn twisted_trace(h: &Pairing) -> TwistedTrace {
    let g = &*h.module.groupoid;
    let values = g
        .loops()
        .into_iter()
        .map(|b| {
            let x = g.src(b);
            let k = h.module.dims[x];
            let rinv = &h.module.rho[g.inv(b)];
            // [rho(b^-1)^T G]_{q,p}
            let m = rinv.transpose().mul(&h.gram[x]);
            let v = (0..k * k).map(|pq| m[(pq % k, pq / k)].clone()).collect();
            (b, v)
        })
        .collect();
    TwistedTrace { pairing: h.clone(), kernel: smoothing_algebra(h), values }
}

impl TwistedTrace {
    pub fn eval(&self, b: usize, l: &SparseVec) -> Q {
        let t = &self.values[&b];
        l.iter().map(|(j, c)| c * &t[*j]).sum()
    }

    /// `ttr(L0 L1) - ttr((beta^-1 . L1) L0)` at the loop `beta`.
    pub fn identity_defect(&self, b: usize, l0: &SparseVec, l1: &SparseVec) -> Q {
        let g = self.kernel.groupoid();
        let x = g.src(b);
        let moved = self.kernel.act(g.inv(b), l1);
        self.eval(b, &self.kernel.mul_vec(x, l0, l1)) - self.eval(b, &self.kernel.mul_vec(x, &moved, l0))
    }

    /// The identity on all pairs of basis elements at every loop.
    pub fn identity_holds(&self) -> bool {
        let g = self.kernel.groupoid();
        self.values.keys().all(|&b| {
            let d = self.kernel.dim(g.src(b));
            (0..d).all(|i| (0..d).all(|j| self.identity_defect(b, &SparseVec::unit(i), &SparseVec::unit(j)).is_zero()))
        })
    }
}

/// Image of a word of degree `n` in the forms of `A ⊗ K(E)` under `tr_A`:
/// `(x0 ⊗ L0) d(x1 ⊗ L1) ... -> ttr(L0 L1 ...) x0 dx1 ...`, with the adjoined unit contributing no `L0`.
fn trace_word(ttr: &TwistedTrace, b: usize, x: usize, da: usize, w: usize, n: usize) -> SparseVec {
    let dk = ttr.kernel.dim(x);
    let d = da * dk;
    let pow = d.pow(n as u32);
    let lead = w / pow;
    let mut rest = w - lead * pow;
    let mut digits = Vec::with_capacity(n);
    let mut p = pow;
    for _ in 0..n {
        p /= d;
        digits.push(rest / p);
        rest %= p;
    }
    let mut l: Option<SparseVec> = (lead > 0).then(|| SparseVec::unit((lead - 1) % dk));
    let mut word = if lead == 0 { 0 } else { (lead - 1) / dk + 1 };
    for &digit in &digits {
        let step = SparseVec::unit(digit % dk);
        l = Some(match l {
            None => step,
            Some(acc) => ttr.kernel.mul_vec(x, &acc, &step),
        });
        word = word * da + digit / dk;
    }
    let c = ttr.eval(b, &l.expect("degree zero words carry an entry"));
    if c.is_zero() {
        SparseVec::zero()
    } else {
        SparseVec(vec![(word, c)])
    }
}

/// `tr_A` loop by loop on `C0 ⊕ C1`.
pub fn trace_map(ttr: &TwistedTrace, a: &GAlgebra, src: &FormParacomplex, tgt: &FormParacomplex) -> Vec<Matrix> {
    (0..src.complex.n_loops())
        .map(|l| {
            let b = src.ad_loop(l);
            let x = src.forms.base[l];
            let da = a.dim(x);
            src.operator_matrix(tgt, l, |deg, v| {
                vec![(deg, v.map(|w| trace_word(ttr, b, x, da, w, deg)))]
            })
        })
        .collect()
}

/// Chain-map identities of a loopwise map between paracomplexes.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ChainMapReport {
    pub commutes_with_boundary: bool,
    pub commutes_with_t: bool,
    pub equivariant: bool,
}

impl ChainMapReport {
    pub fn holds(&self) -> bool {
        self.commutes_with_boundary && self.commutes_with_t && self.equivariant
    }
}

pub fn chain_map_report(src: &FormParacomplex, tgt: &FormParacomplex, f: &[Matrix]) -> ChainMapReport {
    let (p, q) = (&src.complex, &tgt.complex);
    let h = &p.ad.groupoid;
    ChainMapReport {
        commutes_with_boundary: (0..p.n_loops()).all(|l| f[l].mul(&p.boundary(l)) == q.boundary(l).mul(&f[l])),
        commutes_with_t: (0..p.n_loops()).all(|l| f[l].mul(&p.twist(l)) == q.twist(l).mul(&f[l])),
        equivariant: (0..h.n_arrows()).all(|j| f[h.tgt(j)].mul(&p.action(j)) == q.action(j).mul(&f[h.src(j)])),
    }
}

/// Invariant sections `v, w` of `E` with `h(w, v) = 1` at every unit; `P = v ⊗ w` is an invariant idempotent.
#[derive(Clone, Debug)]
pub struct Admissible {
    pub v: Vec<Vec<Q>>,
    pub w: Vec<Vec<Q>>,
}

impl Admissible {
    /// On `D(G)` with the regular pairing: `v = sum c(s(a)) delta_a`, `w = sum delta_a` over `G^x`.
    pub fn cutoff(h: &Pairing) -> Result<Admissible> {
        let g = h.module.groupoid.clone();
        if h.module != GModule::regular(g.clone()) {
            return Err(Error::Invalid("cut-off sections need the regular module".into()));
        }
        let c = g.cutoff();
        let v = (0..g.n_units()).map(|x| g.range_fiber(x).iter().map(|&a| c.values[g.src(a)].clone()).collect()).collect();
        let w = (0..g.n_units()).map(|x| vec![Q::one(); g.range_fiber(x).len()]).collect();
        Admissible { v, w }.checked(h)
    }

    /// Per orbit, a pair of invariant sections with nonzero pairing at the representative, rescaled.
    pub fn generic(h: &Pairing) -> Result<Admissible> {
        let g = h.module.groupoid.clone();
        let sections: Vec<Vec<Vec<Q>>> =
            equivariant_homs(&GModule::trivial(g.clone()), &h.module).into_iter().map(|m| m.iter().map(|c| c.col(0)).collect()).collect();
        let mut v: Vec<Vec<Q>> = h.module.dims.iter().map(|&d| vec![Q::zero(); d]).collect();
        let mut w = v.clone();
        for orbit in g.orbits() {
            let r = orbit.rep;
            let pair = sections.iter().enumerate().flat_map(|(i, s)| sections.iter().map(move |t| (i, s, t))).find_map(|(_, s, t)| {
                let c = h.h(r, &t[r], &s[r]);
                (!c.is_zero()).then_some((s, t, c))
            });
            let Some((s, t, c)) = pair else {
                return Err(Error::Invalid(format!("pairing degenerate on invariant sections over orbit of {}", g.units()[r])));
            };
            let inv = Q::one() / c;
            for &x in &orbit.units {
                v[x] = s[x].iter().map(|e| e * &inv).collect();
                w[x] = t[x].clone();
            }
        }
        Admissible { v, w }.checked(h)
    }

    fn checked(self, h: &Pairing) -> Result<Admissible> {
        let g = &*h.module.groupoid;
        for a in 0..g.n_arrows() {
            let (s, r) = (g.src(a), g.tgt(a));
            for (sec, name) in [(&self.v, "v"), (&self.w, "w")] {
                if h.module.rho[a].mul_vec(&sec[s]) != sec[r] {
                    return Err(Error::Invalid(format!("section {name} is not invariant under arrow {}", g.arrow_id(a))));
                }
            }
        }
        for x in 0..g.n_units() {
            if !h.h(x, &self.w[x], &self.v[x]).is_one() {
                return Err(Error::Invalid(format!("h(w, v) != 1 at unit {}", g.units()[x])));
            }
        }
        Ok(self)
    }

    /// Coordinates of `P = v ⊗ w` in `K(E)_x`.
    pub fn projection(&self, x: usize) -> SparseVec {
        let k = self.v[x].len();
        SparseVec::from_terms((0..k * k).map(|pq| (pq, &self.v[x][pq / k] * &self.w[x][pq % k])).collect())
    }
}

/// `iota_A(a) = a ⊗ P`.
pub fn iota(a: &GAlgebra, kernel: &GAlgebra, adm: &Admissible) -> UnitMap {
    (0..a.groupoid().n_units())
        .map(|x| {
            let dk = kernel.dim(x);
            let p = adm.projection(x);
            let cols: Vec<Vec<Q>> = (0..a.dim(x))
                .map(|i| {
                    let mut col = vec![Q::zero(); a.dim(x) * dk];
                    for (j, c) in p.iter() {
                        col[i * dk + j] = c.clone();
                    }
                    col
                })
                .collect();
            Matrix::from_cols(a.dim(x) * dk, &cols)
        })
        .collect()
}

/// Stability verification for `A` and `A ⊗ K(E)`.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub twisted_trace_identity: bool,
    pub trace_chain_map: ChainMapReport,
    /// `tr_A ∘ X(iota_A) = id` on `X_G(A)`.
    pub trace_after_iota: bool,
    /// `X(iota_A) ∘ tr_A` induces the identity on invariant homology of `X_G(A ⊗ K(E))`.
    pub iota_after_trace: bool,
    pub hp_a: (usize, usize),
    pub hp_stabilized: (usize, usize),
    pub invariant_ranks: ((usize, usize), (usize, usize)),
    /// Rotation-path chain homotopies are not constructed over the rationals.
    pub chain_homotopy_witness: Option<bool>,
}

impl StabilityReport {
    pub fn all_pass(&self) -> bool {
        self.twisted_trace_identity
            && self.trace_chain_map.holds()
            && self.trace_after_iota
            && self.iota_after_trace
            && self.hp_a == self.hp_stabilized
            && self.invariant_ranks.0 == self.invariant_ranks.1
    }
}

pub fn stability_check(a: &GAlgebra, h: &Pairing, adm: &Admissible) -> Result<StabilityReport> {
    if !h.is_equivariant() {
        return Err(Error::Invalid("pairing is not equivariant".into()));
    }
    let ttr = twisted_trace(h);
    let ak = a.tensor(&ttr.kernel);
    let (xa, xak) = (x_complex(a)?, x_complex(&ak)?);
    let tr = trace_map(&ttr, a, &xak, &xa);
    let i = induced_map(&xa, &xak, &iota(a, &ttr.kernel, adm));
    let trace_after_iota = (0..xa.complex.n_loops()).all(|l| tr[l].mul(&i[l]).is_identity());
    let inv_ak = InvariantComplex::new(&xak.complex);
    let inv_a = InvariantComplex::new(&xa.complex);
    let round: Vec<Matrix> = (0..xa.complex.n_loops()).map(|l| i[l].mul(&tr[l])).collect();
    let iota_after_trace = inv_ak.induces_identity(&inv_ak.restrict_map(&xak.complex, &inv_ak, &xak.complex, &round, 0));
    let (ra, rak) = (hp_quasifree(a, a)?, hp_quasifree(&ak, &ak)?);
    Ok(StabilityReport {
        twisted_trace_identity: ttr.identity_holds(),
        trace_chain_map: chain_map_report(&xak, &xa, &tr),
        trace_after_iota,
        iota_after_trace,
        hp_a: (ra.even, ra.odd),
        hp_stabilized: (rak.even, rak.odd),
        invariant_ranks: (inv_a.homology(), inv_ak.homology()),
        chain_homotopy_witness: None,
    })
}

/// `phi^G_x = sum_{a in G^x} c(s(a)) rho_F(a) phi_{s(a)} rho_E(a^-1)`.
pub fn equivariant_average(e: &GModule, f: &GModule, phi: &UnitMap) -> UnitMap {
    let g = &*e.groupoid;
    let c = g.cutoff();
    (0..g.n_units())
        .map(|x| {
            g.range_fiber(x).into_iter().fold(Matrix::zeros(f.dims[x], e.dims[x]), |acc, a| {
                let s = g.src(a);
                if c.values[s].is_zero() {
                    return acc;
                }
                acc.add(&f.rho[a].mul(&phi[s]).mul(&e.rho[g.inv(a)]).scale(&c.values[s]))
            })
        })
        .collect()
}

/// `sum_{a in G^x} c(s(a))` at every unit; identically one for a cut-off function.
pub fn cutoff_sums(g: &crate::groupoid::FiniteGroupoid) -> Vec<Q> {
    let c = g.cutoff();
    (0..g.n_units()).map(|x| g.range_fiber(x).iter().map(|&a| c.values[g.src(a)].clone()).sum()).collect()
}
