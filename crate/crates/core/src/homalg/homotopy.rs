//! Polynomial homotopies, the Cartan homotopy `eta: theta^2 -> X` and the comparison `nu: X -> theta^2`.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::build_forms;
use crate::galgebra::{col_sparse, GAlgebra};
use crate::gmodule::UnitMap;
use crate::groupoid::FiniteGroupoid;
use crate::homalg::{hodge_level, induced_map, same_class, x_complex, FormParacomplex};
use crate::linalg::{Matrix, SparseVec};
use crate::q::Q;
use crate::tensoralg::{quasifree_certificate, ConnectionCertificate};

/// `Phi_t = sum_k t^k coeffs[k]`, an equivariant algebra map `A -> B[t]`.
#[derive(Clone, Debug)]
pub struct PolyHomotopy {
    pub source: GAlgebra,
    pub target: GAlgebra,
    pub coeffs: Vec<UnitMap>,
}

impl PolyHomotopy {
    /// Checks equivariance of every coefficient and multiplicativity as a polynomial identity.
    pub fn new(source: GAlgebra, target: GAlgebra, coeffs: Vec<UnitMap>) -> Result<PolyHomotopy> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("a homotopy needs at least one coefficient".into()));
        }
        for c in &coeffs {
            if !source.module.is_equivariant(&target.module, c) {
                return Err(Error::Invalid("homotopy coefficient is not equivariant".into()));
            }
        }
        let h = PolyHomotopy { source, target, coeffs };
        if let Some((_, i, j)) = h.multiplicativity_failure() {
            return Err(Error::NotHomomorphism(i, j));
        }
        Ok(h)
    }

    fn image(&self, k: usize, x: usize, v: &SparseVec) -> SparseVec {
        match self.coeffs.get(k) {
            Some(c) => SparseVec::from_dense(&c[x].mul_vec(&v.to_dense(self.source.dim(x)))),
            None => SparseVec::zero(),
        }
    }

    /// First `(unit, i, j)` where `Phi_t(e_i e_j) != Phi_t(e_i) Phi_t(e_j)` in some power of `t`.
    pub fn multiplicativity_failure(&self) -> Option<(usize, usize, usize)> {
        let (a, b) = (&self.source, &self.target);
        let n = self.coeffs.len();
        (0..a.groupoid().n_units()).find_map(|x| {
            let d = a.dim(x);
            (0..d * d)
                .find(|&ij| {
                    let (i, j) = (ij / d, ij % d);
                    (0..2 * n - 1).any(|k| {
                        let lhs = self.image(k, x, a.mul_basis(x, i, j));
                        let rhs = (0..=k).fold(SparseVec::zero(), |acc, p| {
                            let u = self.image(p, x, &SparseVec::unit(i));
                            let v = self.image(k - p, x, &SparseVec::unit(j));
                            acc.add(&b.mul_vec(x, &u, &v))
                        });
                        lhs != rhs
                    })
                })
                .map(|ij| (x, ij / d, ij % d))
        })
    }

    /// `Phi_t` at a rational time.
    pub fn at(&self, t: &Q) -> UnitMap {
        let mut out: UnitMap = self.coeffs[0].clone();
        let mut power = Q::one();
        for c in &self.coeffs[1..] {
            power = &power * t;
            for (o, m) in out.iter_mut().zip(c) {
                *o = o.add(&m.scale(&power));
            }
        }
        out
    }

    /// Conjugation `Phi_t(e_i) = U_t E_i U_t^-1` with `U_t = 1 + tN` for a random strictly upper-triangular `N`.
    ///
    /// The source is `Q^k` (`k` in 1..=2), the target the upper-triangular `3 x 3` matrices, both with trivial action;
    /// `E_i` are disjoint sums of diagonal matrix units.
    pub fn random_conjugation<R: Rng>(g: Arc<FiniteGroupoid>, rng: &mut R) -> PolyHomotopy {
        let k = rng.gen_range(1..=2);
        let mut slots: Vec<usize> = (0..3).collect();
        for i in (1..3).rev() {
            slots.swap(i, rng.gen_range(0..=i));
        }
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (pos, &s) in slots.iter().enumerate() {
            if pos < k {
                blocks[pos].push(s);
            } else if rng.gen_bool(0.5) {
                blocks[rng.gen_range(0..k)].push(s);
            }
        }
        let mut n = Matrix::zeros(3, 3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            n[(i, j)] = Q::int(rng.gen_range(-3..=3));
        }
        let nn = n.mul(&n);
        // U E U^-1 = (1 + tN) E (1 - tN + t^2 N^2)
        let upper: Vec<(usize, usize)> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
        let coords = |m: &Matrix| -> Vec<Q> { upper.iter().map(|&(i, j)| m[(i, j)].clone()).collect() };
        let mut coeffs: Vec<Vec<Vec<Q>>> = vec![Vec::new(); 4];
        for block in &blocks {
            let mut e = Matrix::zeros(3, 3);
            for &s in block {
                e[(s, s)] = Q::one();
            }
            let terms = [
                e.clone(),
                n.mul(&e).sub(&e.mul(&n)),
                e.mul(&nn).sub(&n.mul(&e).mul(&n)),
                n.mul(&e).mul(&nn),
            ];
            for (c, t) in coeffs.iter_mut().zip(terms.iter()) {
                c.push(coords(t));
            }
        }
        let source = GAlgebra::diagonal(g.clone(), k);
        let target = GAlgebra::matrices(g.clone(), 3, true);
        let coeffs = coeffs
            .into_iter()
            .map(|cols| vec![Matrix::from_cols(upper.len(), &cols); g.n_units()])
            .collect();
        PolyHomotopy::new(source, target, coeffs).expect("conjugation by a polynomial unit is multiplicative")
    }
}

/// Words `<h> d v1 ... d vm` for a head vector `h` and digit vectors `v_i` of a fiber of dimension `d`.
fn words(head: &SparseVec, digits: &[SparseVec], d: usize) -> SparseVec {
    let mut acc: Vec<(usize, Q)> = head.iter().map(|(k, c)| (k + 1, c.clone())).collect();
    for v in digits {
        acc = acc.iter().flat_map(|(u, c)| v.iter().map(move |(k, e)| (u * d + k, c * e))).collect();
    }
    SparseVec::from_terms(acc)
}

/// `eta(<a0> da1 ... dan) = int_0^1 Phi_t(a0) Phi_t'(a1) dPhi_t(a2) ... dPhi_t(an) dt` in the fiber at `x`.
fn eta_form(h: &PolyHomotopy, x: usize, lead: usize, digits: &[usize]) -> SparseVec {
    let b = &h.target;
    let k = h.coeffs.len();
    let col = |p: usize, i: usize| col_sparse(&h.coeffs[p][x], i);
    let mut acc = SparseVec::zero();
    // multi-index over (k0 if a0 is present, k1, ..., kn)
    let slots = digits.len() + usize::from(lead > 0);
    for code in 0..k.pow(slots as u32) {
        let mut idx = Vec::with_capacity(slots);
        let mut c = code;
        for _ in 0..slots {
            idx.push(c % k);
            c /= k;
        }
        let (k0, rest) = if lead > 0 { (Some(idx[0]), &idx[1..]) } else { (None, &idx[..]) };
        let k1 = rest[0];
        if k1 == 0 {
            continue;
        }
        let power: usize = k0.unwrap_or(0) + rest.iter().sum::<usize>() - 1;
        let weight = Q::from(k1) / Q::from(power + 1);
        let mut head = col(k1, digits[0]);
        if let Some(k0) = k0 {
            head = b.mul_vec(x, &col(k0, lead - 1), &head);
        }
        let tail: Vec<SparseVec> = rest[1..].iter().zip(&digits[1..]).map(|(&p, &i)| col(p, i)).collect();
        acc = acc.add_scaled(&words(&head, &tail, b.dim(x)), &weight);
    }
    acc
}

/// Outcome of the Cartan homotopy check.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CartanReport {
    /// `X(Phi_1) xi_2 - X(Phi_0) xi_2 = ∂ eta + eta ∂`.
    pub cartan_identity: bool,
    /// `xi_2 nu = id` on `X(A)`.
    pub nu_section: Option<bool>,
    /// `nu xi_2 = id - [nabla, B + b]` on `theta^2(A)`.
    pub nu_factorization: Option<bool>,
    /// `nu` commutes with the boundaries.
    pub nu_chain_map: Option<bool>,
    /// `X(Phi_1) - X(Phi_0) = ∂(eta nu) + (eta nu)∂` on `X(A)`.
    pub witness: Option<bool>,
    /// `[Phi_0] = [Phi_1]` in the homology of `Hom(X(A), X(B))`.
    pub classes_equal: Option<bool>,
}

impl CartanReport {
    pub fn all_pass(&self) -> bool {
        self.cartan_identity
            && [self.nu_section, self.nu_factorization, self.nu_chain_map, self.witness, self.classes_equal]
                .iter()
                .all(|b| b.unwrap_or(true))
    }
}

/// Matrices of `eta: theta^2(A) -> X(B)`, loop by loop.
pub fn eta_matrices(h: &PolyHomotopy, theta: &FormParacomplex, xb: &FormParacomplex) -> Vec<Matrix> {
    (0..theta.complex.n_loops())
        .map(|l| {
            let x = theta.forms.base[l];
            let lf = &theta.forms.loops[l];
            theta.operator_matrix(xb, l, |deg, v| {
                if deg == 0 {
                    return Vec::new();
                }
                let mut acc = SparseVec::zero();
                for (w, c) in v.iter() {
                    let (lead, digits) = lf.decode(*w, deg);
                    acc = acc.add_scaled(&eta_form(h, x, lead, &digits), c);
                }
                vec![(deg - 1, acc)]
            })
        })
        .collect()
}

/// Matrices of `nabla` on `theta^2(A)`, dropping components above degree 2.
pub fn nabla_matrices(cert: &ConnectionCertificate, theta: &FormParacomplex) -> Vec<Matrix> {
    (0..theta.complex.n_loops())
        .map(|l| {
            let x = theta.forms.base[l];
            theta.operator_matrix(theta, l, |deg, v| {
                if deg == 0 || deg >= 2 {
                    return Vec::new();
                }
                vec![(deg + 1, cert.nabla(x, v, deg))]
            })
        })
        .collect()
}

/// Builds `eta` (and `nu` when `A` is certified quasifree) and checks the homotopy identities exactly.
pub fn cartan_homotopy_check(h: &PolyHomotopy) -> Result<CartanReport> {
    let (a, b) = (&h.source, &h.target);
    let theta = hodge_level(Arc::new(build_forms(a, 3)?), 2)?;
    let xa = x_complex(a)?;
    let xb = x_complex(b)?;
    let (phi0, phi1) = (h.at(&Q::zero()), h.at(&Q::one()));
    let eta = eta_matrices(h, &theta, &xb);
    let p0 = induced_map(&theta, &xb, &phi0);
    let p1 = induced_map(&theta, &xb, &phi1);
    let n_loops = theta.complex.n_loops();
    let cartan_identity = (0..n_loops).all(|l| {
        let lhs = p1[l].sub(&p0[l]);
        let rhs = xb.complex.boundary(l).mul(&eta[l]).add(&eta[l].mul(&theta.complex.boundary(l)));
        lhs == rhs
    });
    let mut report = CartanReport {
        cartan_identity,
        nu_section: None,
        nu_factorization: None,
        nu_chain_map: None,
        witness: None,
        classes_equal: None,
    };
    let Some(cert) = quasifree_certificate(a)? else { return Ok(report) };
    let ids: UnitMap = a.module.dims.iter().map(|&d| Matrix::identity(d)).collect();
    let nabla = nabla_matrices(&cert, &theta);
    let xi = induced_map(&theta, &xa, &ids);
    let section = induced_map(&xa, &theta, &ids);
    let mut nus = Vec::with_capacity(n_loops);
    let (mut sec_ok, mut fac_ok, mut chain_ok) = (true, true, true);
    for l in 0..n_loops {
        let d = theta.complex.boundary(l);
        let big_n = Matrix::identity(theta.total(l)).sub(&nabla[l].mul(&d).add(&d.mul(&nabla[l])));
        let nu = big_n.mul(&section[l]);
        sec_ok &= xi[l].mul(&nu).is_identity();
        fac_ok &= nu.mul(&xi[l]) == big_n;
        chain_ok &= d.mul(&nu) == nu.mul(&xa.complex.boundary(l));
        nus.push(nu);
    }
    let x0 = induced_map(&xa, &xb, &phi0);
    let x1 = induced_map(&xa, &xb, &phi1);
    let witness = (0..n_loops).all(|l| {
        let w = eta[l].mul(&nus[l]);
        let rhs = xb.complex.boundary(l).mul(&w).add(&w.mul(&xa.complex.boundary(l)));
        x1[l].sub(&x0[l]) == rhs
    });
    report.nu_section = Some(sec_ok);
    report.nu_factorization = Some(fac_ok);
    report.nu_chain_map = Some(chain_ok);
    report.witness = Some(witness);
    report.classes_equal = Some(same_class(&xa.complex, &xb.complex, &x0, &x1));
    Ok(report)
}

/// Functoriality on X-complexes: `X(id) = id` and `X(g f) = X(g) X(f)`.
pub fn functoriality_holds(a: &GAlgebra, b: &GAlgebra, c: &GAlgebra, f: &UnitMap, g: &UnitMap) -> Result<bool> {
    let (xa, xb, xc) = (x_complex(a)?, x_complex(b)?, x_complex(c)?);
    let ids: UnitMap = a.module.dims.iter().map(|&d| Matrix::identity(d)).collect();
    let gf: UnitMap = g.iter().zip(f).map(|(g, f)| g.mul(f)).collect();
    let id_ok = induced_map(&xa, &xa, &ids).iter().all(Matrix::is_identity);
    let (xf, xg, xgf) = (induced_map(&xa, &xb, f), induced_map(&xb, &xc, g), induced_map(&xa, &xc, &gf));
    Ok(id_ok && (0..xgf.len()).all(|l| xg[l].mul(&xf[l]) == xgf[l]))
}

/// The example `Phi_t(a) = a (e11 + t e12)` from `Q` into the upper-triangular `2 x 2` matrices.
pub fn corner_homotopy() -> PolyHomotopy {
    let g = Arc::new(FiniteGroupoid::builtin("trivial").expect("builtin"));
    let a = GAlgebra::trivial(g.clone());
    let b = GAlgebra::matrices(g, 2, true);
    // basis of b: e11, e12, e22
    let c0 = vec![Matrix::from_ints(&[&[1], &[0], &[0]])];
    let c1 = vec![Matrix::from_ints(&[&[0], &[1], &[0]])];
    PolyHomotopy::new(a, b, vec![c0, c1]).expect("corner homotopy is multiplicative")
}
