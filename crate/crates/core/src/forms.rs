//! Equivariant noncommutative differential forms and the operators `d, b, kappa, B, T`.
//!
//! Forms over a loop `beta` based at `x` live in `A_x⁺ ⊗ A_x^{⊗n}`. A word `<a0> da1 ... dan` is encoded
//! in Horner form `((a0' d + a1) d + a2) ...` with `d = dim A_x`, where `a0' = 0` stands for the adjoined
//! unit and `a0' = k + 1` for basis vector `k`. Degree zero forms are the words with `a0' >= 1`.

use std::sync::Arc;

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::galgebra::{col_sparse, GAlgebra};
use crate::groupoid::AdjointGroupoid;
use crate::linalg::SparseVec;
use crate::q::Q;

/// Form calculus over one loop: a fiber algebra together with its twist `g = rho(beta^-1)`.
#[derive(Clone, Debug)]
pub struct LoopForms {
    pub d: usize,
    pub cap: usize,
    mul: Arc<Vec<SparseVec>>,
    twist: Vec<SparseVec>,
    twist_is_identity: bool,
    pows: Vec<usize>,
}

/// The operators acting on forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Op {
    D,
    Hochschild,
    Kappa,
    Connes,
    T,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::D => "d",
            Op::Hochschild => "b",
            Op::Kappa => "kappa",
            Op::Connes => "B",
            Op::T => "T",
        }
    }

    /// Degree shift of the operator.
    pub fn shift(self) -> isize {
        match self {
            Op::D | Op::Connes => 1,
            Op::Hochschild => -1,
            Op::Kappa | Op::T => 0,
        }
    }
}

impl LoopForms {
    /// `mul[i * d + j]` is the product `e_i e_j`; `twist[j]` the image of `e_j` under the twist.
    pub fn new(d: usize, cap: usize, mul: Arc<Vec<SparseVec>>, twist: Vec<SparseVec>) -> LoopForms {
        let twist_is_identity = twist.iter().enumerate().all(|(j, c)| *c == SparseVec::unit(j));
        let pows = (0..=cap + 2).map(|k| d.saturating_pow(k as u32)).collect();
        LoopForms { d, cap, mul, twist, twist_is_identity, pows }
    }

    /// Untwisted calculus over a plain algebra table.
    pub fn untwisted(d: usize, cap: usize, mul: Arc<Vec<SparseVec>>) -> LoopForms {
        LoopForms::new(d, cap, mul, (0..d).map(SparseVec::unit).collect())
    }

    /// Size of the word space `A⁺ ⊗ A^{⊗n}`.
    pub fn words(&self, n: usize) -> usize {
        (self.d + 1) * self.pows[n]
    }

    /// Dimension of `Omega^n`.
    pub fn dim(&self, n: usize) -> usize {
        if n == 0 {
            self.d
        } else {
            self.words(n)
        }
    }

    /// Word index of the `k`-th basis vector of `Omega^n`.
    pub fn basis_word(&self, n: usize, k: usize) -> usize {
        if n == 0 {
            k + 1
        } else {
            k
        }
    }

    /// Inverse of [`LoopForms::basis_word`].
    pub fn word_coord(&self, n: usize, w: usize) -> usize {
        if n == 0 {
            w - 1
        } else {
            w
        }
    }

    pub fn lead(&self, w: usize, n: usize) -> usize {
        w / self.pows[n]
    }

    /// `(a0', [a1, ..., an])`.
    pub fn decode(&self, mut w: usize, n: usize) -> (usize, Vec<usize>) {
        let mut digits = vec![0; n];
        for k in (0..n).rev() {
            digits[k] = w % self.d;
            w /= self.d;
        }
        (w, digits)
    }

    pub fn encode(&self, lead: usize, digits: &[usize]) -> usize {
        digits.iter().fold(lead, |acc, &c| acc * self.d + c)
    }

    pub fn mul_basis(&self, i: usize, j: usize) -> &SparseVec {
        &self.mul[i * self.d + j]
    }

    pub fn twist_of(&self, j: usize) -> &SparseVec {
        &self.twist[j]
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.cap {
            Err(Error::DegreeCap { degree: n, cap: self.cap })
        } else {
            Ok(())
        }
    }

    /// `d` on a word: moves `a0` into the differentials; kills words starting with the adjoined unit.
    pub fn d_word(&self, w: usize, n: usize) -> Option<usize> {
        let lead = self.lead(w, n);
        (lead > 0).then(|| w - self.pows[n] * lead + (lead - 1) * self.pows[n])
    }

    pub fn d(&self, v: &SparseVec, n: usize) -> Result<SparseVec> {
        let terms: Vec<(usize, Q)> = v.iter().filter_map(|(w, c)| self.d_word(*w, n).map(|u| (u, c.clone()))).collect();
        if !terms.is_empty() {
            self.check_degree(n + 1)?;
        }
        // d is injective on words with a0' >= 1, so no merging is needed
        let mut terms = terms;
        terms.sort_unstable_by_key(|t| t.0);
        Ok(SparseVec(terms))
    }

    /// `(word) · e_a` by the Leibniz rule `(w' dan) a = w' d(an a) - (w' an) da`.
    pub fn right_mul_word(&self, w: usize, n: usize, a: usize) -> SparseVec {
        if n == 0 {
            return if w == 0 {
                SparseVec::unit(a + 1)
            } else {
                SparseVec(self.mul_basis(w - 1, a).iter().map(|(k, c)| (k + 1, c.clone())).collect())
            };
        }
        let (head, last) = (w / self.d, w % self.d);
        let mut terms: Vec<(usize, Q)> = self.mul_basis(last, a).iter().map(|(k, c)| (head * self.d + k, c.clone())).collect();
        for (u, c) in self.right_mul_word(head, n - 1, last).0 {
            terms.push((u * self.d + a, -c));
        }
        SparseVec::from_terms(terms)
    }

    pub fn right_mul(&self, v: &SparseVec, n: usize, a: &SparseVec) -> SparseVec {
        let mut terms = Vec::new();
        for (w, c) in v.iter() {
            for (j, e) in a.iter() {
                let ce = c * e;
                for (u, f) in self.right_mul_word(*w, n, *j).0 {
                    terms.push((u, &ce * &f));
                }
            }
        }
        SparseVec::from_terms(terms)
    }

    /// `e_a · (word)`: multiplies into `a0`.
    pub fn left_mul_word(&self, a: usize, w: usize, n: usize) -> SparseVec {
        let lead = self.lead(w, n);
        let rest = w - lead * self.pows[n];
        if lead == 0 {
            return SparseVec::unit((a + 1) * self.pows[n] + rest);
        }
        SparseVec(self.mul_basis(a, lead - 1).iter().map(|(k, c)| ((k + 1) * self.pows[n] + rest, c.clone())).collect())
    }

    pub fn left_mul(&self, a: &SparseVec, v: &SparseVec, n: usize) -> SparseVec {
        let mut terms = Vec::new();
        for (j, e) in a.iter() {
            for (w, c) in v.iter() {
                let ce = c * e;
                for (u, f) in self.left_mul_word(*j, *w, n).0 {
                    terms.push((u, &ce * &f));
                }
            }
        }
        SparseVec::from_terms(terms)
    }

    /// `b(w' da) = (-1)^(n-1) (w' a - g(a) w')`.
    pub fn b_word(&self, w: usize, n: usize) -> SparseVec {
        if n == 0 {
            return SparseVec::zero();
        }
        let (head, last) = (w / self.d, w % self.d);
        let r = self.right_mul_word(head, n - 1, last);
        let l = self.left_mul(&self.twist[last], &SparseVec::unit(head), n - 1);
        let v = r.sub(&l);
        if n.is_multiple_of(2) {
            v.scale(&-Q::one())
        } else {
            v
        }
    }

    pub fn b(&self, v: &SparseVec, n: usize) -> SparseVec {
        if n == 0 {
            return SparseVec::zero();
        }
        v.map(|w| self.b_word(w, n))
    }

    /// Entrywise image of a word under a linear map given by the columns `cols` into a space of dimension `d_tgt`.
    pub fn map_word(w: usize, n: usize, d_src: usize, d_tgt: usize, cols: &[SparseVec]) -> SparseVec {
        let pow = d_src.pow(n as u32);
        let lead = w / pow;
        let mut acc: Vec<(usize, Q)> = if lead == 0 {
            vec![(0, Q::one())]
        } else {
            cols[lead - 1].iter().map(|(k, c)| (k + 1, c.clone())).collect()
        };
        let mut rest = w - lead * pow;
        let mut p = pow;
        for _ in 0..n {
            p /= d_src;
            let digit = rest / p;
            rest %= p;
            let mut next = Vec::with_capacity(acc.len() * cols[digit].len());
            for (u, c) in &acc {
                for (k, e) in cols[digit].iter() {
                    next.push((u * d_tgt + k, c * e));
                }
            }
            acc = next;
        }
        SparseVec::from_terms(acc)
    }

    /// Twist `T`: applies `g` to every entry, fixing the adjoined unit.
    pub fn t(&self, v: &SparseVec, n: usize) -> SparseVec {
        if self.twist_is_identity {
            return v.clone();
        }
        v.map(|w| LoopForms::map_word(w, n, self.d, self.d, &self.twist))
    }

    /// `kappa = id - (b d + d b)`, evaluated as `kappa(w da) = (-1)^(n-1) d(g(a)) w` and `kappa = T` in degree 0.
    pub fn kappa(&self, v: &SparseVec, n: usize) -> Result<SparseVec> {
        if v.iter().any(|(w, _)| self.lead(*w, n) > 0) {
            self.check_degree(n + 1)?;
        }
        if n == 0 {
            return Ok(self.t(v, 0));
        }
        Ok(v.map(|w| self.kappa_word(w, n)))
    }

    fn kappa_word(&self, w: usize, n: usize) -> SparseVec {
        let (head, last) = (w / self.d, w % self.d);
        let lead = self.lead(w, n);
        let rest = head - lead * self.pows[n - 1];
        let sign = if n % 2 == 1 { Q::one() } else { -Q::one() };
        let mut terms = Vec::new();
        for (k, c) in self.twist[last].iter() {
            let c = &sign * c;
            if lead == 0 {
                // d(e_k) d a1 ... d a_{n-1}
                terms.push((k * self.pows[n - 1] + rest, c));
                continue;
            }
            // d(e_k a0) da1 ... - <e_k> d a0 da1 ...
            for (m, e) in self.mul_basis(*k, lead - 1).iter() {
                terms.push((m * self.pows[n - 1] + rest, &c * e));
            }
            terms.push(((k + 1) * self.pows[n] + (lead - 1) * self.pows[n - 1] + rest, -c));
        }
        SparseVec::from_terms(terms)
    }

    pub fn kappa_pow(&self, v: &SparseVec, n: usize, k: usize) -> Result<SparseVec> {
        let mut x = v.clone();
        for _ in 0..k {
            if x.is_zero() {
                break;
            }
            x = self.kappa(&x, n)?;
        }
        Ok(x)
    }

    /// `B = sum_{j=0}^n kappa^j d` on `Omega^n`.
    pub fn connes(&self, v: &SparseVec, n: usize) -> Result<SparseVec> {
        let mut x = self.d(v, n)?;
        let mut acc = x.clone();
        for _ in 0..n {
            x = self.kappa(&x, n + 1)?;
            acc = acc.add(&x);
        }
        Ok(acc)
    }

    pub fn apply(&self, op: Op, v: &SparseVec, n: usize) -> Result<SparseVec> {
        match op {
            Op::D => self.d(v, n),
            Op::Hochschild => Ok(self.b(v, n)),
            Op::Kappa => self.kappa(v, n),
            Op::Connes => self.connes(v, n),
            Op::T => Ok(self.t(v, n)),
        }
    }

    /// Product of forms `(w) · (<b0> db1 ... dbm)`.
    pub fn mul_words(&self, w: usize, n: usize, u: usize, m: usize) -> SparseVec {
        let lead = self.lead(u, m);
        let rest = u - lead * self.pows[m];
        let left = if lead == 0 { SparseVec::unit(w) } else { self.right_mul_word(w, n, lead - 1) };
        SparseVec(left.0.into_iter().map(|(k, c)| (k * self.pows[m] + rest, c)).collect())
    }

    pub fn mul_forms(&self, v: &SparseVec, n: usize, x: &SparseVec, m: usize) -> SparseVec {
        let mut terms = Vec::new();
        for (w, c) in v.iter() {
            for (u, e) in x.iter() {
                let ce = c * e;
                for (k, f) in self.mul_words(*w, n, *u, m).0 {
                    terms.push((k, &ce * &f));
                }
            }
        }
        SparseVec::from_terms(terms)
    }
}

/// Equivariant forms `Omega^n_G(A)` up to a degree cap, one calculus per loop.
#[derive(Clone, Debug)]
pub struct FormModule {
    pub algebra: GAlgebra,
    pub cap: usize,
    pub ad: AdjointGroupoid,
    /// Indexed by the units of the adjoint groupoid.
    pub loops: Vec<LoopForms>,
    pub base: Vec<usize>,
}

/// Builds the form calculus; the cap must leave room for the operators.
pub fn build_forms(a: &GAlgebra, cap: usize) -> Result<FormModule> {
    if cap < 2 {
        return Err(Error::Invalid(format!("degree cap {cap} is below 2")));
    }
    let g = a.groupoid().clone();
    let ad = g.adjoint_groupoid();
    let tables: Vec<Arc<Vec<SparseVec>>> = a.mul.iter().map(|t| Arc::new(t.clone())).collect();
    let base: Vec<usize> = ad.loops.iter().map(|&l| g.src(l)).collect();
    let loops = ad
        .loops
        .iter()
        .map(|&l| {
            let x = g.src(l);
            let rho = &a.module.rho[g.inv(l)];
            let twist = (0..a.dim(x)).map(|j| col_sparse(rho, j)).collect();
            LoopForms::new(a.dim(x), cap, tables[x].clone(), twist)
        })
        .collect();
    Ok(FormModule { algebra: a.clone(), cap, ad, loops, base })
}

impl FormModule {
    pub fn n_loops(&self) -> usize {
        self.loops.len()
    }

    /// `dim Omega^n_G(A)`.
    pub fn dim(&self, n: usize) -> usize {
        self.loops.iter().map(|l| l.dim(n)).sum()
    }

    /// Transport along the adjoint arrow `j`, applying `rho(a)` to every entry.
    pub fn transport(&self, j: usize, v: &SparseVec, n: usize) -> SparseVec {
        let (a, _) = self.ad.pairs[j];
        let g = self.algebra.groupoid();
        let (s, r) = (g.src(a), g.tgt(a));
        let rho = &self.algebra.module.rho[a];
        let cols: Vec<SparseVec> = (0..self.algebra.dim(s)).map(|k| col_sparse(rho, k)).collect();
        v.map(|w| LoopForms::map_word(w, n, self.algebra.dim(s), self.algebra.dim(r), &cols))
    }

    /// Columns of an operator on `Omega^n` at a loop, in the `Omega` bases of source and target degrees.
    pub fn operator(&self, l: usize, op: Op, n: usize) -> Result<Vec<SparseVec>> {
        let lf = &self.loops[l];
        let m = (n as isize + op.shift()) as usize;
        (0..lf.dim(n))
            .into_par_iter()
            .map(|k| {
                let v = lf.apply(op, &SparseVec::unit(lf.basis_word(n, k)), n)?;
                Ok(SparseVec(v.0.into_iter().map(|(w, c)| (lf.word_coord(m, w), c)).collect()))
            })
            .collect()
    }
}

/// Outcome of one relation over all tested degrees.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RelationResult {
    pub relation: String,
    pub holds: bool,
    /// `(loop, degree, basis index)` of the first failure.
    pub witness: Option<(String, usize, usize)>,
}

/// Paramixed relation report for degrees `0..=max_degree`.
#[derive(Clone, Debug, Serialize)]
pub struct ParamixedReport {
    pub max_degree: usize,
    pub relations: Vec<RelationResult>,
}

impl ParamixedReport {
    pub fn all_pass(&self) -> bool {
        self.relations.iter().all(|r| r.holds)
    }
}

type Check = fn(&LoopForms, &SparseVec, usize) -> Result<bool>;

fn rel_kappa_d(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    let dv = l.d(v, n)?;
    Ok(l.kappa_pow(&dv, n + 1, n + 1)? == l.t(&dv, n + 1))
}

fn rel_kappa_n(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    let kn = l.kappa_pow(v, n, n)?;
    let rhs = l.t(v, n).add(&l.b(&l.kappa_pow(&l.d(v, n)?, n + 1, n)?, n + 1));
    Ok(kn == rhs)
}

fn rel_b_kappa(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    Ok(l.b(&l.kappa_pow(v, n, n)?, n) == l.b(&l.t(v, n), n))
}

fn rel_kappa_succ(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    let tv = l.t(v, n);
    let rhs = if n == 0 { tv.clone() } else { tv.sub(&l.d(&l.b(&tv, n), n - 1)?) };
    Ok(l.kappa_pow(v, n, n + 1)? == rhs)
}

fn rel_polynomial(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    let inner = l.kappa_pow(v, n, n)?.sub(&l.t(v, n));
    let outer = l.kappa_pow(&inner, n, n + 1)?.sub(&l.t(&inner, n));
    Ok(outer.is_zero())
}

fn rel_b_big_b(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    let bb = if n == 0 { SparseVec::zero() } else { l.connes(&l.b(v, n), n - 1)? };
    let lhs = bb.add(&l.b(&l.connes(v, n)?, n + 1));
    Ok(lhs == v.sub(&l.t(v, n)))
}

fn rel_b_squared(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    Ok(n < 2 || l.b(&l.b(v, n), n - 1).is_zero())
}

fn rel_big_b_squared(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    Ok(l.connes(&l.connes(v, n)?, n + 1)?.is_zero())
}

fn rel_t_commutes(l: &LoopForms, v: &SparseVec, n: usize) -> Result<bool> {
    for op in [Op::D, Op::Hochschild, Op::Kappa, Op::Connes] {
        if n == 0 && op == Op::Hochschild {
            continue;
        }
        let m = (n as isize + op.shift()) as usize;
        if l.apply(op, &l.t(v, n), n)? != l.t(&l.apply(op, v, n)?, m) {
            return Ok(false);
        }
    }
    Ok(true)
}

const RELATIONS: [(&str, Check); 9] = [
    ("kappa^(n+1) d = T d", rel_kappa_d),
    ("kappa^n = T + b kappa^n d", rel_kappa_n),
    ("b kappa^n = b T", rel_b_kappa),
    ("kappa^(n+1) = (id - d b) T", rel_kappa_succ),
    ("(kappa^(n+1) - T)(kappa^n - T) = 0", rel_polynomial),
    ("B b + b B = id - T", rel_b_big_b),
    ("b^2 = 0", rel_b_squared),
    ("B^2 = 0", rel_big_b_squared),
    ("T commutes with d, b, kappa, B", rel_t_commutes),
];

/// Checks every relation on every basis form of degree `0..=cap-2`, plus equivariance of `d` and `b`.
pub fn paramixed_report(fm: &FormModule) -> ParamixedReport {
    let max_degree = fm.cap - 2;
    let g = fm.ad.groupoid.clone();
    let mut relations: Vec<RelationResult> = RELATIONS
        .iter()
        .map(|(name, check)| {
            let witness = (0..=max_degree).find_map(|n| {
                fm.loops.iter().enumerate().find_map(|(li, l)| {
                    (0..l.dim(n))
                        .into_par_iter()
                        .find_first(|&k| !check(l, &SparseVec::unit(l.basis_word(n, k)), n).unwrap_or(false))
                        .map(|k| (g.units()[li].clone(), n, k))
                })
            });
            RelationResult { relation: name.to_string(), holds: witness.is_none(), witness }
        })
        .collect();
    let witness = (0..=max_degree).find_map(|n| {
        (0..g.n_arrows()).find_map(|j| {
            let (s, t) = (g.src(j), g.tgt(j));
            let (ls, lt) = (&fm.loops[s], &fm.loops[t]);
            (0..ls.dim(n))
                .into_par_iter()
                .find_first(|&k| {
                    let v = SparseVec::unit(ls.basis_word(n, k));
                    let moved = fm.transport(j, &v, n);
                    let d_ok = match (ls.d(&v, n), lt.d(&moved, n)) {
                        (Ok(a), Ok(b)) => fm.transport(j, &a, n + 1) == b,
                        _ => false,
                    };
                    let b_ok = n == 0 || fm.transport(j, &ls.b(&v, n), n - 1) == lt.b(&moved, n);
                    !(d_ok && b_ok)
                })
                .map(|k| (g.arrow_id(j).to_string(), n, k))
        })
    });
    relations.push(RelationResult { relation: "transport commutes with d and b".into(), holds: witness.is_none(), witness });
    ParamixedReport { max_degree, relations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroupoid;

    #[test]
    fn kappa_matches_its_definition() {
        for a in [GAlgebra::k_g(Arc::new(FiniteGroupoid::z2z3())), GAlgebra::o_g(Arc::new(FiniteGroupoid::flip()))] {
            let fm = build_forms(&a, 5).unwrap();
            for l in &fm.loops {
                for n in 0..=3 {
                    for k in 0..l.dim(n) {
                        let v = SparseVec::unit(l.basis_word(n, k));
                        let bd = l.b(&l.d(&v, n).unwrap(), n + 1);
                        let db = if n == 0 { SparseVec::zero() } else { l.d(&l.b(&v, n), n - 1).unwrap() };
                        assert_eq!(l.kappa(&v, n).unwrap(), v.sub(&bd).sub(&db));
                    }
                }
            }
        }
    }

    #[test]
    fn kappa_is_t_in_degree_zero() {
        let g = Arc::new(FiniteGroupoid::z2());
        let fm = build_forms(&GAlgebra::k_g(g), 4).unwrap();
        for l in &fm.loops {
            for k in 0..l.dim(0) {
                let v = SparseVec::unit(l.basis_word(0, k));
                assert_eq!(l.kappa(&v, 0).unwrap(), l.t(&v, 0));
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = Arc::new(FiniteGroupoid::z2());
        let fm = build_forms(&GAlgebra::trivial(g), 2).unwrap();
        let l = &fm.loops[0];
        let v = SparseVec::unit(l.encode(1, &[0, 0]));
        assert!(matches!(l.d(&v, 2), Err(Error::DegreeCap { .. })));
    }
}
