//! Exact dense and sparse linear algebra over `Q`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::q::Q;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|q| q.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Q::int(x)).collect()).collect())
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<Q>]) -> Matrix {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Q::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Matrix::identity(self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut m = Matrix::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let b = &o[(k, c)];
                    if !b.is_zero() {
                        m[(r, c)] += a * b;
                    }
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut s = Q::zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Kronecker product; index `(i, j)` of the result is `i * o.rows + j`.
    pub fn kron(&self, o: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows * o.rows, self.cols * o.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = &self[(r1, c1)];
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..o.rows {
                    for c2 in 0..o.cols {
                        let b = &o[(r2, c2)];
                        if !b.is_zero() {
                            m[(r1 * o.rows + r2, c1 * o.cols + c2)] = a * b;
                        }
                    }
                }
            }
        }
        m
    }

    /// Block-diagonal sum.
    pub fn direct_sum(blocks: &[Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(r, c);
        let (mut or, mut oc) = (0, 0);
        for b in blocks {
            m.set_block(or, oc, b);
            or += b.rows;
            oc += b.cols;
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)].clone();
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = self[(r0 + r, c0 + c)].clone();
            }
        }
        m
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].recip();
            for c in col..m.cols {
                if !m[(row, c)].is_zero() {
                    m[(row, c)] = &m[(row, c)] * &inv;
                }
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = m[(r, col)].clone();
                for c in col..m.cols {
                    if m[(row, c)].is_zero() {
                        continue;
                    }
                    let delta = &f * &m[(row, c)];
                    m[(r, c)] -= &delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // row-reduce whichever orientation is cheaper
        if self.rows > self.cols {
            return self.transpose().rank();
        }
        self.rref().1.len()
    }

    /// Basis of the null space; each vector has first nonzero coordinate 1.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&r[(i, free)];
            }
            basis.push(normalize_leading(v));
        }
        basis
    }

    /// Some solution of `self * x = b`, if one exists.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        aug.set_block(0, 0, self);
        for (i, x) in b.iter().enumerate() {
            aug[(i, self.cols)] = x.clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    /// Solves `self * X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Option<Matrix> {
        let mut aug = Matrix::zeros(self.rows, self.cols + b.cols);
        aug.set_block(0, 0, self);
        aug.set_block(0, self.cols, b);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(self.cols, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x[(p, c)] = r[(i, self.cols + c)].clone();
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve_matrix(&Matrix::identity(self.rows))?;
        if self.mul(&x).is_identity() {
            Some(x)
        } else {
            None
        }
    }

    /// Basis (as columns) of the column space, taken from the original pivot columns.
    pub fn column_basis(&self) -> Matrix {
        let (_, pivots) = self.rref();
        let cols: Vec<Vec<Q>> = pivots.iter().map(|&p| self.col(p)).collect();
        Matrix::from_cols(self.rows, &cols)
    }

    pub fn hstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.rows, o.rows);
        let mut m = Matrix::zeros(self.rows, self.cols + o.cols);
        m.set_block(0, 0, self);
        m.set_block(0, self.cols, o);
        m
    }

    pub fn vstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.cols);
        let mut m = Matrix::zeros(self.rows + o.rows, self.cols);
        m.set_block(0, 0, self);
        m.set_block(self.rows, 0, o);
        m
    }
}

fn normalize_leading(mut v: Vec<Q>) -> Vec<Q> {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        if !lead.is_one() {
            let inv = lead.recip();
            for x in v.iter_mut() {
                *x = &*x * &inv;
            }
        }
    }
    v
}

/// Sparse vector: sorted, duplicate-free `(index, nonzero coefficient)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SparseVec(pub Vec<(usize, Q)>);

impl SparseVec {
    pub fn zero() -> SparseVec {
        SparseVec(Vec::new())
    }

    pub fn unit(i: usize) -> SparseVec {
        SparseVec(vec![(i, Q::one())])
    }

    /// Sorts, merges duplicates and drops zeros.
    pub fn from_terms(mut terms: Vec<(usize, Q)>) -> SparseVec {
        terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(usize, Q)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            match out.last_mut() {
                Some((j, d)) if *j == i => *d += &c,
                _ => {
                    if let Some((_, d)) = out.last() {
                        if d.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((i, c));
                }
            }
        }
        if let Some((_, d)) = out.last() {
            if d.is_zero() {
                out.pop();
            }
        }
        SparseVec(out)
    }

    pub fn from_dense(v: &[Q]) -> SparseVec {
        SparseVec(v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect())
    }

    pub fn to_dense(&self, n: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); n];
        for (i, c) in &self.0 {
            v[*i] = c.clone();
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Q)> {
        self.0.iter()
    }

    pub fn get(&self, i: usize) -> Q {
        match self.0.binary_search_by_key(&i, |t| t.0) {
            Ok(k) => self.0[k].1.clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn scale(&self, s: &Q) -> SparseVec {
        if s.is_zero() {
            return SparseVec::zero();
        }
        SparseVec(self.0.iter().map(|(i, c)| (*i, c * s)).collect())
    }

    /// `self + s * o`, by a linear merge.
    pub fn add_scaled(&self, o: &SparseVec, s: &Q) -> SparseVec {
        if s.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), o.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, y * s));
                        b.next();
                    } else {
                        let v = x + &(y * s);
                        if !v.is_zero() {
                            out.push((*i, v));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, y * s));
                    b.next();
                }
                (None, None) => break,
            }
        }
        SparseVec(out)
    }

    pub fn add(&self, o: &SparseVec) -> SparseVec {
        self.add_scaled(o, &Q::one())
    }

    pub fn sub(&self, o: &SparseVec) -> SparseVec {
        self.add_scaled(o, &-Q::one())
    }

    /// Applies a linear map given on basis vectors.
    pub fn map(&self, f: impl Fn(usize) -> SparseVec) -> SparseVec {
        let mut terms = Vec::new();
        for (i, c) in &self.0 {
            for (j, d) in f(*i).0 {
                terms.push((j, c * &d));
            }
        }
        SparseVec::from_terms(terms)
    }

    /// Fallible variant of [`SparseVec::map`].
    pub fn try_map<E>(&self, f: impl Fn(usize) -> Result<SparseVec, E>) -> Result<SparseVec, E> {
        let mut terms = Vec::new();
        for (i, c) in &self.0 {
            for (j, d) in f(*i)?.0 {
                terms.push((j, c * &d));
            }
        }
        Ok(SparseVec::from_terms(terms))
    }
}

/// Incrementally built echelon basis of a subspace of `Q^n`, sparse rows with leading coefficient 1.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: Vec<Option<Vec<(usize, Q)>>>,
    rank: usize,
}

impl Echelon {
    pub fn new(dim: usize) -> Echelon {
        Echelon { dim, rows: vec![None; dim], rank: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.rows[i].is_some()
    }

    /// The stored row with pivot `i`, leading coefficient 1.
    pub fn row(&self, i: usize) -> Option<&[(usize, Q)]> {
        self.rows[i].as_deref()
    }

    /// Fully reduces `v` so that no pivot index remains.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut w: BTreeMap<usize, Q> = v.0.iter().cloned().collect();
        let mut cursor = 0;
        loop {
            let next = w.range(cursor..).find(|(k, _)| self.rows[**k].is_some()).map(|(k, c)| (*k, c.clone()));
            let Some((k, c)) = next else { break };
            for (j, a) in self.rows[k].as_ref().unwrap() {
                let e = w.entry(*j).or_insert_with(Q::zero);
                *e -= &c * a;
                if e.is_zero() {
                    w.remove(j);
                }
            }
            cursor = k + 1;
        }
        SparseVec(w.into_iter().collect())
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        if self.rank == self.dim {
            return false;
        }
        let r = self.reduce(v);
        let Some((lead, c)) = r.0.first().cloned() else { return false };
        let inv = c.recip();
        let row: Vec<(usize, Q)> = r.0.into_iter().map(|(j, a)| (j, &a * &inv)).collect();
        self.rows[lead] = Some(row);
        self.rank += 1;
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Indices not used as pivots; their unit vectors form a basis of the quotient.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.rows[i].is_none()).collect()
    }
}

/// A subspace quotient `Q^n / S` with canonical coordinates on the free indices of an echelon basis of `S`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub echelon: Echelon,
    pub free: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl Quotient {
    pub fn new(echelon: Echelon) -> Quotient {
        let free = echelon.free_indices();
        let mut position = vec![None; echelon.dim()];
        for (k, &i) in free.iter().enumerate() {
            position[i] = Some(k);
        }
        Quotient { echelon, free, position }
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Coordinates of the class of `v`.
    pub fn project(&self, v: &SparseVec) -> Vec<Q> {
        let r = self.echelon.reduce(v);
        let mut out = vec![Q::zero(); self.free.len()];
        for (i, c) in r.0 {
            out[self.position[i].expect("reduced vector has pivot entry")] = c;
        }
        out
    }

    /// Canonical representative of the `k`-th quotient basis vector.
    pub fn lift(&self, k: usize) -> SparseVec {
        SparseVec::unit(self.free[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_rank() {
        let m = Matrix::from_ints(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(Q::is_zero));
        assert_eq!(k[0][0], Q::one());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_ints(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert!(Matrix::from_ints(&[&[1, 1], &[1, 1]]).inverse().is_none());
    }

    #[test]
    fn echelon_quotient() {
        let mut e = Echelon::new(3);
        e.insert(&SparseVec::from_terms(vec![(0, Q::one()), (1, -Q::one())]));
        e.insert(&SparseVec::from_terms(vec![(1, Q::one()), (2, -Q::one())]));
        let q = Quotient::new(e);
        assert_eq!(q.dim(), 1);
        assert_eq!(q.project(&SparseVec::unit(0)), q.project(&SparseVec::unit(2)));
    }

    #[test]
    fn sparse_merge() {
        let a = SparseVec::from_terms(vec![(3, Q::int(1)), (1, Q::int(2)), (3, Q::int(-1))]);
        assert_eq!(a, SparseVec(vec![(1, Q::int(2))]));
        let b = a.add_scaled(&SparseVec::unit(1), &Q::int(-2));
        assert!(b.is_zero());
    }
}
