//! Rational functions on finite sets: pullback, integration over range fibers, balanced tensors.

use num_traits::{One, Zero};

use crate::groupoid::FiniteGroupoid;
use crate::q::Q;

/// A function from a finite ordered set to the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinFn {
    pub base: Vec<String>,
    pub values: Vec<Q>,
}

impl FinFn {
    pub fn new(base: Vec<String>, values: Vec<Q>) -> FinFn {
        assert_eq!(base.len(), values.len(), "one value per point");
        FinFn { base, values }
    }

    pub fn zero(base: Vec<String>) -> FinFn {
        let n = base.len();
        FinFn { base, values: vec![Q::zero(); n] }
    }

    pub fn indicator(base: Vec<String>, support: &[usize]) -> FinFn {
        let mut f = FinFn::zero(base);
        for &i in support {
            f.values[i] = Q::one();
        }
        f
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> &Q {
        &self.values[i]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Q::is_zero)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.values[i].is_zero()).collect()
    }

    fn zip(&self, o: &FinFn, f: impl Fn(&Q, &Q) -> Q) -> FinFn {
        assert_eq!(self.base, o.base, "functions on different sets");
        FinFn { base: self.base.clone(), values: self.values.iter().zip(&o.values).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, o: &FinFn) -> FinFn {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &FinFn) -> FinFn {
        self.zip(o, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, o: &FinFn) -> FinFn {
        self.zip(o, |a, b| a * b)
    }

    pub fn scale(&self, s: &Q) -> FinFn {
        FinFn { base: self.base.clone(), values: self.values.iter().map(|a| a * s).collect() }
    }
}

/// `(phi^* f)(x) = f(phi(x))`; `phi[x]` is the image of point `x` of `base`.
pub fn pullback(base: Vec<String>, phi: &[usize], f: &FinFn) -> FinFn {
    assert_eq!(base.len(), phi.len());
    FinFn::new(base, phi.iter().map(|&y| f.values[y].clone()).collect())
}

/// `lambda(f)(x) = sum of f over arrows with range x`.
pub fn integrate(g: &FiniteGroupoid, f: &FinFn) -> FinFn {
    assert_eq!(f.len(), g.n_arrows());
    let mut out = vec![Q::zero(); g.n_units()];
    for a in 0..g.n_arrows() {
        out[g.tgt(a)] += &f.values[a];
    }
    FinFn::new(g.units().to_vec(), out)
}

/// Fibre product `X x_{p,q} Y` as index pairs in lexicographic order.
pub fn fibre_product(p: &[usize], q: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (x, &px) in p.iter().enumerate() {
        for (y, &qy) in q.iter().enumerate() {
            if px == qy {
                out.push((x, y));
            }
        }
    }
    out
}

/// `(f ⊗ g)(x, y) = f(x) g(y)` on the fibre product.
pub fn balanced_tensor(f: &FinFn, g: &FinFn, p: &[usize], q: &[usize]) -> FinFn {
    let pairs = fibre_product(p, q);
    let base = pairs.iter().map(|&(x, y)| format!("({},{})", f.base[x], g.base[y])).collect();
    let values = pairs.iter().map(|&(x, y)| &f.values[x] * &g.values[y]).collect();
    FinFn::new(base, values)
}
