//! Exact rationals with an `i64` fast path that promotes to arbitrary precision on overflow.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number.
///
/// Values that fit are always stored in the small representation, so structural
/// equality coincides with numeric equality.
#[derive(Clone)]
pub enum Q {
    Small(Ratio<i64>),
    Big(Box<BigRational>),
}

impl Q {
    pub fn new(n: i64, d: i64) -> Q {
        assert!(d != 0, "zero denominator");
        if n == i64::MIN || d == i64::MIN {
            return Q::from_big(BigRational::new(BigInt::from(n), BigInt::from(d)));
        }
        Q::Small(Ratio::new(n, d))
    }

    pub fn int(n: i64) -> Q {
        if n == i64::MIN {
            return Q::Big(Box::new(BigRational::from_integer(BigInt::from(n))));
        }
        Q::Small(Ratio::from_integer(n))
    }

    fn from_big(b: BigRational) -> Q {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => Q::Small(Ratio::new_raw(n, d)),
            _ => Q::Big(Box::new(b)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Q::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Q::Big(b) => (**b).clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Q::Small(r) => *r.denom() == 1,
            Q::Big(b) => b.is_integer(),
        }
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "reciprocal of zero");
        match self {
            Q::Small(r) if *r.numer() != i64::MIN => Q::Small(r.recip()),
            _ => Q::from_big(self.to_big().recip()),
        }
    }

    pub fn pow(&self, e: u32) -> Q {
        let mut acc = Q::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn signum(&self) -> i32 {
        match self {
            Q::Small(r) => r.numer().signum() as i32,
            Q::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }
}

fn small_op(
    a: &Q,
    b: &Q,
    fast: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
    slow: impl Fn(BigRational, BigRational) -> BigRational,
) -> Q {
    if let (Q::Small(x), Q::Small(y)) = (a, b) {
        if let Some(r) = fast(x, y) {
            if *r.numer() != i64::MIN && *r.denom() != i64::MIN {
                return Q::Small(r);
            }
        }
    }
    Q::from_big(slow(a.to_big(), b.to_big()))
}

impl<'a> Add<&'a Q> for &'a Q {
    type Output = Q;
    fn add(self, o: &Q) -> Q {
        small_op(self, o, |x, y| x.checked_add(y), |x, y| x + y)
    }
}

impl<'a> Sub<&'a Q> for &'a Q {
    type Output = Q;
    fn sub(self, o: &Q) -> Q {
        small_op(self, o, |x, y| x.checked_sub(y), |x, y| x - y)
    }
}

impl<'a> Mul<&'a Q> for &'a Q {
    type Output = Q;
    fn mul(self, o: &Q) -> Q {
        small_op(self, o, |x, y| x.checked_mul(y), |x, y| x * y)
    }
}

impl<'a> Div<&'a Q> for &'a Q {
    type Output = Q;
    fn div(self, o: &Q) -> Q {
        assert!(!o.is_zero(), "division by zero");
        small_op(self, o, |x, y| x.checked_div(y), |x, y| x / y)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Q> for Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Q> for Q {
            type Output = Q;
            fn $m(self, o: &Q) -> Q {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Q> for &'a Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::Small(r) if *r.numer() != i64::MIN => Q::Small(-*r),
            _ => Q::from_big(-self.to_big()),
        }
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        -&self
    }
}

impl AddAssign<&Q> for Q {
    fn add_assign(&mut self, o: &Q) {
        *self = &*self + o;
    }
}

impl AddAssign<Q> for Q {
    fn add_assign(&mut self, o: Q) {
        *self = &*self + &o;
    }
}

impl SubAssign<&Q> for Q {
    fn sub_assign(&mut self, o: &Q) {
        *self = &*self - o;
    }
}

impl SubAssign<Q> for Q {
    fn sub_assign(&mut self, o: Q) {
        *self = &*self - &o;
    }
}

impl MulAssign<&Q> for Q {
    fn mul_assign(&mut self, o: &Q) {
        *self = &*self * o;
    }
}

impl Zero for Q {
    fn zero() -> Q {
        Q::int(0)
    }
    fn is_zero(&self) -> bool {
        match self {
            Q::Small(r) => r.is_zero(),
            Q::Big(b) => b.is_zero(),
        }
    }
}

impl One for Q {
    fn one() -> Q {
        Q::int(1)
    }
}

impl Sum for Q {
    fn sum<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Q> for Q {
    fn sum<I: Iterator<Item = &'a Q>>(iter: I) -> Q {
        iter.fold(Q::zero(), |a, b| a + b)
    }
}

impl Product for Q {
    fn product<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::one(), |a, b| a * b)
    }
}

impl PartialEq for Q {
    fn eq(&self, o: &Q) -> bool {
        match (self, o) {
            (Q::Small(a), Q::Small(b)) => a == b,
            (Q::Big(a), Q::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Q {}

impl Hash for Q {
    fn hash<H: Hasher>(&self, h: &mut H) {
        match self {
            Q::Small(r) => r.hash(h),
            Q::Big(b) => b.hash(h),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, o: &Q) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Q {
    fn cmp(&self, o: &Q) -> Ordering {
        match (self, o) {
            (Q::Small(a), Q::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::int(n)
    }
}

impl From<i32> for Q {
    fn from(n: i32) -> Q {
        Q::int(n as i64)
    }
}

impl From<usize> for Q {
    fn from(n: usize) -> Q {
        Q::from_big(BigRational::from_integer(BigInt::from(n)))
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::Small(r) => write!(f, "{r}"),
            Q::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Error for malformed rational literals.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseQError(pub String);

impl FromStr for Q {
    type Err = ParseQError;
    fn from_str(s: &str) -> Result<Q, ParseQError> {
        let t = s.trim();
        let bad = || ParseQError(s.to_string());
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n = BigInt::from_str(n).map_err(|_| bad())?;
        let d = BigInt::from_str(d).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Q::from_big(BigRational::new(n, d)))
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Q::Small(r) if *r.denom() == 1 => s.serialize_i64(*r.numer()),
            _ => s.serialize_str(&self.to_string()),
        }
    }
}

struct QVisitor;

impl<'de> Visitor<'de> for QVisitor {
    type Value = Q;
    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a string \"p/q\"")
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
        Ok(Q::int(v))
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
        Ok(Q::from_big(BigRational::from_integer(BigInt::from(v))))
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Q::int(i64::MAX);
        let s = &big + &big;
        assert!(matches!(s, Q::Big(_)));
        let back = &s - &big;
        assert_eq!(back, big);
        assert!(matches!(back, Q::Small(_)));
    }

    #[test]
    fn parse_and_print() {
        let q: Q = "6/-4".parse().unwrap();
        assert_eq!(q, Q::new(-3, 2));
        assert_eq!(q.to_string(), "-3/2");
        assert!("1/0".parse::<Q>().is_err());
        let j: Q = serde_json::from_str("\"2/3\"").unwrap();
        assert_eq!(j, Q::new(2, 3));
        let k: Q = serde_json::from_str("7").unwrap();
        assert_eq!(serde_json::to_string(&k).unwrap(), "7");
    }

    #[test]
    fn min_value_negation() {
        let m = Q::int(i64::MIN + 1) - Q::int(1);
        assert_eq!(-(-m.clone()), m);
    }
}
