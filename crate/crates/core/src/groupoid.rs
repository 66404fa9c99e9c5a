//! Finite groupoids: validation, bisections, loops, orbits and cut-off functions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::GroupoidError;
use crate::funcspace::FinFn;
use crate::q::Q;

/// An arrow `tgt <- src`; units are referred to by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub id: String,
    pub src: usize,
    pub tgt: usize,
}

/// File form of a groupoid; unit arrows are implicit.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct RawGroupoid {
    pub units: Vec<String>,
    pub arrows: Vec<RawArrow>,
    #[serde(default)]
    pub mul: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inv: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RawArrow {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

/// A validated finite groupoid with canonical orderings.
///
/// Units are sorted by token, arrows by id; the unit arrow at a unit has the unit's token as id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    units: Vec<String>,
    arrows: Vec<Arrow>,
    mul: Vec<Option<usize>>,
    inv: Vec<usize>,
    unit_arrow: Vec<usize>,
    arrow_index: HashMap<String, usize>,
}

/// A set of arrows on which source and range are injective.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bisection(pub BTreeSet<usize>);

/// A G-orbit of units with the isotropy group at its least unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub units: Vec<usize>,
    pub rep: usize,
    pub isotropy: Vec<usize>,
}

/// The action groupoid of the adjoint action on loops.
///
/// Unit `i` is the loop `loops[i]`; arrow `j` is the pair `pairs[j] = (a, b)` acting `b -> a b a^-1`.
#[derive(Clone, Debug)]
pub struct AdjointGroupoid {
    pub groupoid: FiniteGroupoid,
    pub loops: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
    loop_unit: HashMap<usize, usize>,
    pair_arrow: HashMap<(usize, usize), usize>,
}

impl AdjointGroupoid {
    /// Unit of the action groupoid corresponding to a loop of the base groupoid.
    pub fn unit_of_loop(&self, l: usize) -> usize {
        self.loop_unit[&l]
    }

    /// Arrow `(a, b)` of the action groupoid.
    pub fn arrow_of_pair(&self, a: usize, b: usize) -> usize {
        self.pair_arrow[&(a, b)]
    }
}

impl FiniteGroupoid {
    /// Validates a raw description, synthesizing unit arrows and deriving missing inverses.
    pub fn validate(raw: &RawGroupoid) -> Result<FiniteGroupoid, GroupoidError> {
        let mut units = raw.units.clone();
        units.sort();
        for w in units.windows(2) {
            if w[0] == w[1] {
                return Err(GroupoidError::DuplicateId(w[0].clone()));
            }
        }
        let unit_pos: HashMap<&str, usize> = units.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();

        let mut all: Vec<Arrow> = units.iter().enumerate().map(|(i, u)| Arrow { id: u.clone(), src: i, tgt: i }).collect();
        for a in &raw.arrows {
            let look = |u: &str| {
                unit_pos
                    .get(u)
                    .copied()
                    .ok_or_else(|| GroupoidError::UnknownUnit { arrow: a.id.clone(), unit: u.to_string() })
            };
            all.push(Arrow { id: a.id.clone(), src: look(&a.src)?, tgt: look(&a.tgt)? });
        }
        all.sort_by(|a, b| a.id.cmp(&b.id));
        for w in all.windows(2) {
            if w[0].id == w[1].id {
                return Err(GroupoidError::DuplicateId(w[0].id.clone()));
            }
        }
        let n = all.len();
        let arrow_index: HashMap<String, usize> = all.iter().enumerate().map(|(i, a)| (a.id.clone(), i)).collect();
        let unit_arrow: Vec<usize> = units.iter().map(|u| arrow_index[u]).collect();
        let id = |i: usize| all[i].id.clone();

        let mut mul: Vec<Option<usize>> = vec![None; n * n];
        for a in 0..n {
            mul[unit_arrow[all[a].tgt] * n + a] = Some(a);
            mul[a * n + unit_arrow[all[a].src]] = Some(a);
        }
        let find = |s: &str| arrow_index.get(s).copied().ok_or_else(|| GroupoidError::UnknownArrow(s.to_string()));
        for [l, r, p] in &raw.mul {
            let (l, r, p) = (find(l)?, find(r)?, find(p)?);
            if all[l].src != all[r].tgt {
                return Err(GroupoidError::NonComposable { left: id(l), right: id(r) });
            }
            if all[p].tgt != all[l].tgt || all[p].src != all[r].src {
                return Err(GroupoidError::BadProduct { left: id(l), right: id(r), result: id(p) });
            }
            match mul[l * n + r] {
                Some(q) if q != p => {
                    let unit_involved = unit_arrow.contains(&l) || unit_arrow.contains(&r);
                    return Err(if unit_involved {
                        GroupoidError::NotNeutral(if unit_arrow.contains(&l) { id(l) } else { id(r) })
                    } else {
                        GroupoidError::ConflictingProduct { left: id(l), right: id(r) }
                    });
                }
                _ => mul[l * n + r] = Some(p),
            }
        }
        for l in 0..n {
            for r in 0..n {
                if all[l].src == all[r].tgt && mul[l * n + r].is_none() {
                    return Err(GroupoidError::MissingProduct { left: id(l), right: id(r) });
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = mul[a * n + b] else { continue };
                for c in 0..n {
                    let Some(bc) = mul[b * n + c] else { continue };
                    if mul[ab * n + c] != mul[a * n + bc] {
                        return Err(GroupoidError::Associativity { a: id(a), b: id(b), c: id(c) });
                    }
                }
            }
        }
        let is_inverse = |a: usize, b: usize| {
            mul[a * n + b] == Some(unit_arrow[all[a].tgt]) && mul[b * n + a] == Some(unit_arrow[all[a].src])
        };
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            let declared = raw.inv.as_ref().and_then(|m| m.get(&all[a].id));
            inv[a] = match declared {
                Some(b) => {
                    let b = find(b)?;
                    if !is_inverse(a, b) {
                        return Err(GroupoidError::MissingInverse(id(a)));
                    }
                    b
                }
                None => (0..n).find(|&b| is_inverse(a, b)).ok_or_else(|| GroupoidError::MissingInverse(id(a)))?,
            };
        }
        Ok(FiniteGroupoid { units, arrows: all, mul, inv, unit_arrow, arrow_index })
    }

    pub fn from_json(s: &str) -> crate::error::Result<FiniteGroupoid> {
        let raw: RawGroupoid = serde_json::from_str(s)?;
        Ok(FiniteGroupoid::validate(&raw)?)
    }

    /// Raw description listing every non-unit product.
    pub fn to_raw(&self) -> RawGroupoid {
        let non_unit: Vec<usize> = (0..self.n_arrows()).filter(|&a| !self.is_unit_arrow(a)).collect();
        let mut mul = Vec::new();
        for &a in &non_unit {
            for &b in &non_unit {
                if let Some(p) = self.mul(a, b) {
                    mul.push([self.arrows[a].id.clone(), self.arrows[b].id.clone(), self.arrows[p].id.clone()]);
                }
            }
        }
        RawGroupoid {
            units: self.units.clone(),
            arrows: non_unit
                .iter()
                .map(|&a| RawArrow {
                    id: self.arrows[a].id.clone(),
                    src: self.units[self.arrows[a].src].clone(),
                    tgt: self.units[self.arrows[a].tgt].clone(),
                })
                .collect(),
            mul,
            inv: None,
        }
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn unit_index(&self, token: &str) -> Option<usize> {
        self.units.binary_search_by(|u| u.as_str().cmp(token)).ok()
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrow_index.get(id).copied()
    }

    pub fn arrow_id(&self, a: usize) -> &str {
        &self.arrows[a].id
    }

    pub fn src(&self, a: usize) -> usize {
        self.arrows[a].src
    }

    pub fn tgt(&self, a: usize) -> usize {
        self.arrows[a].tgt
    }

    /// Product `a b`, defined when `src(a) = tgt(b)`.
    pub fn mul(&self, a: usize, b: usize) -> Option<usize> {
        self.mul[a * self.n_arrows() + b]
    }

    /// Product of a composable pair; panics otherwise.
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.mul(a, b).unwrap_or_else(|| panic!("arrows {} and {} are not composable", self.arrows[a].id, self.arrows[b].id))
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn unit_arrow(&self, x: usize) -> usize {
        self.unit_arrow[x]
    }

    pub fn is_unit_arrow(&self, a: usize) -> bool {
        self.unit_arrow[self.arrows[a].src] == a
    }

    pub fn is_loop(&self, a: usize) -> bool {
        self.arrows[a].src == self.arrows[a].tgt
    }

    /// Arrows with range `x`.
    pub fn range_fiber(&self, x: usize) -> Vec<usize> {
        (0..self.n_arrows()).filter(|&a| self.arrows[a].tgt == x).collect()
    }

    /// Arrows with source `x`.
    pub fn source_fiber(&self, x: usize) -> Vec<usize> {
        (0..self.n_arrows()).filter(|&a| self.arrows[a].src == x).collect()
    }

    /// The loop space, in arrow order.
    pub fn loops(&self) -> Vec<usize> {
        (0..self.n_arrows()).filter(|&a| self.is_loop(a)).collect()
    }

    /// Adjoint action `a b a^-1` of an arrow on a loop at its source.
    pub fn conj(&self, a: usize, b: usize) -> usize {
        debug_assert!(self.is_loop(b) && self.src(a) == self.src(b));
        self.compose(self.compose(a, b), self.inv(a))
    }

    /// Isotropy group at a unit.
    pub fn isotropy(&self, x: usize) -> Vec<usize> {
        (0..self.n_arrows()).filter(|&a| self.src(a) == x && self.tgt(a) == x).collect()
    }

    /// The least arrow `x -> y`, if any.
    pub fn arrow_between(&self, x: usize, y: usize) -> Option<usize> {
        (0..self.n_arrows()).find(|&a| self.src(a) == x && self.tgt(a) == y)
    }

    /// Orbits ordered by their least unit.
    pub fn orbits(&self) -> Vec<Orbit> {
        let mut seen = vec![false; self.n_units()];
        let mut out = Vec::new();
        for x in 0..self.n_units() {
            if seen[x] {
                continue;
            }
            let units: Vec<usize> = (0..self.n_units()).filter(|&y| self.arrow_between(x, y).is_some()).collect();
            for &y in &units {
                seen[y] = true;
            }
            out.push(Orbit { rep: x, isotropy: self.isotropy(x), units });
        }
        out
    }

    /// Index of the orbit containing a unit.
    pub fn orbit_of(&self, x: usize) -> usize {
        self.orbits().iter().position(|o| o.units.contains(&x)).expect("unit lies in an orbit")
    }

    /// Adjoint classes of loops, each sorted, ordered by least member.
    pub fn adjoint_classes(&self) -> Vec<Vec<usize>> {
        let loops = self.loops();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &b in &loops {
            if seen.contains(&b) {
                continue;
            }
            let class: BTreeSet<usize> = self.source_fiber(self.src(b)).into_iter().map(|a| self.conj(a, b)).collect();
            seen.extend(class.iter().copied());
            out.push(class.into_iter().collect());
        }
        out
    }

    /// Arrows fixing a loop under the adjoint action.
    pub fn centralizer(&self, b: usize) -> Vec<usize> {
        self.isotropy(self.src(b)).into_iter().filter(|&a| self.conj(a, b) == b).collect()
    }

    /// Cut-off function `c = d / lambda(d o s)` with `d` the indicator of orbit representatives.
    pub fn cutoff(&self) -> FinFn {
        let mut d = vec![Q::zero(); self.n_units()];
        for o in self.orbits() {
            d[o.rep] = Q::int(1);
        }
        let values = (0..self.n_units())
            .map(|x| {
                let lam: Q = self.range_fiber(x).iter().map(|&a| d[self.src(a)].clone()).sum();
                &d[x] / &lam
            })
            .collect();
        FinFn::new(self.units.clone(), values)
    }

    pub fn is_bisection(&self, u: &Bisection) -> bool {
        let srcs: BTreeSet<usize> = u.0.iter().map(|&a| self.src(a)).collect();
        let tgts: BTreeSet<usize> = u.0.iter().map(|&a| self.tgt(a)).collect();
        srcs.len() == u.0.len() && tgts.len() == u.0.len()
    }

    /// `UV = { a b | a in U, b in V, s(a) = r(b) }`.
    pub fn bisection_product(&self, u: &Bisection, v: &Bisection) -> Bisection {
        let mut out = BTreeSet::new();
        for &a in &u.0 {
            for &b in &v.0 {
                if let Some(p) = self.mul(a, b) {
                    out.insert(p);
                }
            }
        }
        Bisection(out)
    }

    /// The set of all unit arrows.
    pub fn unit_bisection(&self) -> Bisection {
        Bisection(self.unit_arrow.iter().copied().collect())
    }

    pub fn bisection(&self, ids: &[&str]) -> Option<Bisection> {
        let set = ids.iter().map(|i| self.arrow_index(i)).collect::<Option<BTreeSet<_>>>()?;
        let b = Bisection(set);
        self.is_bisection(&b).then_some(b)
    }

    /// Action groupoid `G x| G_ad`.
    pub fn adjoint_groupoid(&self) -> AdjointGroupoid {
        let loops = self.loops();
        let mut raw = RawGroupoid { units: loops.iter().map(|&b| self.arrows[b].id.clone()).collect(), ..Default::default() };
        let name = |a: usize, b: usize| format!("{}|{}", self.arrows[a].id, self.arrows[b].id);
        let mut pair_list = Vec::new();
        for &b in &loops {
            for a in self.source_fiber(self.src(b)) {
                pair_list.push((a, b));
                if !self.is_unit_arrow(a) {
                    raw.arrows.push(RawArrow {
                        id: name(a, b),
                        src: self.arrows[b].id.clone(),
                        tgt: self.arrows[self.conj(a, b)].id.clone(),
                    });
                }
            }
        }
        let pid = |a: usize, b: usize| if self.is_unit_arrow(a) { self.arrows[b].id.clone() } else { name(a, b) };
        for &(a, b) in &pair_list {
            let b2 = self.conj(a, b);
            for a2 in self.source_fiber(self.src(b2)) {
                if self.is_unit_arrow(a) || self.is_unit_arrow(a2) {
                    continue;
                }
                raw.mul.push([pid(a2, b2), pid(a, b), pid(self.compose(a2, a), b)]);
            }
        }
        let groupoid = FiniteGroupoid::validate(&raw).expect("action groupoid is valid");
        let mut pairs = vec![(0, 0); groupoid.n_arrows()];
        let mut pair_arrow = HashMap::new();
        for &(a, b) in &pair_list {
            let j = groupoid.arrow_index(&pid(a, b)).unwrap();
            pairs[j] = (a, b);
            pair_arrow.insert((a, b), j);
        }
        let ordered_loops: Vec<usize> = groupoid.units().iter().map(|u| self.arrow_index(u).unwrap()).collect();
        let loop_unit = ordered_loops.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        AdjointGroupoid { groupoid, loops: ordered_loops, pairs, loop_unit, pair_arrow }
    }

    /// Full subgroupoid on the given units.
    pub fn restrict(&self, units: &[usize]) -> FiniteGroupoid {
        let keep: BTreeSet<usize> = units.iter().copied().collect();
        let arrows: Vec<usize> =
            (0..self.n_arrows()).filter(|&a| keep.contains(&self.src(a)) && keep.contains(&self.tgt(a))).collect();
        let raw = RawGroupoid {
            units: keep.iter().map(|&x| self.units[x].clone()).collect(),
            arrows: arrows
                .iter()
                .filter(|&&a| !self.is_unit_arrow(a))
                .map(|&a| RawArrow {
                    id: self.arrows[a].id.clone(),
                    src: self.units[self.src(a)].clone(),
                    tgt: self.units[self.tgt(a)].clone(),
                })
                .collect(),
            mul: arrows
                .iter()
                .flat_map(|&a| arrows.iter().map(move |&b| (a, b)))
                .filter_map(|(a, b)| {
                    self.mul(a, b).map(|p| [self.arrows[a].id.clone(), self.arrows[b].id.clone(), self.arrows[p].id.clone()])
                })
                .collect(),
            inv: None,
        };
        FiniteGroupoid::validate(&raw).expect("full subgroupoid is valid")
    }

    /// The orbit space as a groupoid with only unit arrows; unit tokens are the representatives.
    pub fn quotient(&self) -> FiniteGroupoid {
        FiniteGroupoid::space(self.orbits().iter().map(|o| self.units[o.rep].clone()).collect())
    }

    /// A set viewed as a groupoid of units.
    pub fn space(points: Vec<String>) -> FiniteGroupoid {
        FiniteGroupoid::validate(&RawGroupoid { units: points, ..Default::default() }).expect("unit groupoid is valid")
    }

    /// Cyclic group of order `n` on one unit `e`, with generator powers named `g`, `g2`, ...
    pub fn cyclic(n: usize) -> FiniteGroupoid {
        group_raw("e", n, "g").map(|r| FiniteGroupoid::validate(&r).unwrap()).unwrap()
    }

    /// The one-unit group `Z/2 = {e, g}`.
    pub fn z2() -> FiniteGroupoid {
        FiniteGroupoid::cyclic(2)
    }

    /// Pair groupoid on `{1, 2}`; arrow `(i,j)` goes `j -> i`.
    pub fn pair2() -> FiniteGroupoid {
        let raw = RawGroupoid {
            units: vec!["1".into(), "2".into()],
            arrows: vec![
                RawArrow { id: "(1,2)".into(), src: "2".into(), tgt: "1".into() },
                RawArrow { id: "(2,1)".into(), src: "1".into(), tgt: "2".into() },
            ],
            mul: vec![["(1,2)".into(), "(2,1)".into(), "1".into()], ["(2,1)".into(), "(1,2)".into(), "2".into()]],
            inv: None,
        };
        FiniteGroupoid::validate(&raw).unwrap()
    }

    /// Disjoint union `Z/2 ⊔ Z/3` on units `u` (generator `g`) and `v` (generators `h`, `h2`).
    pub fn z2z3() -> FiniteGroupoid {
        let a = group_raw("u", 2, "g").unwrap();
        let b = group_raw("v", 3, "h").unwrap();
        let raw = RawGroupoid {
            units: [a.units, b.units].concat(),
            arrows: [a.arrows, b.arrows].concat(),
            mul: [a.mul, b.mul].concat(),
            inv: None,
        };
        FiniteGroupoid::validate(&raw).unwrap()
    }

    /// Transformation groupoid of `Z/2` flipping `{a, b}`; `ga: a -> b`, `gb: b -> a`.
    pub fn flip() -> FiniteGroupoid {
        let raw = RawGroupoid {
            units: vec!["a".into(), "b".into()],
            arrows: vec![
                RawArrow { id: "ga".into(), src: "a".into(), tgt: "b".into() },
                RawArrow { id: "gb".into(), src: "b".into(), tgt: "a".into() },
            ],
            mul: vec![["ga".into(), "gb".into(), "b".into()], ["gb".into(), "ga".into(), "a".into()]],
            inv: None,
        };
        FiniteGroupoid::validate(&raw).unwrap()
    }

    /// Built-in corpus by name.
    pub fn builtin(name: &str) -> Option<FiniteGroupoid> {
        match name {
            "z2" => Some(FiniteGroupoid::z2()),
            "pair2" => Some(FiniteGroupoid::pair2()),
            "z2z3" => Some(FiniteGroupoid::z2z3()),
            "flip" => Some(FiniteGroupoid::flip()),
            "trivial" => Some(FiniteGroupoid::cyclic(1)),
            "z3" => Some(FiniteGroupoid::cyclic(3)),
            _ => None,
        }
    }
}

/// Cyclic group on one unit; element `k` is named `{gen}{k}` (with `{gen}` for `k = 1`).
fn group_raw(unit: &str, n: usize, gen: &str) -> Option<RawGroupoid> {
    if n == 0 {
        return None;
    }
    let name = |k: usize| match k % n {
        0 => unit.to_string(),
        1 => gen.to_string(),
        k => format!("{gen}{k}"),
    };
    let arrows = (1..n).map(|k| RawArrow { id: name(k), src: unit.into(), tgt: unit.into() }).collect();
    let mut mul = Vec::new();
    for i in 1..n {
        for j in 1..n {
            mul.push([name(i), name(j), name(i + j)]);
        }
    }
    Some(RawGroupoid { units: vec![unit.into()], arrows, mul, inv: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair2_shape() {
        let g = FiniteGroupoid::pair2();
        assert_eq!(g.n_arrows(), 4);
        assert_eq!(g.orbits().len(), 1);
        assert_eq!(g.loops().len(), 2);
    }

    #[test]
    fn rejects_noncomposable_square() {
        let raw = RawGroupoid {
            units: vec!["x".into(), "y".into()],
            arrows: vec![RawArrow { id: "g".into(), src: "x".into(), tgt: "y".into() }],
            mul: vec![["g".into(), "g".into(), "g".into()]],
            inv: None,
        };
        let err = FiniteGroupoid::validate(&raw).unwrap_err();
        assert!(err.to_string().contains("non-composable pair"));
    }

    #[test]
    fn adjoint_groupoid_of_z2z3() {
        let g = FiniteGroupoid::z2z3();
        let ad = g.adjoint_groupoid();
        assert_eq!(ad.groupoid.n_units(), 5);
        assert_eq!(ad.groupoid.n_arrows(), 2 * 2 + 3 * 3);
    }
}
