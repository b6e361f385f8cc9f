//! Finite complete lattices presented by their order relation.
//!
//! A [`FinLattice`] is built from `leq` alone. Construction validates the
//! order axioms, then computes and caches join and meet tables together with
//! the join-irreducible elements. Element ids are opaque strings; internally
//! elements are indices in lexicographic id order, so every scan over a
//! lattice visits elements in canonical order.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{Value, Verdict, Witness};

/// Serialised form: element ids plus every pair `[a, b]` with `a <= b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeData {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct FinLattice {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    up: Vec<FixedBitSet>,
    join: Vec<u32>,
    meet: Vec<u32>,
    bottom: usize,
    top: usize,
    irreducibles: Vec<usize>,
}

impl PartialEq for FinLattice {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.up == other.up
    }
}

impl Eq for FinLattice {}

fn el(ids: &[String], i: usize) -> Value {
    Value::Element(ids[i].clone())
}

/// Parses ids and pairs into a sorted id list and up-set bitsets.
fn parse(data: &LatticeData) -> Result<(Vec<String>, Vec<FixedBitSet>)> {
    if data.elements.is_empty() {
        return Err(Error::Malformed("lattice has no elements".into()));
    }
    let mut ids = data.elements.clone();
    ids.sort();
    for w in ids.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Malformed(format!("duplicate element id `{}`", w[0])));
        }
    }
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let n = ids.len();
    let mut up = vec![FixedBitSet::with_capacity(n); n];
    for (a, b) in &data.leq {
        let ia = *index.get(a.as_str()).ok_or_else(|| Error::UnknownElement(a.clone()))?;
        let ib = *index.get(b.as_str()).ok_or_else(|| Error::UnknownElement(b.clone()))?;
        up[ia].insert(ib);
    }
    Ok((ids, up))
}

/// Checks the order and lattice axioms; on success returns the full structure.
fn analyse(ids: Vec<String>, up: Vec<FixedBitSet>) -> std::result::Result<FinLattice, Witness> {
    let n = ids.len();
    for a in 0..n {
        if !up[a].contains(a) {
            return Err(Witness::new("reflexivity").with("x", el(&ids, a)));
        }
    }
    for a in 0..n {
        for b in up[a].ones() {
            if b != a && up[b].contains(a) {
                return Err(Witness::new("antisymmetry")
                    .with("a", el(&ids, a))
                    .with("b", el(&ids, b)));
            }
        }
    }
    for a in 0..n {
        for b in up[a].ones() {
            if !up[b].is_subset(&up[a]) {
                let c = up[b].difference(&up[a]).next().expect("nonempty difference");
                return Err(Witness::new("transitivity")
                    .with("a", el(&ids, a))
                    .with("b", el(&ids, b))
                    .with("c", el(&ids, c)));
            }
        }
    }
    let mut down = vec![FixedBitSet::with_capacity(n); n];
    for a in 0..n {
        for b in up[a].ones() {
            down[b].insert(a);
        }
    }
    let Some(bottom) = (0..n).find(|&a| up[a].count_ones(..) == n) else {
        return Err(Witness::new("least upper bound of the empty set (bottom) exists"));
    };
    let Some(top) = (0..n).find(|&a| down[a].count_ones(..) == n) else {
        return Err(Witness::new("greatest lower bound of the empty set (top) exists"));
    };

    // In a linear extension the least element of an up-closed set is its
    // first member, and the greatest of a down-closed set its last; such a
    // candidate is the bound iff its own cone has the same size.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&a| down[a].count_ones(..));
    let mut pos = vec![0usize; n];
    for (p, &a) in order.iter().enumerate() {
        pos[a] = p;
    }
    let relabel = |sets: &[FixedBitSet]| -> Vec<FixedBitSet> {
        sets.iter()
            .map(|s| {
                let mut out = FixedBitSet::with_capacity(n);
                s.ones().for_each(|x| out.insert(pos[x]));
                out
            })
            .collect()
    };
    let (up_l, down_l) = (relabel(&up), relabel(&down));
    let up_count: Vec<u32> = up.iter().map(|s| s.count_ones(..) as u32).collect();
    let down_count: Vec<u32> = down.iter().map(|s| s.count_ones(..) as u32).collect();
    let bound = |x: &FixedBitSet, y: &FixedBitSet, last: bool| -> Option<(usize, u32)> {
        let (xs, ys) = (x.as_slice(), y.as_slice());
        let mut count = 0u32;
        let mut edge = None;
        for (w, (p, q)) in xs.iter().zip(ys).enumerate() {
            let v = p & q;
            if v != 0 {
                count += v.count_ones();
                let bits = usize::BITS as usize;
                if last {
                    edge = Some(w * bits + (bits - 1 - v.leading_zeros() as usize));
                } else if edge.is_none() {
                    edge = Some(w * bits + v.trailing_zeros() as usize);
                }
            }
        }
        edge.map(|e| (order[e], count))
    };
    let mut join = vec![0u32; n * n];
    let mut meet = vec![0u32; n * n];
    for a in 0..n {
        for b in a..n {
            let Some(j) = bound(&up_l[a], &up_l[b], false).and_then(|(c, k)| (up_count[c] == k).then_some(c)) else {
                return Err(Witness::new("binary join exists")
                    .with("a", el(&ids, a))
                    .with("b", el(&ids, b)));
            };
            let Some(m) = bound(&down_l[a], &down_l[b], true).and_then(|(c, k)| (down_count[c] == k).then_some(c)) else {
                return Err(Witness::new("binary meet exists")
                    .with("a", el(&ids, a))
                    .with("b", el(&ids, b)));
            };
            join[a * n + b] = j as u32;
            join[b * n + a] = j as u32;
            meet[a * n + b] = m as u32;
            meet[b * n + a] = m as u32;
        }
    }

    let mut irreducibles = Vec::new();
    for j in 0..n {
        if j == bottom {
            continue;
        }
        let below = down[j]
            .ones()
            .filter(|&x| x != j)
            .fold(bottom, |acc, x| join[acc * n + x] as usize);
        if below != j {
            irreducibles.push(j);
        }
    }

    let index = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(FinLattice {
        ids,
        index,
        up,
        join,
        meet,
        bottom,
        top,
        irreducibles,
    })
}

/// Decides whether `data` presents a finite complete lattice.
pub fn validate_lattice(data: &LatticeData) -> Result<Verdict> {
    let (ids, up) = parse(data)?;
    Ok(match analyse(ids, up) {
        Ok(_) => Verdict::pass(),
        Err(w) => Verdict::fail(w),
    })
}

impl FinLattice {
    pub fn from_data(data: &LatticeData) -> Result<Self> {
        let (ids, up) = parse(data)?;
        analyse(ids, up).map_err(|w| Error::invalid("lattice", w))
    }

    /// Builds a lattice from ids and an order predicate on input positions.
    ///
    /// Elements are re-indexed in id order; use [`FinLattice::index_of`] to
    /// recover the index of an input id.
    pub fn from_order(ids: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Malformed("lattice has no elements".into()));
        }
        let n = ids.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        let sorted: Vec<String> = order.iter().map(|&i| ids[i].clone()).collect();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Malformed(format!("duplicate element id `{}`", w[0])));
            }
        }
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for (a, &ia) in order.iter().enumerate() {
            for (b, &ib) in order.iter().enumerate() {
                if leq(ia, ib) {
                    up[a].insert(b);
                }
            }
        }
        analyse(sorted, up).map_err(|w| Error::invalid("lattice", w))
    }

    /// The chain `ids[0] < ids[1] < ...`.
    pub fn chain<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        Self::from_order(ids, |a, b| a <= b)
    }

    pub fn to_data(&self) -> LatticeData {
        let mut leq = Vec::new();
        for a in 0..self.len() {
            for b in self.up[a].ones() {
                leq.push((self.ids[a].clone(), self.ids[b].clone()));
            }
        }
        LatticeData {
            elements: self.ids.clone(),
            leq,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, a: usize) -> &str {
        &self.ids[a]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn element(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    #[inline]
    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.ids.len() + b] as usize
    }

    #[inline]
    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.ids.len() + b] as usize
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn join_all(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    pub fn meet_all(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    /// Least upper bound of a set of element ids.
    pub fn join_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<usize> {
        let items = ids.iter().map(|s| self.element(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(self.join_all(items))
    }

    /// Greatest lower bound of a set of element ids.
    pub fn meet_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<usize> {
        let items = ids.iter().map(|s| self.element(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(self.meet_all(items))
    }

    /// Elements that are not the join of the elements strictly below them.
    /// Every element is the join of the irreducibles below it.
    pub fn join_irreducibles(&self) -> &[usize] {
        &self.irreducibles
    }

    pub fn up_set(&self, a: usize) -> &FixedBitSet {
        &self.up[a]
    }

    /// Elements in a linear extension of the order, and for each element
    /// that is neither bottom nor join-irreducible two strictly smaller
    /// elements joining to it (two of its lower covers).
    pub(crate) fn join_splitting(&self) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
        let n = self.len();
        let mut down_count = vec![0usize; n];
        for a in 0..n {
            self.up[a].ones().for_each(|b| down_count[b] += 1);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&a| down_count[a]);
        let mut parts = vec![None; n];
        for f in 0..n {
            if f == self.bottom || self.irreducibles.binary_search(&f).is_ok() {
                continue;
            }
            // the largest element strictly below is a lower cover, and so is
            // the largest strictly below and not under it
            let strict = || (0..n).filter(move |&a| a != f && self.leq(a, f));
            let c1 = strict().max_by_key(|&a| down_count[a]).expect("f is not bottom");
            let c2 = strict()
                .filter(|&a| !self.leq(a, c1))
                .max_by_key(|&a| down_count[a])
                .expect("f is not join-irreducible");
            parts[f] = Some((c1, c2));
        }
        (order, parts)
    }

    /// Elements in `sub`, with the induced order.
    pub fn restrict(&self, sub: &[usize]) -> Result<FinLattice> {
        let ids = sub.iter().map(|&i| self.ids[i].clone()).collect();
        FinLattice::from_order(ids, |a, b| self.leq(sub[a], sub[b]))
    }
}

/// Decides whether binary meet distributes over binary join.
///
/// For a finite lattice this is exactly the locale condition.
pub fn is_distributive(l: &FinLattice) -> Verdict {
    let n = l.len();
    // Fast path: distributive iff every join-irreducible is join-prime, i.e.
    // the irreducibles below a ∨ b are those below a or below b.
    let irr = l.join_irreducibles();
    let below: Vec<FixedBitSet> = (0..n)
        .map(|x| {
            let mut b = FixedBitSet::with_capacity(irr.len());
            for (k, &j) in irr.iter().enumerate() {
                if l.leq(j, x) {
                    b.insert(k);
                }
            }
            b
        })
        .collect();
    let prime = (0..n).all(|a| {
        (a..n).all(|b| {
            let mut u = below[a].clone();
            u.union_with(&below[b]);
            u == below[l.join(a, b)]
        })
    });
    if prime {
        return Verdict::pass();
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = l.meet(a, l.join(b, c));
                let rhs = l.join(l.meet(a, b), l.meet(a, c));
                if lhs != rhs {
                    return Verdict::fail(
                        Witness::new("a /\\ (b \\/ c) = (a /\\ b) \\/ (a /\\ c)")
                            .with("a", el(&l.ids, a))
                            .with("b", el(&l.ids, b))
                            .with("c", el(&l.ids, c)),
                    );
                }
            }
        }
    }
    Verdict::pass()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn m3() -> FinLattice {
        let ids = ["0", "a", "b", "c", "1"];
        FinLattice::from_order(ids.iter().map(|s| s.to_string()).collect(), |x, y| {
            x == y || x == 0 || y == 4
        })
        .unwrap()
    }

    fn powerset2() -> FinLattice {
        let ids = ["{}", "{p}", "{q}", "{p,q}"];
        let bits = [0b00u8, 0b01, 0b10, 0b11];
        FinLattice::from_order(ids.iter().map(|s| s.to_string()).collect(), |x, y| {
            bits[x] & !bits[y] == 0
        })
        .unwrap()
    }

    /// Random closure system on a 4-set: a family closed under intersection
    /// containing the full set, ordered by inclusion. Every finite lattice is
    /// of this form.
    pub(crate) fn random_lattice(seed: u64, max: usize) -> FinLattice {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut fam: Vec<u8> = vec![0b1111];
            for _ in 0..rng.gen_range(1..6) {
                fam.push(rng.gen_range(0..16));
            }
            loop {
                let mut grew = false;
                for i in 0..fam.len() {
                    for j in 0..fam.len() {
                        let x = fam[i] & fam[j];
                        if !fam.contains(&x) {
                            fam.push(x);
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            fam.sort();
            fam.dedup();
            if fam.len() <= max {
                let ids = fam.iter().map(|b| format!("s{b:02}")).collect();
                return FinLattice::from_order(ids, |x, y| fam[x] & !fam[y] == 0).unwrap();
            }
        }
    }

    fn data(elements: &[&str], leq: &[(&str, &str)]) -> LatticeData {
        LatticeData {
            elements: elements.iter().map(|s| s.to_string()).collect(),
            leq: leq.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    #[test]
    fn two_chain_is_valid() {
        let d = data(&["0", "1"], &[("0", "0"), ("0", "1"), ("1", "1")]);
        assert!(validate_lattice(&d).unwrap().holds);
    }

    #[test]
    fn missing_reflexivity_names_the_element() {
        let d = data(&["0", "1"], &[("0", "0"), ("0", "1")]);
        let v = validate_lattice(&d).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.law, "reflexivity");
        assert_eq!(w.get("x"), Some(&Value::Element("1".into())));
    }

    #[test]
    fn m3_is_a_lattice_by_enumeration() {
        // Oracle: every pair has a unique least upper bound among all elements.
        let l = m3();
        let n = l.len();
        for a in 0..n {
            for b in 0..n {
                let ubs: Vec<usize> = (0..n).filter(|&u| l.leq(a, u) && l.leq(b, u)).collect();
                let least: Vec<usize> = ubs.iter().copied().filter(|&u| ubs.iter().all(|&v| l.leq(u, v))).collect();
                assert_eq!(least, vec![l.join(a, b)]);
            }
        }
        assert!(validate_lattice(&l.to_data()).unwrap().holds);
    }

    #[test]
    fn duplicate_ids_are_malformed() {
        let d = data(&["0", "0"], &[("0", "0")]);
        assert!(matches!(validate_lattice(&d), Err(Error::Malformed(_))));
    }

    #[test]
    fn unknown_leq_id_is_rejected() {
        let d = data(&["0"], &[("0", "z")]);
        assert!(matches!(validate_lattice(&d), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn pentagon_shapes_fail_without_joins() {
        // two maximal elements, no top
        let d = data(&["0", "a", "b"], &[("0", "0"), ("a", "a"), ("b", "b"), ("0", "a"), ("0", "b")]);
        let v = validate_lattice(&d).unwrap();
        assert!(!v.holds);
    }

    #[test]
    fn empty_join_and_meet() {
        let l = FinLattice::chain(["0", "1"]).unwrap();
        let none: [&str; 0] = [];
        assert_eq!(l.id(l.join_ids(&none).unwrap()), "0");
        assert_eq!(l.id(l.meet_ids(&none).unwrap()), "1");
        assert!(matches!(l.join_ids(&["2"]), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn atoms_of_m3_join_to_top() {
        let l = m3();
        let j = l.join_ids(&["a", "b"]).unwrap();
        assert_eq!(l.id(j), "1");
        assert_eq!(l.join_irreducibles().len(), 3);
    }

    #[test]
    fn distributivity_examples() {
        let chain = FinLattice::chain(["0", "1", "2", "3"]).unwrap();
        assert!(is_distributive(&chain).holds);
        assert!(is_distributive(&powerset2()).holds);
        let v = is_distributive(&m3());
        assert!(!v.holds);
        let w = v.witness.unwrap();
        let atoms: Vec<&Value> = ["a", "b", "c"].iter().map(|k| w.get(k).unwrap()).collect();
        assert_eq!(atoms[0], &Value::Element("a".into()));
        assert_eq!(atoms[1], &Value::Element("b".into()));
        assert_eq!(atoms[2], &Value::Element("c".into()));
    }

    /// a /\ \/S = \/{a /\ s | s in S} for every subset S, by enumeration.
    fn infinite_distributive(l: &FinLattice) -> bool {
        let n = l.len();
        (0..n).all(|a| {
            (0u32..(1 << n)).all(|mask| {
                let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let lhs = l.meet(a, l.join_all(set.iter().copied()));
                let rhs = l.join_all(set.iter().map(|&s| l.meet(a, s)));
                lhs == rhs
            })
        })
    }

    proptest! {
        #[test]
        fn join_meet_laws(seed in any::<u64>()) {
            let l = random_lattice(seed, 8);
            let n = l.len();
            for a in 0..n {
                prop_assert_eq!(l.join(a, a), a);
                prop_assert_eq!(l.meet(a, a), a);
                for b in 0..n {
                    prop_assert_eq!(l.join(a, b), l.join(b, a));
                    prop_assert_eq!(l.meet(a, b), l.meet(b, a));
                    for c in 0..n {
                        prop_assert_eq!(l.join(l.join(a, b), c), l.join(a, l.join(b, c)));
                        prop_assert_eq!(l.meet(l.meet(a, b), c), l.meet(a, l.meet(b, c)));
                    }
                }
            }
        }

        #[test]
        fn join_is_least_upper_bound_by_search(seed in any::<u64>()) {
            let l = random_lattice(seed, 10);
            let n = l.len();
            for a in 0..n {
                for b in 0..n {
                    let ub: Vec<usize> = (0..n).filter(|&u| l.leq(a, u) && l.leq(b, u)).collect();
                    let least: Vec<usize> = ub.iter().copied().filter(|&u| ub.iter().all(|&v| l.leq(u, v))).collect();
                    prop_assert_eq!(least, vec![l.join(a, b)]);
                    let lb: Vec<usize> = (0..n).filter(|&u| l.leq(u, a) && l.leq(u, b)).collect();
                    let greatest: Vec<usize> = lb.iter().copied().filter(|&u| lb.iter().all(|&v| l.leq(v, u))).collect();
                    prop_assert_eq!(greatest, vec![l.meet(a, b)]);
                }
            }
        }

        #[test]
        fn splitting_uses_smaller_elements(seed in any::<u64>()) {
            let l = random_lattice(seed, 10);
            let (order, parts) = l.join_splitting();
            let pos: Vec<usize> = (0..l.len()).map(|a| order.iter().position(|&b| b == a).unwrap()).collect();
            for a in 0..l.len() {
                for b in l.up_set(a).ones() {
                    prop_assert!(pos[a] <= pos[b]);
                }
                let split = a != l.bottom() && !l.join_irreducibles().contains(&a);
                prop_assert_eq!(parts[a].is_some(), split);
                if let Some((p, q)) = parts[a] {
                    prop_assert!(p != a && q != a && l.leq(p, a) && l.leq(q, a));
                    prop_assert_eq!(l.join(p, q), a);
                }
            }
        }

        #[test]
        fn distributive_iff_infinite_law(seed in any::<u64>()) {
            let l = random_lattice(seed, 6);
            prop_assert_eq!(is_distributive(&l).holds, infinite_distributive(&l));
        }

        #[test]
        fn irreducibles_generate(seed in any::<u64>()) {
            let l = random_lattice(seed, 8);
            for x in 0..l.len() {
                let below = l.join_irreducibles().iter().copied().filter(|&j| l.leq(j, x));
                prop_assert_eq!(l.join_all(below), x);
            }
        }
    }

    #[test]
    fn m3_fails_infinite_law_too() {
        assert!(!infinite_distributive(&m3()));
    }
}
