//! Enumeration of subsets closed under a "generates" relation.
//!
//! Sieves (closed under precomposition) and cribles (spans closed under
//! precomposition) are both down-sets of a preorder given by principal
//! closures: `closure[i]` is the smallest closed set containing `i`.

use fixedbitset::FixedBitSet;

/// All subsets `S` of `0..closure.len()` with `i in S => closure[i] ⊆ S`.
///
/// Returns `Err(limit)` once more than `limit` sets would be produced.
pub(crate) fn down_closed(closure: &[FixedBitSet], limit: usize) -> Result<Vec<FixedBitSet>, usize> {
    let n = closure.len();
    let mut above = vec![FixedBitSet::with_capacity(n); n];
    for (k, cl) in closure.iter().enumerate() {
        for i in cl.ones() {
            above[i].insert(k);
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![(FixedBitSet::with_capacity(n), FixedBitSet::with_capacity(n))];
    while let Some((inc, exc)) = stack.pop() {
        let next = (0..n).find(|&i| !inc.contains(i) && !exc.contains(i));
        let Some(i) = next else {
            if out.len() == limit {
                return Err(limit);
            }
            out.push(inc);
            continue;
        };
        let mut without = exc.clone();
        without.union_with(&above[i]);
        stack.push((inc.clone(), without));
        if closure[i].is_disjoint(&exc) {
            let mut with = inc;
            with.union_with(&closure[i]);
            stack.push((with, exc));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_of_three_has_four_downsets() {
        // 0 <- 1 <- 2 : closure[2] = {0,1,2}
        let cl: Vec<FixedBitSet> = [vec![0], vec![0, 1], vec![0, 1, 2]]
            .iter()
            .map(|v| {
                let mut b = FixedBitSet::with_capacity(3);
                v.iter().for_each(|&i| b.insert(i));
                b
            })
            .collect();
        assert_eq!(down_closed(&cl, 100).unwrap().len(), 4);
        assert_eq!(down_closed(&cl, 3), Err(3));
    }

    #[test]
    fn antichain_gives_powerset() {
        let cl: Vec<FixedBitSet> = (0..4)
            .map(|i| {
                let mut b = FixedBitSet::with_capacity(4);
                b.insert(i);
                b
            })
            .collect();
        let mut all = down_closed(&cl, 100).unwrap();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 16);
    }
}
