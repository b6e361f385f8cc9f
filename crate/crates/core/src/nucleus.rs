//! Nuclei, the correspondence between topologies on C and locally left
//! exact nuclei on R(C), and quotient quantaloids.

use rayon::prelude::*;

use crate::crible::{build_rc, Crible, CribleQuantaloid};
use crate::error::{Error, Result};
use crate::fincat::{sieves_on, FinCategory, GrothendieckTopology};
use crate::quantaloid::{Arrow, FinQuantaloid, Involution};
use crate::report::{Verdict, Witness};
use crate::Bounds;

/// Per-hom self-maps `act[x*n+y][a]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nucleus {
    act: Vec<Vec<u32>>,
}

impl Nucleus {
    pub fn from_fn(q: &FinQuantaloid, f: impl Fn(usize, usize, usize) -> usize + Sync) -> Self {
        let n = q.n_objects();
        let act = (0..n * n)
            .into_par_iter()
            .map(|h| {
                let (x, y) = (h / n, h % n);
                (0..q.hom(x, y).len()).map(|a| f(x, y, a) as u32).collect()
            })
            .collect();
        Nucleus { act }
    }

    /// Raw tables; shape is checked by [`validate_nucleus`].
    pub fn from_tables(act: Vec<Vec<u32>>) -> Self {
        Nucleus { act }
    }

    pub fn identity(q: &FinQuantaloid) -> Self {
        Nucleus::from_fn(q, |_, _, a| a)
    }

    pub fn all_to_top(q: &FinQuantaloid) -> Self {
        Nucleus::from_fn(q, |x, y, _| q.hom(x, y).top())
    }

    #[inline]
    pub fn apply(&self, q: &FinQuantaloid, x: usize, y: usize, a: usize) -> usize {
        self.act[x * q.n_objects() + y][a] as usize
    }

    pub fn is_fixed(&self, q: &FinQuantaloid, x: usize, y: usize, a: usize) -> bool {
        self.apply(q, x, y, a) == a
    }
}

/// Decides the nucleus laws: monotone, extensive and idempotent per hom,
/// lax on composites and identities; with `require_llex`, also preservation
/// of binary meets and the top.
pub fn validate_nucleus(q: &FinQuantaloid, j: &Nucleus, require_llex: bool) -> Result<Verdict> {
    let n = q.n_objects();
    if j.act.len() != n * n {
        return Err(Error::Malformed("nucleus table has the wrong number of homs".into()));
    }
    for x in 0..n {
        for y in 0..n {
            let l = q.hom(x, y);
            let row = &j.act[x * n + y];
            if row.len() != l.len() || row.iter().any(|&b| b as usize >= l.len()) {
                return Err(Error::Malformed(format!(
                    "nucleus is not defined on all of hom({},{})",
                    q.object_id(x),
                    q.object_id(y)
                )));
            }
        }
    }
    let v = |x, y, a| q.arrow_value(Arrow { src: x, dst: y, elem: a });
    for x in 0..n {
        for y in 0..n {
            let l = q.hom(x, y);
            let ja = |a| j.apply(q, x, y, a);
            for a in 0..l.len() {
                if let Some(b) = l.up_set(a).ones().find(|&b| !l.leq(ja(a), ja(b))) {
                    return Ok(Verdict::fail(Witness::new("monotone: r ≤ s implies j(r) ≤ j(s)").with("r", v(x, y, a)).with("s", v(x, y, b))));
                }
            }
            for a in 0..l.len() {
                if !l.leq(a, ja(a)) {
                    return Ok(Verdict::fail(Witness::new("extensive: r ≤ j(r)").with("r", v(x, y, a))));
                }
                if ja(ja(a)) != ja(a) {
                    return Ok(Verdict::fail(Witness::new("idempotent: j(j(r)) = j(r)").with("r", v(x, y, a))));
                }
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for g in 0..q.hom(y, z).len() {
                    for f in 0..q.hom(x, y).len() {
                        let lhs = q.compose(x, y, z, j.apply(q, y, z, g), j.apply(q, x, y, f));
                        let rhs = j.apply(q, x, z, q.compose(x, y, z, g, f));
                        if !q.hom(x, z).leq(lhs, rhs) {
                            return Ok(Verdict::fail(
                                Witness::new("lax: j(s)∘j(r) ≤ j(s∘r)").with("r", v(x, y, f)).with("s", v(y, z, g)),
                            ));
                        }
                    }
                }
            }
        }
    }
    for x in 0..n {
        let one = q.identity(x);
        if !q.hom(x, x).leq(one, j.apply(q, x, x, one)) {
            return Ok(Verdict::fail(Witness::new("lax unit: 1 ≤ j(1)").with("1", v(x, x, one))));
        }
    }
    if require_llex {
        for x in 0..n {
            for y in 0..n {
                let l = q.hom(x, y);
                let ja = |a| j.apply(q, x, y, a);
                if ja(l.top()) != l.top() {
                    return Ok(Verdict::fail(Witness::new("left exact: j(⊤) = ⊤").with("top", v(x, y, l.top()))));
                }
                for a in 0..l.len() {
                    for b in a + 1..l.len() {
                        if ja(l.meet(a, b)) != l.meet(ja(a), ja(b)) {
                            return Ok(Verdict::fail(
                                Witness::new("left exact: j(r ∧ s) = j(r) ∧ j(s)").with("r", v(x, y, a)).with("s", v(x, y, b)),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(Verdict::pass())
}

/// `j(R) = {(f,g) | ∃S ∈ J(dom f) ∀s ∈ S: (f∘s, g∘s) ∈ R}` on R(C).
pub fn topology_to_nucleus(rc: &CribleQuantaloid, j: &GrothendieckTopology) -> Nucleus {
    let c = rc.category();
    let calc = &rc.calc;
    Nucleus::from_fn(&rc.quantaloid, |x, y, a| {
        let r = rc.crible(x, y, a);
        let mut out = calc.empty(x, y);
        for b in calc.top(x, y).spans.ones() {
            let (f, g) = calc.span(b);
            let covered = j.covers(c.dom(f)).iter().any(|s| {
                s.members.ones().all(|s| {
                    let fs = c.compose(f, s).expect("composable");
                    let gs = c.compose(g, s).expect("composable");
                    r.spans.contains(calc.bit(fs, gs))
                })
            });
            if covered {
                out.spans.insert(b);
            }
        }
        rc.element(&out).expect("j(R) is a crible")
    })
}

/// `J(C) = {S | id_C ≤ j({(s,s) | s ∈ S})}` for a locally left exact nucleus.
pub fn nucleus_to_topology(rc: &CribleQuantaloid, j: &Nucleus) -> Result<GrothendieckTopology> {
    let q = &rc.quantaloid;
    let v = validate_nucleus(q, j, true)?;
    if let Some(w) = v.witness {
        return Err(Error::Argument(format!("not a locally left exact nucleus: {w}")));
    }
    let c = rc.category();
    let covers = (0..c.n_objects())
        .map(|x| {
            let id = q.identity(x);
            sieves_on(c, x)
                .into_iter()
                .filter(|s| {
                    let mut d = rc.calc.empty(x, x);
                    s.members.ones().for_each(|m| d.spans.insert(rc.calc.bit(m, m)));
                    let e = rc.element(&d).expect("diagonal of a sieve is a crible");
                    q.hom(x, x).leq(id, j.apply(q, x, x, e))
                })
                .collect()
        })
        .collect();
    GrothendieckTopology::new(c, covers)
}

/// `Q_j` with the maps between it and `Q`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub quantaloid: FinQuantaloid,
    /// `embed[h][e]`: the element of `Q` for quotient element `e`.
    pub embed: Vec<Vec<usize>>,
    /// `project[h][a]`: the quotient element `j(a)`.
    pub project: Vec<Vec<usize>>,
}

/// Fixed points of `j`, composed by `j(g∘f)`, with identity `j(1)`.
pub fn quotient(q: &FinQuantaloid, j: &Nucleus) -> Result<Quotient> {
    let n = q.n_objects();
    let mut homs = Vec::with_capacity(n * n);
    let mut embed = Vec::with_capacity(n * n);
    let mut project = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let l = q.hom(x, y);
            let fixed: Vec<usize> = (0..l.len()).filter(|&a| j.is_fixed(q, x, y, a)).collect();
            let sub = l.restrict(&fixed)?;
            // ids are sorted, so sub keeps the order of `fixed`
            let mut back = vec![usize::MAX; l.len()];
            for (i, &a) in fixed.iter().enumerate() {
                back[a] = i;
            }
            project.push((0..l.len()).map(|a| back[j.apply(q, x, y, a)]).collect::<Vec<_>>());
            embed.push(fixed);
            homs.push(sub);
        }
    }
    if project.iter().flatten().any(|&e| e == usize::MAX) {
        return Err(Error::Argument("act is not idempotent, so it is not a nucleus".into()));
    }
    let identities = (0..n).map(|x| project[x * n + x][q.identity(x)]).collect();
    let quantaloid = FinQuantaloid::from_fn(q.objects().to_vec(), homs, identities, |x, y, z, g, f| {
        Ok(project[x * n + z][q.compose(x, y, z, embed[y * n + z][g], embed[x * n + y][f])])
    })?;
    Ok(Quotient {
        quantaloid,
        embed,
        project,
    })
}

/// R(C, J): closed cribles with the inherited reversal involution.
#[derive(Clone, Debug)]
pub struct ClosedCribles {
    pub rc: CribleQuantaloid,
    pub topology: GrothendieckTopology,
    pub nucleus: Nucleus,
    pub quotient: Quotient,
    pub involution: Involution,
}

impl ClosedCribles {
    pub fn quantaloid(&self) -> &FinQuantaloid {
        &self.quotient.quantaloid
    }

    /// The closed crible at quotient element `e` of `hom(x, y)`.
    pub fn crible(&self, x: usize, y: usize, e: usize) -> &Crible {
        let n = self.rc.quantaloid.n_objects();
        self.rc.crible(x, y, self.quotient.embed[x * n + y][e])
    }
}

pub fn build_rcj(c: &FinCategory, j: &GrothendieckTopology, bounds: &Bounds) -> Result<ClosedCribles> {
    let rc = build_rc(c, bounds)?;
    closed_cribles(rc, j)
}

/// R(C, J) from an already built R(C).
pub fn closed_cribles(rc: CribleQuantaloid, j: &GrothendieckTopology) -> Result<ClosedCribles> {
    let nucleus = topology_to_nucleus(&rc, j);
    let quotient = quotient(&rc.quantaloid, &nucleus)?;
    let q = &rc.quantaloid;
    let n = q.n_objects();
    let mut maps = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let row = quotient.embed[x * n + y]
                .iter()
                .map(|&a| {
                    let b = rc.involution.apply(q, x, y, a);
                    if !nucleus.is_fixed(q, y, x, b) {
                        return Err(Error::Internal("nucleus does not preserve the involution".into()));
                    }
                    Ok(quotient.project[y * n + x][b])
                })
                .collect::<Result<Vec<_>>>()?;
            maps.push(row);
        }
    }
    let involution = Involution::from_fn(&quotient.quantaloid, |x, y, a| maps[x * n + y][a]);
    Ok(ClosedCribles {
        rc,
        topology: j.clone(),
        nucleus,
        quotient,
        involution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{enumerate_topologies, DEFAULT_TOPOLOGY_CANDIDATES};
    use crate::fixtures;
    use crate::quantaloid::{validate_involution, validate_quantaloid};

    fn rc(c: &FinCategory) -> CribleQuantaloid {
        build_rc(c, &Bounds::default()).unwrap()
    }

    #[test]
    fn identity_and_top_nuclei() {
        let r = rc(&fixtures::g2());
        let q = &r.quantaloid;
        assert!(validate_nucleus(q, &Nucleus::identity(q), true).unwrap().holds);
        assert!(validate_nucleus(q, &Nucleus::all_to_top(q), true).unwrap().holds);
        let t = quotient(q, &Nucleus::all_to_top(q)).unwrap();
        assert_eq!(t.quantaloid.hom(0, 0).len(), 1);
        assert!(validate_quantaloid(&t.quantaloid).holds);
        let same = quotient(q, &Nucleus::identity(q)).unwrap();
        assert_eq!(&same.quantaloid, q);
    }

    #[test]
    fn non_monotone_act_is_invalid() {
        let q = fixtures::l3();
        let l = q.hom(0, 0);
        let (z, m, one) = (l.element("0").unwrap(), l.element("m").unwrap(), l.element("1").unwrap());
        let mut row = vec![0u32; 3];
        row[z] = m as u32;
        row[m] = m as u32;
        row[one] = one as u32;
        assert!(validate_nucleus(&q, &Nucleus::from_tables(vec![row]), false).unwrap().holds);
        let mut row = vec![0u32; 3];
        row[z] = one as u32;
        row[m] = m as u32;
        row[one] = one as u32;
        let v = validate_nucleus(&q, &Nucleus::from_tables(vec![row]), false).unwrap();
        assert!(v.witness.unwrap().law.starts_with("monotone"));
        assert!(matches!(validate_nucleus(&q, &Nucleus::from_tables(vec![]), false), Err(Error::Malformed(_))));
    }

    #[test]
    fn minimal_topology_gives_identity() {
        for c in [fixtures::terminal(), fixtures::cospan(), fixtures::g2()] {
            let r = rc(&c);
            let j = topology_to_nucleus(&r, &GrothendieckTopology::minimal(&c));
            assert_eq!(j, Nucleus::identity(&r.quantaloid));
            let back = nucleus_to_topology(&r, &Nucleus::identity(&r.quantaloid)).unwrap();
            assert_eq!(back, GrothendieckTopology::minimal(&c));
            let closed = build_rcj(&c, &GrothendieckTopology::minimal(&c), &Bounds::default()).unwrap();
            assert_eq!(closed.quantaloid(), &r.quantaloid);
        }
    }

    #[test]
    fn empty_cover_on_g2_sends_everything_to_top() {
        let c = fixtures::g2();
        let r = rc(&c);
        let jt = GrothendieckTopology::maximal(&c);
        let j = topology_to_nucleus(&r, &jt);
        assert_eq!(j, Nucleus::all_to_top(&r.quantaloid));
    }

    #[test]
    fn cospan_closure_example() {
        let c = fixtures::cospan();
        let r = rc(&c);
        let jt = fixtures::cospan_site_topology(&c);
        let j = topology_to_nucleus(&r, &jt);
        let q = &r.quantaloid;
        let z = c.object("Z").unwrap();
        let e = r.element(&r.calc.empty(z, z)).unwrap();
        let closed = r.crible(z, z, j.apply(q, z, z, e)).clone();
        for b in closed.spans.ones() {
            let (f, _) = r.calc.span(b);
            assert_eq!(c.object_id(c.dom(f)), "Z");
        }
        let (f, g) = (c.morphism("f").unwrap(), c.morphism("g").unwrap());
        let d = r.calc.closure(z, z, &[(f, f), (g, g)]).unwrap();
        let jd = r.crible(z, z, j.apply(q, z, z, r.element(&d).unwrap())).clone();
        let one = c.identity(z);
        assert!(jd.spans.contains(r.calc.bit(one, one)));
        assert!(!d.spans.contains(r.calc.bit(one, one)));
    }

    #[test]
    fn bijection_on_fixture_topologies() {
        for c in [fixtures::terminal(), fixtures::cospan(), fixtures::g2()] {
            let r = rc(&c);
            let all = enumerate_topologies(&c, DEFAULT_TOPOLOGY_CANDIDATES).unwrap();
            for jt in &all {
                let j = topology_to_nucleus(&r, jt);
                assert!(validate_nucleus(&r.quantaloid, &j, true).unwrap().holds);
                assert_eq!(&nucleus_to_topology(&r, &j).unwrap(), jt);
                let back = topology_to_nucleus(&r, &nucleus_to_topology(&r, &j).unwrap());
                assert_eq!(back, j);
            }
        }
    }

    #[test]
    fn nucleus_commutes_with_reversal() {
        for c in [fixtures::cospan(), fixtures::g2()] {
            let r = rc(&c);
            let q = &r.quantaloid;
            for jt in enumerate_topologies(&c, DEFAULT_TOPOLOGY_CANDIDATES).unwrap() {
                let j = topology_to_nucleus(&r, &jt);
                for x in 0..q.n_objects() {
                    for y in 0..q.n_objects() {
                        for a in 0..q.hom(x, y).len() {
                            let lhs = j.apply(q, y, x, r.involution.apply(q, x, y, a));
                            let rhs = r.involution.apply(q, x, y, j.apply(q, x, y, a));
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
                let closed = closed_cribles(r.clone(), &jt).unwrap();
                assert!(validate_quantaloid(closed.quantaloid()).holds);
                assert!(validate_involution(closed.quantaloid(), &closed.involution).unwrap().holds);
            }
        }
    }

    #[test]
    fn not_left_exact_is_an_argument_error() {
        // On R(G2) nonempty cribles compose to nonempty ones, so sending
        // every nonempty crible to ⊤ is a nucleus; it breaks D ∧ A = ∅.
        let c = fixtures::g2();
        let r = rc(&c);
        let q = &r.quantaloid;
        let l = q.hom(0, 0);
        let j = Nucleus::from_fn(q, |_, _, a| if a == l.bottom() { a } else { l.top() });
        assert!(validate_nucleus(q, &j, false).unwrap().holds);
        assert!(!validate_nucleus(q, &j, true).unwrap().holds);
        assert!(matches!(nucleus_to_topology(&r, &j), Err(Error::Argument(_))));
    }

    #[test]
    fn sieve_diagonals_are_cribles() {
        let c = fixtures::cospan();
        let r = rc(&c);
        for x in 0..c.n_objects() {
            for s in sieves_on(&c, x) {
                let pairs: Vec<(usize, usize)> = s.members.ones().map(|m| (m, m)).collect();
                assert!(r.calc.from_spans(x, x, &pairs).is_ok());
            }
        }
    }
}
