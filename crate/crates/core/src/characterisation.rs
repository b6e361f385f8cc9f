//! Comparing a quantaloid with cribles over its maps: the comparison `F`,
//! its right adjoint `F*`, the derived topology, the isomorphism
//! certificate, the derived involution, sheaf and splitting checks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crible::{build_rc, Crible, CribleQuantaloid};
use crate::error::{Error, Result};
use crate::fincat::{enumerate_topologies, pullback_sieve, sieves_on, validate_topology, FinCategory, GrothendieckTopology, Sieve};
use crate::nucleus::{closed_cribles, Nucleus};
use crate::quantaloid::{maps_category_with, AdjointTable, Arrow, FinQuantaloid, Involution, MapsCategory, Property, PropertyContext, PropertyVerdict};
use crate::report::{Check, CheckReport, Value, Verdict, Witness};
use crate::Bounds;

/// `F` and `F*` between R(Map(Q)) and Q.
pub struct CribleComparison<'a> {
    q: &'a FinQuantaloid,
    pub maps: MapsCategory,
    pub rc: CribleQuantaloid,
    /// `f∘g*` for the span at each bit, `u32::MAX` off the span universe.
    span_value: Vec<u32>,
}

impl<'a> CribleComparison<'a> {
    pub fn new(q: &'a FinQuantaloid, bounds: &Bounds) -> Result<Self> {
        let adj = AdjointTable::new(q)?;
        let maps = maps_category_with(q, &adj)?;
        let rc = build_rc(&maps.category, bounds)?;
        Ok(Self::from_parts(q, maps, rc))
    }

    fn from_parts(q: &'a FinQuantaloid, maps: MapsCategory, rc: CribleQuantaloid) -> Self {
        let m = maps.category.n_morphisms();
        let mut span_value = vec![u32::MAX; m * m];
        for f in 0..m {
            for g in 0..m {
                let (fa, ga) = (maps.arrow(f), maps.right(g));
                if fa.src == ga.dst {
                    span_value[f * m + g] = q.compose(ga.src, fa.src, fa.dst, fa.elem, ga.elem) as u32;
                }
            }
        }
        CribleComparison {
            q,
            maps,
            rc,
            span_value,
        }
    }

    /// `F(R) = ⋁{f∘g* | (f,g) ∈ R}`.
    pub fn f(&self, r: &Crible) -> usize {
        let l = self.q.hom(r.source, r.target);
        l.join_all(r.spans.ones().map(|b| self.span_value[b] as usize))
    }

    /// `F*(q) = {(f,g) | f∘g* ≤ q}` for `q in hom(x, y)`.
    pub fn f_star(&self, x: usize, y: usize, e: usize) -> Crible {
        let l = self.q.hom(x, y);
        let calc = &self.rc.calc;
        let mut out = calc.empty(x, y);
        for b in calc.top(x, y).spans.ones() {
            if l.leq(self.span_value[b] as usize, e) {
                out.spans.insert(b);
            }
        }
        out
    }

    /// The nucleus `F*∘F` on R(Map(Q)).
    pub fn lemma_nucleus(&self) -> Nucleus {
        let rc = &self.rc;
        Nucleus::from_fn(&rc.quantaloid, |x, y, a| {
            let r = rc.crible(x, y, a);
            rc.element(&self.f_star(x, y, self.f(r))).expect("F*(q) is a crible")
        })
    }
}

/// The topology `J(X) = {S | 1_X = ⋁ s∘s*}` on Map(Q).
pub struct DerivedTopology {
    pub maps: MapsCategory,
    pub topology: GrothendieckTopology,
    /// Whether `topology` satisfies the three axioms.
    pub verdict: Verdict,
}

pub fn derive_topology(q: &FinQuantaloid) -> Result<DerivedTopology> {
    let adj = AdjointTable::new(q)?;
    derive_topology_with(q, &adj)
}

fn derive_topology_with(q: &FinQuantaloid, adj: &AdjointTable) -> Result<DerivedTopology> {
    let maps = maps_category_with(q, adj)?;
    let c = &maps.category;
    let covers = (0..c.n_objects())
        .map(|x| {
            let l = q.hom(x, x);
            sieves_on(c, x)
                .into_iter()
                .filter(|s| {
                    let join = l.join_all(s.members.ones().map(|m| {
                        let (sa, ss) = (maps.arrow(m), maps.right(m));
                        q.compose(x, sa.src, x, sa.elem, ss.elem)
                    }));
                    join == q.identity(x)
                })
                .collect()
        })
        .collect();
    let topology = GrothendieckTopology::new(c, covers)?;
    let verdict = validate_topology(c, &topology);
    Ok(DerivedTopology { maps, topology, verdict })
}

/// One hom of the isomorphism `R(Map(Q), J) ≅ Q`: closed crible id paired
/// with the element of Q it is sent to by `F`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoHom {
    pub source: String,
    pub target: String,
    pub pairs: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoWitness {
    pub homs: Vec<IsoHom>,
}

/// Result of [`roundtrip`]: the axiom verdicts run (stopping at the first
/// failure) and, when all hold, the derived topology and isomorphism.
pub struct Roundtrip {
    pub axioms: Vec<PropertyVerdict>,
    pub derived: Option<DerivedTopology>,
    pub iso: Option<IsoWitness>,
}

impl Roundtrip {
    pub fn certified(&self) -> bool {
        self.iso.is_some()
    }

    pub fn report(&self, subject: &str) -> CheckReport {
        let mut r = CheckReport::new(subject);
        for v in &self.axioms {
            r.push(Check::new(v.property.as_str(), v.verdict.clone()));
        }
        if let Some(d) = &self.derived {
            r.push(Check::new("derived topology satisfies the axioms", d.verdict.clone()));
            let covers = d.topology.to_covers_data(&d.maps.category);
            r.attach("topology", serde_json::to_value(covers).expect("serialisable"));
        }
        if let Some(iso) = &self.iso {
            r.push(Check::new("F is an isomorphism onto Q", Verdict::pass()));
            r.attach("iso", serde_json::Value::String("certified".into()));
            r.attach("iso_table", serde_json::to_value(iso).expect("serialisable"));
        }
        r
    }
}

fn iso_error(what: &str, detail: impl std::fmt::Display) -> Error {
    Error::Internal(format!("isomorphism certificate failed ({what}): {detail}"))
}

/// Checks the four axioms in order, failing fast; on success derives the
/// topology, builds R(Map(Q), J) and certifies that `F` is an isomorphism.
pub fn roundtrip(q: &FinQuantaloid, bounds: &Bounds) -> Result<Roundtrip> {
    let ctx = PropertyContext::new(q)?;
    let mut axioms = Vec::new();
    for p in Property::AXIOMS {
        let v = ctx.check(p, None)?;
        let holds = v.verdict.holds;
        axioms.push(v);
        if !holds {
            return Ok(Roundtrip {
                axioms,
                derived: None,
                iso: None,
            });
        }
    }
    let derived = derive_topology_with(q, ctx.adjoints())?;
    if let Some(w) = &derived.verdict.witness {
        return Err(iso_error("derived topology", w));
    }
    let rc = build_rc(&derived.maps.category, bounds)?;
    let closed = closed_cribles(rc, &derived.topology)?;
    let cmp = CribleComparison::from_parts(q, derived.maps.clone(), closed.rc.clone());
    let qj = closed.quantaloid();
    let n = q.n_objects();

    let mut homs = Vec::with_capacity(n * n);
    let mut fmap: Vec<Vec<usize>> = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let (lq, lj) = (q.hom(x, y), qj.hom(x, y));
            let image: Vec<usize> = (0..lj.len()).map(|e| cmp.f(closed.crible(x, y, e))).collect();
            let mut seen = vec![false; lq.len()];
            for &v in &image {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(iso_error("injective", format!("two closed cribles map to {}", lq.id(v))));
                }
            }
            if lj.len() != lq.len() {
                return Err(iso_error(
                    "surjective",
                    format!("hom({},{}) has {} closed cribles but {} elements", q.object_id(x), q.object_id(y), lj.len(), lq.len()),
                ));
            }
            if image[lj.bottom()] != lq.bottom() {
                return Err(iso_error("bottom", q.object_id(x)));
            }
            for a in 0..lj.len() {
                for &j in lj.join_irreducibles() {
                    if image[lj.join(a, j)] != lq.join(image[a], image[j]) {
                        return Err(iso_error("joins", format!("{} ∨ {}", lj.id(a), lj.id(j))));
                    }
                }
            }
            homs.push(IsoHom {
                source: q.object_id(x).to_string(),
                target: q.object_id(y).to_string(),
                pairs: (0..lj.len()).map(|e| (lj.id(e).to_string(), lq.id(image[e]).to_string())).collect(),
            });
            fmap.push(image);
        }
    }
    for x in 0..n {
        if fmap[x * n + x][qj.identity(x)] != q.identity(x) {
            return Err(iso_error("identities", q.object_id(x)));
        }
    }
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z)))).collect();
    let bad = triples.par_iter().find_first(|&&(x, y, z)| {
        qj.hom(x, y).join_irreducibles().iter().any(|&f| {
            qj.hom(y, z).join_irreducibles().iter().any(|&g| {
                let lhs = fmap[x * n + z][qj.compose(x, y, z, g, f)];
                let rhs = q.compose(x, y, z, fmap[y * n + z][g], fmap[x * n + y][f]);
                lhs != rhs
            })
        })
    });
    if let Some(&(x, y, z)) = bad {
        return Err(iso_error("composition", format!("{} -> {} -> {}", q.object_id(x), q.object_id(y), q.object_id(z))));
    }
    Ok(Roundtrip {
        axioms,
        derived: Some(derived),
        iso: Some(IsoWitness { homs }),
    })
}

/// `q^o = ⋁{g∘f* | (f,g) span of maps, f∘g* ≤ q}`.
pub fn derived_involution(q: &FinQuantaloid) -> Result<Involution> {
    let ctx = PropertyContext::new(q)?;
    for p in Property::AXIOMS {
        if let Some(w) = ctx.check(p, None)?.verdict.witness {
            return Err(Error::Argument(format!("the derived involution needs `{p}`: {w}")));
        }
    }
    let adj = ctx.adjoints();
    let n = q.n_objects();
    let mut spans: Vec<Vec<(usize, usize, usize, usize, usize)>> = vec![Vec::new(); n * n];
    for x in 0..n {
        for y in 0..n {
            for a in 0..n {
                for &f in adj.maps(n, a, y) {
                    for &g in adj.maps(n, a, x) {
                        let fs = adj.right(n, a, y, f).expect("map");
                        let gs = adj.right(n, a, x, g).expect("map");
                        let fg = q.compose(x, a, y, f, gs);
                        let gf = q.compose(y, a, x, g, fs);
                        spans[x * n + y].push((a, f, g, fg, gf));
                    }
                }
            }
        }
    }
    Ok(Involution::from_fn(q, |x, y, e| {
        let (l, lo) = (q.hom(x, y), q.hom(y, x));
        lo.join_all(spans[x * n + y].iter().filter(|s| l.leq(s.3, e)).map(|s| s.4))
    }))
}

/// Natural families on a covering sieve, for the sheaf condition.
struct Families<'c> {
    c: &'c FinCategory,
    members: Vec<usize>,
    d: usize,
}

impl Families<'_> {
    /// Visits every natural family `τ` (τ(s) : dom s -> d, τ(s∘h) = τ(s)∘h),
    /// assigning members in order and forcing values where naturality
    /// already determines them. Returns false if `visit` stops early.
    fn each(&self, limit: u64, visit: &mut dyn FnMut(&[usize]) -> bool) -> std::result::Result<bool, u64> {
        let mut tau = vec![usize::MAX; self.c.n_morphisms()];
        let mut count = 0u64;
        self.go(0, &mut tau, &mut count, limit, visit)
    }

    fn consistent(&self, tau: &[usize], s: usize) -> bool {
        let c = self.c;
        // τ(s∘h) = τ(s)∘h against assigned members, in both directions
        for &h in c.arrows_into(c.dom(s)) {
            let sh = c.compose(s, h).expect("composable");
            if tau[sh] != usize::MAX && tau[sh] != c.compose(tau[s], h).expect("composable") {
                return false;
            }
        }
        for &t in &self.members {
            if tau[t] == usize::MAX || t == s {
                continue;
            }
            for &h in c.arrows_into(c.dom(t)) {
                if c.compose(t, h) == Some(s) && c.compose(tau[t], h) != Some(tau[s]) {
                    return false;
                }
            }
        }
        true
    }

    fn go(
        &self,
        i: usize,
        tau: &mut Vec<usize>,
        count: &mut u64,
        limit: u64,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> std::result::Result<bool, u64> {
        let c = self.c;
        if i == self.members.len() {
            *count += 1;
            if *count > limit {
                return Err(limit);
            }
            return Ok(visit(tau));
        }
        let s = self.members[i];
        let forced = self.members[..i].iter().find_map(|&t| {
            c.arrows_into(c.dom(t))
                .iter()
                .find(|&&h| c.compose(t, h) == Some(s))
                .map(|&h| c.compose(tau[t], h).expect("composable"))
        });
        let candidates: Vec<usize> = match forced {
            Some(v) => vec![v],
            None => c.hom(c.dom(s), self.d).to_vec(),
        };
        for v in candidates {
            tau[s] = v;
            if self.consistent(tau, s) && !self.go(i + 1, tau, count, limit, visit)? {
                tau[s] = usize::MAX;
                return Ok(false);
            }
        }
        tau[s] = usize::MAX;
        Ok(true)
    }
}

/// Every representable is a sheaf: each natural family on a covering sieve
/// has exactly one amalgamation.
pub fn check_subcanonical(c: &FinCategory, j: &GrothendieckTopology, bounds: &Bounds) -> Result<Verdict> {
    for x in 0..c.n_objects() {
        for s in j.covers(x) {
            for d in 0..c.n_objects() {
                let fam = Families {
                    c,
                    members: s.members.ones().collect(),
                    d,
                };
                let mut witness = None;
                fam.each(bounds.families, &mut |tau| {
                    let count = c
                        .hom(x, d)
                        .iter()
                        .filter(|&&f| fam.members.iter().all(|&m| c.compose(f, m) == Some(tau[m])))
                        .count();
                    if count != 1 {
                        let pairs = fam
                            .members
                            .iter()
                            .map(|&m| (c.morphism_id(m).to_string(), c.morphism_id(tau[m]).to_string()))
                            .collect();
                        witness = Some(
                            Witness::new("each natural family on a covering sieve has a unique amalgamation")
                                .with("C", Value::Object(c.object_id(x).into()))
                                .with("S", s.to_value(c))
                                .with("D", Value::Object(c.object_id(d).into()))
                                .with("tau", Value::Family(pairs))
                                .with("amalgamations", Value::Count(count as u64)),
                        );
                        return false;
                    }
                    true
                })
                .map_err(|limit| Error::bound("natural families on one sieve", limit as u128 + 1, limit as u128))?;
                if let Some(w) = witness {
                    return Ok(Verdict::fail(w));
                }
            }
        }
    }
    Ok(Verdict::pass())
}

/// Every coreflexive `e ≤ 1_C` has `f: C -> E`, `g: E -> C` with
/// `f∘g = 1_E` and `g∘f = e`.
pub fn check_coreflexives_split(q: &FinQuantaloid) -> Verdict {
    let n = q.n_objects();
    for c in 0..n {
        let l = q.hom(c, c);
        for e in (0..l.len()).filter(|&e| l.leq(e, q.identity(c))) {
            let splits = (0..n).any(|x| {
                (0..q.hom(x, c).len()).any(|g| {
                    (0..q.hom(c, x).len()).any(|f| {
                        q.compose(x, c, x, f, g) == q.identity(x) && q.compose(c, x, c, g, f) == e
                    })
                })
            });
            if !splits {
                return Verdict::fail(
                    Witness::new("coreflexive e ≤ 1 splits as e = g∘f with f∘g = 1")
                        .with("e", q.arrow_value(Arrow { src: c, dst: c, elem: e })),
                );
            }
        }
    }
    Verdict::pass()
}

/// `J` is the largest subcanonical topology on `c`.
pub fn check_canonical(c: &FinCategory, j: &GrothendieckTopology, bounds: &Bounds) -> Result<Verdict> {
    let own = check_subcanonical(c, j, bounds)?;
    if let Some(w) = own.witness {
        let mut out = Witness::new(format!("J is subcanonical: {}", w.law));
        out.items = w.items;
        return Ok(Verdict::fail(out));
    }
    for other in enumerate_topologies(c, bounds.topology_candidates)? {
        if other.is_coarser_than(j) {
            continue;
        }
        if check_subcanonical(c, &other, bounds)?.holds {
            let extra = (0..c.n_objects())
                .flat_map(|x| other.covers(x).iter())
                .find(|s| !j.is_cover(s))
                .expect("not coarser");
            return Ok(Verdict::fail(
                Witness::new("every subcanonical topology is contained in J").with("S", extra.to_value(c)),
            ));
        }
    }
    Ok(Verdict::pass())
}

/// Covers of the canonical topology on a finite locale viewed as a poset
/// category: `S` covers `e` iff the domains of `S` join to `e`.
pub fn locale_covers(c: &FinCategory, join_of_domains: impl Fn(&Sieve) -> bool) -> Result<GrothendieckTopology> {
    let covers = (0..c.n_objects())
        .map(|x| sieves_on(c, x).into_iter().filter(|s| join_of_domains(s)).collect())
        .collect();
    GrothendieckTopology::new(c, covers)
}

/// Helper for reports: the topology as `{object: [[members]]}`.
pub fn covers_json(c: &FinCategory, j: &GrothendieckTopology) -> serde_json::Value {
    serde_json::to_value(j.to_covers_data(c)).expect("serialisable")
}

/// Checks that pullback along every morphism keeps covers, for diagnostics.
pub fn stable_under_pullback(c: &FinCategory, j: &GrothendieckTopology) -> bool {
    (0..c.n_objects()).all(|x| {
        j.covers(x)
            .iter()
            .all(|s| c.arrows_into(x).iter().all(|&f| j.is_cover(&pullback_sieve(c, f, s).expect("typed"))))
    })
}

/// Names the failing axiom, if any, as a map for reports.
pub fn axiom_summary(axioms: &[PropertyVerdict]) -> BTreeMap<String, bool> {
    axioms.iter().map(|v| (v.property.as_str().to_string(), v.verdict.holds)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::DEFAULT_TOPOLOGY_CANDIDATES;
    use crate::fixtures;
    use crate::nucleus::{build_rcj, quotient, validate_nucleus};
    use crate::quantaloid::{check_property, validate_involution, validate_quantaloid};

    fn b() -> Bounds {
        Bounds::default()
    }

    /// Rank of an L3_si object "(*,r)" in the chain 0 < m < 1.
    fn rank(id: &str) -> usize {
        ["(*,0)", "(*,m)", "(*,1)"].iter().position(|s| *s == id).unwrap()
    }

    #[test]
    fn f_of_identity_and_empty() {
        for q in [fixtures::l3_si(), build_rc(&fixtures::g2(), &b()).unwrap().quantaloid] {
            let cmp = CribleComparison::new(&q, &b()).unwrap();
            for x in 0..q.n_objects() {
                assert_eq!(cmp.f(&cmp.rc.calc.identity(x)), q.identity(x));
                assert_eq!(cmp.f(&cmp.rc.calc.empty(x, x)), q.hom(x, x).bottom());
            }
        }
    }

    #[test]
    fn f_on_generated_diagonal_in_l3_si() {
        // F(⟨(u,u)⟩) = u∘u* = u ∧ u = u for the map u: (*,u) -> (*,e)
        let q = fixtures::l3_si();
        let cmp = CribleComparison::new(&q, &b()).unwrap();
        let c = &cmp.maps.category;
        for m in 0..c.n_morphisms() {
            let a = cmp.maps.arrow(m);
            let r = cmp.rc.calc.generated(m, m).unwrap();
            let v = cmp.f(&r);
            assert_eq!(q.hom(a.dst, a.dst).id(v), q.hom(a.src, a.dst).id(a.elem));
        }
    }

    #[test]
    fn f_star_examples() {
        let q = fixtures::l3_si();
        let cmp = CribleComparison::new(&q, &b()).unwrap();
        let n = q.n_objects();
        for x in 0..n {
            for y in 0..n {
                let l = q.hom(x, y);
                assert_eq!(cmp.f_star(x, y, l.top()), cmp.rc.calc.top(x, y));
                for e in 0..l.len() {
                    assert!(cmp.rc.calc.is_closed(&cmp.f_star(x, y, e)));
                    assert_eq!(cmp.f(&cmp.f_star(x, y, e)), e);
                }
            }
        }
        // at (0,0) every span has apex (*,0) and value 0, so F*(0) is everything
        let z = q.object("(*,0)").unwrap();
        let bottom = cmp.f_star(z, z, q.hom(z, z).bottom());
        assert_eq!(bottom, cmp.rc.calc.top(z, z));
        for s in bottom.spans.ones() {
            let (f, _) = cmp.rc.calc.span(s);
            assert_eq!(cmp.maps.category.dom(f), z);
        }
    }

    #[test]
    fn f_is_left_adjoint_to_f_star() {
        for q in [fixtures::l3_si(), fixtures::l3(), build_rc(&fixtures::cospan(), &b()).unwrap().quantaloid] {
            let cmp = CribleComparison::new(&q, &b()).unwrap();
            let n = q.n_objects();
            for x in 0..n {
                for y in 0..n {
                    let l = q.hom(x, y);
                    for e in 0..cmp.rc.quantaloid.hom(x, y).len() {
                        let r = cmp.rc.crible(x, y, e);
                        for v in 0..l.len() {
                            assert_eq!(l.leq(cmp.f(r), v), r.is_subset(&cmp.f_star(x, y, v)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn split_iff_weakly_tabular() {
        for q in [fixtures::l3_si(), fixtures::l3(), fixtures::chain2(), fixtures::m3_quantale().0] {
            let cmp = CribleComparison::new(&q, &b()).unwrap();
            let n = q.n_objects();
            let split = (0..n * n).all(|h| {
                let (x, y) = (h / n, h % n);
                (0..q.hom(x, y).len()).all(|e| cmp.f(&cmp.f_star(x, y, e)) == e)
            });
            let wt = check_property(&q, Property::WeaklyTabular, None).unwrap().verdict.holds;
            assert_eq!(split, wt);
        }
    }

    #[test]
    fn lemma_nucleus_quotient_is_q() {
        let q = fixtures::l3_si();
        let cmp = CribleComparison::new(&q, &b()).unwrap();
        let j = cmp.lemma_nucleus();
        assert!(validate_nucleus(&cmp.rc.quantaloid, &j, true).unwrap().holds);
        let qj = quotient(&cmp.rc.quantaloid, &j).unwrap();
        assert!(validate_quantaloid(&qj.quantaloid).holds);
        for x in 0..q.n_objects() {
            for y in 0..q.n_objects() {
                assert_eq!(qj.quantaloid.hom(x, y).len(), q.hom(x, y).len());
            }
        }
    }

    #[test]
    fn l3_si_topology_is_canonical_for_the_locale() {
        let q = fixtures::l3_si();
        let d = derive_topology(&q).unwrap();
        assert!(d.verdict.holds);
        let c = &d.maps.category;
        // oracle: S covers e iff the join of the domains of S in L3 is e
        let oracle = locale_covers(c, |s| {
            let top = s.members.ones().map(|m| rank(c.object_id(c.dom(m)))).max();
            top.unwrap_or(0) == rank(c.object_id(s.at))
        })
        .unwrap();
        assert_eq!(d.topology, oracle);
        assert!(check_subcanonical(c, &d.topology, &b()).unwrap().holds);
        assert!(check_canonical(c, &d.topology, &b()).unwrap().holds);
    }

    #[test]
    fn g2_derived_topology_is_minimal() {
        let r = build_rc(&fixtures::g2(), &b()).unwrap();
        let d = derive_topology(&r.quantaloid).unwrap();
        assert_eq!(d.maps.category.n_morphisms(), 2);
        assert_eq!(d.topology, GrothendieckTopology::minimal(&d.maps.category));
    }

    #[test]
    fn roundtrip_positive_and_negative() {
        let si = fixtures::l3_si();
        let rt = roundtrip(&si, &b()).unwrap();
        assert!(rt.certified());
        assert_eq!(rt.report("L3_si").data["iso"], "certified");

        let l3 = fixtures::l3();
        let rt = roundtrip(&l3, &b()).unwrap();
        assert!(!rt.certified());
        let last = rt.axioms.last().unwrap();
        assert_eq!(last.property, Property::WeaklyTabular);
        let w = last.verdict.witness.as_ref().unwrap();
        assert_eq!(
            w.get("q"),
            Some(&Value::Arrow {
                src: "*".into(),
                dst: "*".into(),
                id: "m".into()
            })
        );
        assert!(roundtrip(&fixtures::chain2(), &b()).unwrap().certified());
    }

    #[test]
    fn roundtrip_on_closed_cribles_and_involutions_agree() {
        for c in [fixtures::terminal(), fixtures::cospan(), fixtures::g2()] {
            for jt in enumerate_topologies(&c, DEFAULT_TOPOLOGY_CANDIDATES).unwrap() {
                let closed = build_rcj(&c, &jt, &b()).unwrap();
                let q = closed.quantaloid();
                let rt = roundtrip(q, &b()).unwrap();
                assert!(rt.certified());
                let derived = derived_involution(q).unwrap();
                assert!(validate_involution(q, &derived).unwrap().holds);
                assert_eq!(derived, closed.involution);
                assert!(check_property(q, Property::Modular, Some(&derived)).unwrap().verdict.holds);
                let d = rt.derived.unwrap();
                assert!(check_subcanonical(&d.maps.category, &d.topology, &b()).unwrap().holds);
            }
        }
    }

    #[test]
    fn derived_involution_on_l3_si_is_identity() {
        let q = fixtures::l3_si();
        let inv = derived_involution(&q).unwrap();
        assert_eq!(inv, Involution::identity_on_ids(&q).unwrap());
        assert!(matches!(derived_involution(&fixtures::l3()), Err(Error::Argument(_))));
    }

    #[test]
    fn subcanonical_examples() {
        for c in [fixtures::terminal(), fixtures::cospan(), fixtures::g2()] {
            assert!(check_subcanonical(&c, &GrothendieckTopology::minimal(&c), &b()).unwrap().holds);
        }
        let t = fixtures::terminal();
        assert!(check_subcanonical(&t, &GrothendieckTopology::maximal(&t), &b()).unwrap().holds);

        // Map(R(G2)) with ∅ covering: the empty family has two amalgamations
        let r = build_rc(&fixtures::g2(), &b()).unwrap();
        let m = crate::quantaloid::maps_category(&r.quantaloid).unwrap().category;
        let v = check_subcanonical(&m, &GrothendieckTopology::maximal(&m), &b()).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.get("amalgamations"), Some(&Value::Count(2)));
        assert_eq!(w.get("tau"), Some(&Value::Family(vec![])));
    }

    #[test]
    fn natural_families_match_brute_force() {
        // oracle: all assignments of hom(dom s, D) to each member, filtered
        for c in [fixtures::cospan(), fixtures::g2(), fixtures::random_category(3, 3, 8)] {
            for x in 0..c.n_objects() {
                for s in sieves_on(&c, x) {
                    for d in 0..c.n_objects() {
                        let members: Vec<usize> = s.members.ones().collect();
                        let fam = Families { c: &c, members: members.clone(), d };
                        let mut fast = 0u64;
                        fam.each(u64::MAX, &mut |_| {
                            fast += 1;
                            true
                        })
                        .unwrap();
                        let choices: Vec<Vec<usize>> = members.iter().map(|&m| c.hom(c.dom(m), d).to_vec()).collect();
                        let total: usize = choices.iter().map(Vec::len).product();
                        let mut slow = 0u64;
                        for mut k in 0..total {
                            let mut tau = vec![usize::MAX; c.n_morphisms()];
                            for (i, ch) in choices.iter().enumerate() {
                                tau[members[i]] = ch[k % ch.len()];
                                k /= ch.len();
                            }
                            let natural = members.iter().all(|&m| {
                                c.arrows_into(c.dom(m)).iter().all(|&h| {
                                    tau[c.compose(m, h).unwrap()] == c.compose(tau[m], h).unwrap()
                                })
                            });
                            slow += natural as u64;
                        }
                        assert_eq!(fast, slow);
                    }
                }
            }
        }
    }

    #[test]
    fn coreflexive_splitting() {
        assert!(check_coreflexives_split(&fixtures::l3_si()).holds);
        let v = check_coreflexives_split(&fixtures::l3());
        assert_eq!(
            v.witness.unwrap().get("e"),
            Some(&Value::Arrow {
                src: "*".into(),
                dst: "*".into(),
                id: "0".into()
            })
        );
        assert!(check_coreflexives_split(&fixtures::chain2()).holds == false);
        let r = build_rc(&fixtures::g2(), &b()).unwrap();
        assert!(check_coreflexives_split(&r.quantaloid).holds == false);
    }

    #[test]
    fn canonical_on_terminal() {
        // ∅ covering * is subcanonical on 1, so J_min is not the largest
        let t = fixtures::terminal();
        assert!(!check_canonical(&t, &GrothendieckTopology::minimal(&t), &b()).unwrap().holds);
        assert!(check_canonical(&t, &GrothendieckTopology::maximal(&t), &b()).unwrap().holds);
    }
}
