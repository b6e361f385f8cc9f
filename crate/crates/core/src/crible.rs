//! Spans and cribles over a finite category, and the quantaloid R(C).
//!
//! A span `(f, g): X ⇸ Y` has a common domain, `cod g = X` and `cod f = Y`.
//! Cribles are bitsets over all pairs of morphisms, bit `f*m + g` standing
//! for `(f, g)`; since morphisms are indexed in id order, bit order is the
//! canonical sort order of spans.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::downsets::down_closed;
use crate::error::{Error, Result};
use crate::fincat::FinCategory;
use crate::lattice::FinLattice;
use crate::quantaloid::{FinQuantaloid, Involution};
use crate::report::Value;
use crate::Bounds;

/// A precomposition-closed set of spans `source ⇸ target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Crible {
    pub source: usize,
    pub target: usize,
    pub spans: FixedBitSet,
}

impl Crible {
    pub fn len(&self) -> usize {
        self.spans.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_clear()
    }

    pub fn is_subset(&self, other: &Crible) -> bool {
        self.spans.is_subset(&other.spans)
    }
}

/// Crible operations over one category.
#[derive(Clone, Debug)]
pub struct CribleCalculus {
    cat: FinCategory,
    m: usize,
}

impl CribleCalculus {
    pub fn new(cat: FinCategory) -> Self {
        let m = cat.n_morphisms();
        CribleCalculus { cat, m }
    }

    pub fn category(&self) -> &FinCategory {
        &self.cat
    }

    #[inline]
    pub fn bit(&self, f: usize, g: usize) -> usize {
        f * self.m + g
    }

    #[inline]
    pub fn span(&self, bit: usize) -> (usize, usize) {
        (bit / self.m, bit % self.m)
    }

    /// Source and target of a span, or a typing error if the apexes differ.
    pub fn span_ends(&self, f: usize, g: usize) -> Result<(usize, usize)> {
        let c = &self.cat;
        if c.dom(f) != c.dom(g) {
            return Err(Error::Typing(format!(
                "({}, {}) is not a span: domains `{}` and `{}` differ",
                c.morphism_id(f),
                c.morphism_id(g),
                c.object_id(c.dom(f)),
                c.object_id(c.dom(g))
            )));
        }
        Ok((c.cod(g), c.cod(f)))
    }

    pub fn empty(&self, source: usize, target: usize) -> Crible {
        Crible {
            source,
            target,
            spans: FixedBitSet::with_capacity(self.m * self.m),
        }
    }

    /// `{(f, f) | cod f = x}`.
    pub fn identity(&self, x: usize) -> Crible {
        let mut r = self.empty(x, x);
        for &f in self.cat.arrows_into(x) {
            r.spans.insert(self.bit(f, f));
        }
        r
    }

    /// Every span `source ⇸ target`: the top crible.
    pub fn top(&self, source: usize, target: usize) -> Crible {
        let mut r = self.empty(source, target);
        for &f in self.cat.arrows_into(target) {
            for &g in self.cat.arrows_into(source) {
                if self.cat.dom(f) == self.cat.dom(g) {
                    r.spans.insert(self.bit(f, g));
                }
            }
        }
        r
    }

    fn add_generated(&self, r: &mut Crible, f: usize, g: usize) {
        for &h in self.cat.arrows_into(self.cat.dom(f)) {
            let fh = self.cat.compose(f, h).expect("composable");
            let gh = self.cat.compose(g, h).expect("composable");
            r.spans.insert(self.bit(fh, gh));
        }
    }

    /// `⟨f, g⟩ = {(f∘h, g∘h) | cod h = dom f}`.
    pub fn generated(&self, f: usize, g: usize) -> Result<Crible> {
        let (x, y) = self.span_ends(f, g)?;
        let mut r = self.empty(x, y);
        self.add_generated(&mut r, f, g);
        Ok(r)
    }

    /// Smallest crible `source ⇸ target` containing the given spans.
    pub fn closure(&self, source: usize, target: usize, spans: &[(usize, usize)]) -> Result<Crible> {
        let mut r = self.empty(source, target);
        for &(f, g) in spans {
            if self.span_ends(f, g)? != (source, target) {
                return Err(Error::Typing(format!(
                    "span ({}, {}) does not run {} ⇸ {}",
                    self.cat.morphism_id(f),
                    self.cat.morphism_id(g),
                    self.cat.object_id(source),
                    self.cat.object_id(target)
                )));
            }
            self.add_generated(&mut r, f, g);
        }
        Ok(r)
    }

    /// Builds a crible from spans that must already be closed.
    pub fn from_spans(&self, source: usize, target: usize, spans: &[(usize, usize)]) -> Result<Crible> {
        let closed = self.closure(source, target, spans)?;
        let mut given = self.empty(source, target);
        spans.iter().for_each(|&(f, g)| given.spans.insert(self.bit(f, g)));
        if closed != given {
            let missing = closed.spans.difference(&given.spans).next().expect("nonempty");
            let (f, g) = self.span(missing);
            return Err(Error::Malformed(format!(
                "span set is not closed under precomposition: ({}, {}) is missing",
                self.cat.morphism_id(f),
                self.cat.morphism_id(g)
            )));
        }
        Ok(given)
    }

    pub fn is_closed(&self, r: &Crible) -> bool {
        let spans: Vec<(usize, usize)> = r.spans.ones().map(|b| self.span(b)).collect();
        self.closure(r.source, r.target, &spans).map(|c| c == *r).unwrap_or(false)
    }

    /// `S∘R = {(f, g) | ∃t: (f, t) ∈ S, (t, g) ∈ R}`.
    pub fn compose(&self, s: &Crible, r: &Crible) -> Result<Crible> {
        if r.target != s.source {
            return Err(Error::Typing(format!(
                "cannot compose a crible into `{}` with one out of `{}`",
                self.cat.object_id(r.target),
                self.cat.object_id(s.source)
            )));
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); self.m];
        for b in r.spans.ones() {
            let (t, g) = self.span(b);
            rows[t].push(g);
        }
        let mut out = self.empty(r.source, s.target);
        for b in s.spans.ones() {
            let (f, t) = self.span(b);
            for &g in &rows[t] {
                out.spans.insert(self.bit(f, g));
            }
        }
        Ok(out)
    }

    /// Reverses every span.
    pub fn involution(&self, r: &Crible) -> Crible {
        let mut out = self.empty(r.target, r.source);
        for b in r.spans.ones() {
            let (f, g) = self.span(b);
            out.spans.insert(self.bit(g, f));
        }
        out
    }

    fn same_hom(&self, a: &Crible, b: &Crible) -> Result<()> {
        if (a.source, a.target) != (b.source, b.target) {
            return Err(Error::Typing("cribles lie in different homs".into()));
        }
        Ok(())
    }

    pub fn union(&self, a: &Crible, b: &Crible) -> Result<Crible> {
        self.same_hom(a, b)?;
        let mut out = a.clone();
        out.spans.union_with(&b.spans);
        Ok(out)
    }

    pub fn intersection(&self, a: &Crible, b: &Crible) -> Result<Crible> {
        self.same_hom(a, b)?;
        let mut out = a.clone();
        out.spans.intersect_with(&b.spans);
        Ok(out)
    }

    /// All cribles `x ⇸ y`, or `Err(limit)` if there are more than `limit`.
    pub fn cribles(&self, x: usize, y: usize, limit: usize) -> std::result::Result<Vec<Crible>, usize> {
        let universe: Vec<usize> = self.top(x, y).spans.ones().collect();
        let pos: HashMap<usize, usize> = universe.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let closure: Vec<FixedBitSet> = universe
            .iter()
            .map(|&b| {
                let (f, g) = self.span(b);
                let r = self.generated(f, g).expect("span");
                let mut cl = FixedBitSet::with_capacity(universe.len());
                r.spans.ones().for_each(|s| cl.insert(pos[&s]));
                cl
            })
            .collect();
        let sets = down_closed(&closure, limit)?;
        Ok(sets
            .into_iter()
            .map(|set| {
                let mut r = self.empty(x, y);
                set.ones().for_each(|i| r.spans.insert(universe[i]));
                r
            })
            .collect())
    }

    pub fn span_ids(&self, r: &Crible) -> Vec<(String, String)> {
        r.spans
            .ones()
            .map(|b| {
                let (f, g) = self.span(b);
                (self.cat.morphism_id(f).to_string(), self.cat.morphism_id(g).to_string())
            })
            .collect()
    }

    /// `{(f,g),...}` with spans in canonical order; used as the element id.
    pub fn render(&self, r: &Crible) -> String {
        let body: Vec<String> = self.span_ids(r).iter().map(|(f, g)| format!("({f},{g})")).collect();
        format!("{{{}}}", body.join(","))
    }

    pub fn to_value(&self, r: &Crible) -> Value {
        Value::Crible {
            source: self.cat.object_id(r.source).to_string(),
            target: self.cat.object_id(r.target).to_string(),
            spans: self.span_ids(r),
        }
    }
}

/// R(C): the quantaloid of all cribles, with the reversal involution.
#[derive(Clone, Debug)]
pub struct CribleQuantaloid {
    pub calc: CribleCalculus,
    pub quantaloid: FinQuantaloid,
    pub involution: Involution,
    cribles: Vec<Vec<Crible>>,
    lookup: Vec<HashMap<FixedBitSet, usize>>,
}

impl CribleQuantaloid {
    pub fn category(&self) -> &FinCategory {
        self.calc.category()
    }

    /// The crible at element `e` of `hom(x, y)`.
    pub fn crible(&self, x: usize, y: usize, e: usize) -> &Crible {
        &self.cribles[x * self.quantaloid.n_objects() + y][e]
    }

    pub fn element(&self, r: &Crible) -> Result<usize> {
        self.lookup[r.source * self.quantaloid.n_objects() + r.target]
            .get(&r.spans)
            .copied()
            .ok_or_else(|| Error::Internal(format!("{} is not a crible", self.calc.render(r))))
    }

    /// Element of the crible generated by spans given by morphism ids.
    pub fn element_of(&self, c: &FinCategory, x: &str, y: &str, spans: &[(&str, &str)]) -> Result<usize> {
        let (x, y) = (c.object(x)?, c.object(y)?);
        let spans = spans
            .iter()
            .map(|(f, g)| Ok((c.morphism(f)?, c.morphism(g)?)))
            .collect::<Result<Vec<_>>>()?;
        self.element(&self.calc.closure(x, y, &spans)?)
    }
}

/// Builds R(C): homs are all cribles ordered by inclusion, composition and
/// identities as cribles, involution by reversal.
pub fn build_rc(c: &FinCategory, bounds: &Bounds) -> Result<CribleQuantaloid> {
    let calc = CribleCalculus::new(c.clone());
    let n = c.n_objects();
    let mut homs = Vec::with_capacity(n * n);
    let mut cribles = Vec::with_capacity(n * n);
    let mut lookup = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let mut list = calc.cribles(x, y, bounds.hom_elements).map_err(|limit| {
                Error::bound(
                    format!("cribles {} ⇸ {}", c.object_id(x), c.object_id(y)),
                    limit as u128 + 1,
                    limit as u128,
                )
            })?;
            let mut keyed: Vec<(String, Crible)> = list.drain(..).map(|r| (calc.render(&r), r)).collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            let ids: Vec<String> = keyed.iter().map(|k| k.0.clone()).collect();
            let list: Vec<Crible> = keyed.into_iter().map(|k| k.1).collect();
            let l = FinLattice::from_order(ids, |a, b| list[a].is_subset(&list[b]))?;
            lookup.push(list.iter().enumerate().map(|(i, r)| (r.spans.clone(), i)).collect::<HashMap<_, _>>());
            cribles.push(list);
            homs.push(l);
        }
    }
    let identities = (0..n)
        .map(|x| lookup[x * n + x][&calc.identity(x).spans])
        .collect();
    let quantaloid = FinQuantaloid::from_join_preserving(c.objects().to_vec(), homs, identities, |x, y, z, g, f| {
        let r = calc.compose(&cribles[y * n + z][g], &cribles[x * n + y][f])?;
        lookup[x * n + z]
            .get(&r.spans)
            .copied()
            .ok_or_else(|| Error::Internal("composite of cribles is not a crible".into()))
    })?;
    let involution = Involution::from_fn(&quantaloid, |x, y, a| lookup[y * n + x][&calc.involution(&cribles[x * n + y][a]).spans]);
    Ok(CribleQuantaloid {
        calc,
        quantaloid,
        involution,
        cribles,
        lookup,
    })
}
