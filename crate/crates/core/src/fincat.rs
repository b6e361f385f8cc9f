//! Finite categories given by composition tables, sieves, and Grothendieck
//! topologies, with exhaustive enumeration oracles.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::downsets::down_closed;
use crate::error::{Error, Result};
use crate::report::{Value, Verdict, Witness};

/// Default cap on candidate covering assignments examined by
/// [`enumerate_topologies`].
pub const DEFAULT_TOPOLOGY_CANDIDATES: u64 = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismData {
    pub id: String,
    pub dom: String,
    pub cod: String,
}

/// Category file schema. `composition` lists `[g, f, g∘f]`; entries
/// involving an identity may be omitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryData {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismData>,
    pub identities: BTreeMap<String, String>,
    #[serde(default)]
    pub composition: Vec<(String, String, String)>,
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCategory {
    objects: Vec<String>,
    obj_index: HashMap<String, usize>,
    ids: Vec<String>,
    mor_index: HashMap<String, usize>,
    dom: Vec<usize>,
    cod: Vec<usize>,
    identity: Vec<usize>,
    comp: Vec<u32>,
    into: Vec<Vec<usize>>,
    homs: Vec<Vec<usize>>,
}

fn mor(c: &[String], m: usize) -> Value {
    Value::Morphism(c[m].clone())
}

/// Structural parse; the inner result carries the first violated law.
fn assemble(data: &CategoryData) -> Result<std::result::Result<FinCategory, Witness>> {
    let mut objects = data.objects.clone();
    objects.sort();
    for w in objects.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Malformed(format!("duplicate object id `{}`", w[0])));
        }
    }
    let obj_index: HashMap<String, usize> = objects.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let object = |id: &str| {
        obj_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Malformed(format!("undeclared object `{id}`")))
    };

    let mut morphisms = data.morphisms.clone();
    morphisms.sort_by(|a, b| a.id.cmp(&b.id));
    for w in morphisms.windows(2) {
        if w[0].id == w[1].id {
            return Err(Error::Malformed(format!("duplicate morphism id `{}`", w[0].id)));
        }
    }
    let ids: Vec<String> = morphisms.iter().map(|m| m.id.clone()).collect();
    let mor_index: HashMap<String, usize> = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let morphism = |id: &str| {
        mor_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Malformed(format!("undeclared morphism `{id}`")))
    };
    let dom = morphisms.iter().map(|m| object(&m.dom)).collect::<Result<Vec<_>>>()?;
    let cod = morphisms.iter().map(|m| object(&m.cod)).collect::<Result<Vec<_>>>()?;

    for key in data.identities.keys() {
        object(key)?;
    }
    let mut identity = Vec::with_capacity(objects.len());
    for o in &objects {
        let m = data
            .identities
            .get(o)
            .ok_or_else(|| Error::Malformed(format!("object `{o}` has no identity")))?;
        identity.push(morphism(m)?);
    }
    let entries = data
        .composition
        .iter()
        .map(|(g, f, gf)| Ok((morphism(g)?, morphism(f)?, morphism(gf)?)))
        .collect::<Result<Vec<_>>>()?;

    let n = objects.len();
    let m = ids.len();
    let laws = (|| {
        for (x, &i) in identity.iter().enumerate() {
            if dom[i] != x || cod[i] != x {
                return Err(Witness::new("identity has domain and codomain its object")
                    .with("object", Value::Object(objects[x].clone()))
                    .with("identity", mor(&ids, i)));
            }
        }
        let is_identity = |f: usize| identity[dom[f]] == f && cod[f] == dom[f];
        let mut comp = vec![NONE; m * m];
        for f in 0..m {
            comp[identity[cod[f]] * m + f] = f as u32;
            comp[f * m + identity[dom[f]]] = f as u32;
        }
        for &(g, f, gf) in &entries {
            if cod[f] != dom[g] {
                return Err(Witness::new("composite g∘f declared only when cod(f) = dom(g)")
                    .with("g", mor(&ids, g))
                    .with("f", mor(&ids, f)));
            }
            if dom[gf] != dom[f] || cod[gf] != cod[g] {
                return Err(Witness::new("g∘f runs from dom(f) to cod(g)")
                    .with("g", mor(&ids, g))
                    .with("f", mor(&ids, f))
                    .with("gf", mor(&ids, gf)));
            }
            let slot = &mut comp[g * m + f];
            if *slot != NONE && *slot != gf as u32 {
                let law = if is_identity(g) || is_identity(f) {
                    "identity law 1∘f = f = f∘1"
                } else {
                    "composition is single-valued"
                };
                return Err(Witness::new(law)
                    .with("g", mor(&ids, g))
                    .with("f", mor(&ids, f))
                    .with("declared", mor(&ids, gf))
                    .with("expected", mor(&ids, *slot as usize)));
            }
            *slot = gf as u32;
        }
        for f in 0..m {
            for g in 0..m {
                if cod[f] == dom[g] && comp[g * m + f] == NONE {
                    return Err(Witness::new("composition defined on every composable pair")
                        .with("g", mor(&ids, g))
                        .with("f", mor(&ids, f)));
                }
            }
        }
        for f in 0..m {
            for g in (0..m).filter(|&g| dom[g] == cod[f]) {
                let gf = comp[g * m + f] as usize;
                for h in (0..m).filter(|&h| dom[h] == cod[g]) {
                    let hg = comp[h * m + g] as usize;
                    if comp[h * m + gf] != comp[hg * m + f] {
                        return Err(Witness::new("associativity h∘(g∘f) = (h∘g)∘f")
                            .with("h", mor(&ids, h))
                            .with("g", mor(&ids, g))
                            .with("f", mor(&ids, f)));
                    }
                }
            }
        }
        Ok(comp)
    })();
    let comp = match laws {
        Ok(c) => c,
        Err(w) => return Ok(Err(w)),
    };

    let mut into = vec![Vec::new(); n];
    let mut homs = vec![Vec::new(); n * n];
    for f in 0..m {
        into[cod[f]].push(f);
        homs[dom[f] * n + cod[f]].push(f);
    }
    Ok(Ok(FinCategory {
        objects,
        obj_index,
        ids,
        mor_index,
        dom,
        cod,
        identity,
        comp,
        into,
        homs,
    }))
}

/// Decides whether `data` is a category.
pub fn validate_category(data: &CategoryData) -> Result<Verdict> {
    Ok(match assemble(data)? {
        Ok(_) => Verdict::pass(),
        Err(w) => Verdict::fail(w),
    })
}

impl FinCategory {
    pub fn from_data(data: &CategoryData) -> Result<Self> {
        assemble(data)?.map_err(|w| Error::invalid("category", w))
    }

    pub fn to_data(&self) -> CategoryData {
        let m = self.ids.len();
        let mut composition = Vec::new();
        for g in 0..m {
            for f in 0..m {
                if self.is_identity(g) || self.is_identity(f) {
                    continue;
                }
                if let Some(gf) = self.compose(g, f) {
                    composition.push((self.ids[g].clone(), self.ids[f].clone(), self.ids[gf].clone()));
                }
            }
        }
        CategoryData {
            objects: self.objects.clone(),
            morphisms: (0..m)
                .map(|f| MorphismData {
                    id: self.ids[f].clone(),
                    dom: self.objects[self.dom[f]].clone(),
                    cod: self.objects[self.cod[f]].clone(),
                })
                .collect(),
            identities: self
                .identity
                .iter()
                .enumerate()
                .map(|(x, &i)| (self.objects[x].clone(), self.ids[i].clone()))
                .collect(),
            composition,
        }
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn n_morphisms(&self) -> usize {
        self.ids.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_id(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn morphism_id(&self, f: usize) -> &str {
        &self.ids[f]
    }

    pub fn object(&self, id: &str) -> Result<usize> {
        self.obj_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn morphism(&self, id: &str) -> Result<usize> {
        self.mor_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    #[inline]
    pub fn dom(&self, f: usize) -> usize {
        self.dom[f]
    }

    #[inline]
    pub fn cod(&self, f: usize) -> usize {
        self.cod[f]
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identity[x]
    }

    pub fn is_identity(&self, f: usize) -> bool {
        self.identity[self.dom[f]] == f
    }

    /// `g∘f`, defined when `cod(f) = dom(g)`.
    #[inline]
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        match self.comp[g * self.ids.len() + f] {
            NONE => None,
            gf => Some(gf as usize),
        }
    }

    /// Morphisms with codomain `x`, in id order.
    pub fn arrows_into(&self, x: usize) -> &[usize] {
        &self.into[x]
    }

    /// Morphisms `x -> y`, in id order.
    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        &self.homs[x * self.objects.len() + y]
    }

    /// Finds a two-sided inverse of `f`, if any.
    pub fn inverse(&self, f: usize) -> Option<usize> {
        self.hom(self.cod[f], self.dom[f]).iter().copied().find(|&g| {
            self.compose(g, f) == Some(self.identity[self.dom[f]])
                && self.compose(f, g) == Some(self.identity[self.cod[f]])
        })
    }
}

/// A set of morphisms into `at`, closed under precomposition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sieve {
    pub at: usize,
    pub members: FixedBitSet,
}

impl Sieve {
    pub fn empty(c: &FinCategory, at: usize) -> Sieve {
        Sieve {
            at,
            members: FixedBitSet::with_capacity(c.n_morphisms()),
        }
    }

    /// `⊤_at`: every morphism into `at`.
    pub fn maximal(c: &FinCategory, at: usize) -> Sieve {
        let mut s = Sieve::empty(c, at);
        c.arrows_into(at).iter().for_each(|&f| s.members.insert(f));
        s
    }

    /// Checks membership types and precomposition closure.
    pub fn new(c: &FinCategory, at: usize, members: FixedBitSet) -> Result<Sieve> {
        for f in members.ones() {
            if c.cod(f) != at {
                return Err(Error::Malformed(format!(
                    "sieve on `{}` contains `{}` with codomain `{}`",
                    c.object_id(at),
                    c.morphism_id(f),
                    c.object_id(c.cod(f))
                )));
            }
        }
        let s = Sieve { at, members };
        if let Some((f, h)) = s.closure_failure(c) {
            return Err(Error::Malformed(format!(
                "sieve on `{}` is not closed under precomposition: contains `{}` but not its composite with `{}`",
                c.object_id(at),
                c.morphism_id(f),
                c.morphism_id(h)
            )));
        }
        Ok(s)
    }

    pub fn from_ids<S: AsRef<str>>(c: &FinCategory, at: &str, members: &[S]) -> Result<Sieve> {
        let at = c.object(at).map_err(|_| Error::Malformed(format!("undeclared object `{at}`")))?;
        let mut bits = FixedBitSet::with_capacity(c.n_morphisms());
        for m in members {
            let f = c
                .morphism(m.as_ref())
                .map_err(|_| Error::Malformed(format!("undeclared morphism `{}`", m.as_ref())))?;
            bits.insert(f);
        }
        Sieve::new(c, at, bits)
    }

    fn closure_failure(&self, c: &FinCategory) -> Option<(usize, usize)> {
        for f in self.members.ones() {
            for &h in c.arrows_into(c.dom(f)) {
                let fh = c.compose(f, h).expect("composable");
                if !self.members.contains(fh) {
                    return Some((f, h));
                }
            }
        }
        None
    }

    pub fn contains(&self, f: usize) -> bool {
        self.members.contains(f)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.at == other.at && self.members.is_subset(&other.members)
    }

    /// Canonical sort key: member indices ascending (morphisms are in id order).
    pub fn key(&self) -> Vec<usize> {
        self.members.ones().collect()
    }

    pub fn member_ids(&self, c: &FinCategory) -> Vec<String> {
        self.members.ones().map(|f| c.morphism_id(f).to_string()).collect()
    }

    pub fn to_value(&self, c: &FinCategory) -> Value {
        Value::Sieve {
            at: c.object_id(self.at).to_string(),
            members: self.member_ids(c),
        }
    }
}

/// `f*(S) = {g | f∘g ∈ S}`, a sieve on `dom(f)`.
pub fn pullback_sieve(c: &FinCategory, f: usize, s: &Sieve) -> Result<Sieve> {
    if c.cod(f) != s.at {
        return Err(Error::Typing(format!(
            "cannot pull a sieve on `{}` back along `{}` with codomain `{}`",
            c.object_id(s.at),
            c.morphism_id(f),
            c.object_id(c.cod(f))
        )));
    }
    let d = c.dom(f);
    let mut out = Sieve::empty(c, d);
    for &g in c.arrows_into(d) {
        if s.contains(c.compose(f, g).expect("composable")) {
            out.members.insert(g);
        }
    }
    Ok(out)
}

/// Every sieve on `x`, without duplicates, in canonical order.
pub fn sieves_on(c: &FinCategory, x: usize) -> Vec<Sieve> {
    let local = c.arrows_into(x);
    let pos: HashMap<usize, usize> = local.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let closure: Vec<FixedBitSet> = local
        .iter()
        .map(|&f| {
            let mut b = FixedBitSet::with_capacity(local.len());
            for &h in c.arrows_into(c.dom(f)) {
                b.insert(pos[&c.compose(f, h).expect("composable")]);
            }
            b
        })
        .collect();
    let sets = down_closed(&closure, usize::MAX).expect("unbounded");
    let mut out: Vec<Sieve> = sets
        .into_iter()
        .map(|b| {
            let mut s = Sieve::empty(c, x);
            b.ones().for_each(|i| s.members.insert(local[i]));
            s
        })
        .collect();
    out.sort_by_key(Sieve::key);
    out
}

/// An assignment of covering sieves to objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrothendieckTopology {
    covers: Vec<Vec<Sieve>>,
}

impl GrothendieckTopology {
    /// Normalises each object's sieves into canonical order.
    pub fn new(c: &FinCategory, mut covers: Vec<Vec<Sieve>>) -> Result<Self> {
        if covers.len() != c.n_objects() {
            return Err(Error::Malformed(format!(
                "topology lists {} objects, category has {}",
                covers.len(),
                c.n_objects()
            )));
        }
        for (x, list) in covers.iter_mut().enumerate() {
            if let Some(s) = list.iter().find(|s| s.at != x) {
                return Err(Error::Malformed(format!(
                    "sieve on `{}` listed as a cover of `{}`",
                    c.object_id(s.at),
                    c.object_id(x)
                )));
            }
            list.sort_by_key(Sieve::key);
            list.dedup();
        }
        Ok(GrothendieckTopology { covers })
    }

    /// Only maximal sieves cover.
    pub fn minimal(c: &FinCategory) -> Self {
        let covers = (0..c.n_objects()).map(|x| vec![Sieve::maximal(c, x)]).collect();
        GrothendieckTopology { covers }
    }

    /// Every sieve covers.
    pub fn maximal(c: &FinCategory) -> Self {
        let covers = (0..c.n_objects()).map(|x| sieves_on(c, x)).collect();
        GrothendieckTopology { covers }
    }

    pub fn covers(&self, x: usize) -> &[Sieve] {
        &self.covers[x]
    }

    pub fn is_cover(&self, s: &Sieve) -> bool {
        self.covers[s.at].binary_search_by_key(&s.key(), Sieve::key).is_ok()
    }

    /// Pointwise inclusion of covering families.
    pub fn is_coarser_than(&self, other: &GrothendieckTopology) -> bool {
        self.covers.iter().flatten().all(|s| other.is_cover(s))
    }

    pub fn to_covers_data(&self, c: &FinCategory) -> BTreeMap<String, Vec<Vec<String>>> {
        self.covers
            .iter()
            .enumerate()
            .map(|(x, list)| (c.object_id(x).to_string(), list.iter().map(|s| s.member_ids(c)).collect()))
            .collect()
    }
}

/// Decides the three axioms: maximal sieves cover, covers are stable under
/// pullback, and covers are transitive.
pub fn validate_topology(c: &FinCategory, j: &GrothendieckTopology) -> Verdict {
    for x in 0..c.n_objects() {
        let top = Sieve::maximal(c, x);
        if !j.is_cover(&top) {
            return Verdict::fail(Witness::new("maximal sieve covers").with("object", Value::Object(c.object_id(x).into())));
        }
    }
    for x in 0..c.n_objects() {
        for s in j.covers(x) {
            for &f in c.arrows_into(x) {
                let pulled = pullback_sieve(c, f, s).expect("typed");
                if !j.is_cover(&pulled) {
                    return Verdict::fail(
                        Witness::new("stability: S covers => f*(S) covers")
                            .with("S", s.to_value(c))
                            .with("f", Value::Morphism(c.morphism_id(f).into()))
                            .with("f*(S)", pulled.to_value(c)),
                    );
                }
            }
        }
    }
    for x in 0..c.n_objects() {
        let all = sieves_on(c, x);
        for s in j.covers(x) {
            for t in all.iter().filter(|t| !j.is_cover(t)) {
                let locally = s
                    .members
                    .ones()
                    .all(|f| j.is_cover(&pullback_sieve(c, f, t).expect("typed")));
                if locally {
                    return Verdict::fail(
                        Witness::new("transitivity: S covers and s*(T) covers for all s in S => T covers")
                            .with("S", s.to_value(c))
                            .with("T", t.to_value(c)),
                    );
                }
            }
        }
    }
    Verdict::pass()
}

/// Every Grothendieck topology on `c`, by filtering all candidate covering
/// assignments that contain the maximal sieves.
///
/// Output order is deterministic; the minimal topology comes first.
pub fn enumerate_topologies(c: &FinCategory, bound: u64) -> Result<Vec<GrothendieckTopology>> {
    let n = c.n_objects();
    let sieves: Vec<Vec<Sieve>> = (0..n).map(|x| sieves_on(c, x)).collect();
    let lookup: Vec<HashMap<FixedBitSet, usize>> = sieves
        .iter()
        .map(|list| list.iter().enumerate().map(|(i, s)| (s.members.clone(), i)).collect())
        .collect();
    let free_bits: u32 = sieves.iter().map(|l| l.len() as u32 - 1).sum();
    let candidates: u128 = 1u128 << free_bits.min(127);
    if free_bits >= 64 || candidates > bound as u128 {
        return Err(Error::bound("candidate topology assignments", candidates, bound as u128));
    }

    // pull[x][t][k] = index of (into(x)[k])*(sieves[x][t]) among sieves on its domain
    let pull: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|x| {
            sieves[x]
                .iter()
                .map(|t| {
                    c.arrows_into(x)
                        .iter()
                        .map(|&f| lookup[c.dom(f)][&pullback_sieve(c, f, t).expect("typed").members])
                        .collect()
                })
                .collect()
        })
        .collect();
    let pos_in_into: Vec<HashMap<usize, usize>> = (0..n)
        .map(|x| c.arrows_into(x).iter().enumerate().map(|(k, &f)| (f, k)).collect())
        .collect();
    let top_idx: Vec<usize> = (0..n).map(|x| lookup[x][&Sieve::maximal(c, x).members]).collect();
    // bit layout: free sieves (non-maximal) of object 0, then object 1, ...
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for (x, list) in sieves.iter().enumerate() {
        for t in 0..list.len() {
            if t != top_idx[x] {
                slots.push((x, t));
            }
        }
    }

    let mut out = Vec::new();
    let mut cover: Vec<Vec<bool>> = sieves.iter().map(|l| vec![false; l.len()]).collect();
    for mask in 0..candidates as u64 {
        for (x, row) in cover.iter_mut().enumerate() {
            row.iter_mut().for_each(|b| *b = false);
            row[top_idx[x]] = true;
        }
        for (bit, &(x, t)) in slots.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                cover[x][t] = true;
            }
        }
        let stable = (0..n).all(|x| {
            (0..sieves[x].len())
                .filter(|&s| cover[x][s])
                .all(|s| c.arrows_into(x).iter().enumerate().all(|(k, &f)| cover[c.dom(f)][pull[x][s][k]]))
        });
        if !stable {
            continue;
        }
        let transitive = (0..n).all(|x| {
            (0..sieves[x].len()).filter(|&s| cover[x][s]).all(|s| {
                (0..sieves[x].len()).filter(|&t| !cover[x][t]).all(|t| {
                    !sieves[x][s].members.ones().all(|f| {
                        let k = pos_in_into[x][&f];
                        cover[c.dom(f)][pull[x][t][k]]
                    })
                })
            })
        });
        if !transitive {
            continue;
        }
        let covers = (0..n)
            .map(|x| {
                (0..sieves[x].len())
                    .filter(|&t| cover[x][t])
                    .map(|t| sieves[x][t].clone())
                    .collect()
            })
            .collect();
        out.push(GrothendieckTopology { covers });
    }
    Ok(out)
}

/// Where a site file finds its category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CategorySource {
    Inline(CategoryData),
    Path(String),
}

/// Site file schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteData {
    pub category: CategorySource,
    pub covers: BTreeMap<String, Vec<Vec<String>>>,
}

impl SiteData {
    pub fn new(c: &FinCategory, j: &GrothendieckTopology) -> Self {
        SiteData {
            category: CategorySource::Inline(c.to_data()),
            covers: j.to_covers_data(c),
        }
    }
}

/// Resolves the category (paths are relative to `base`) and parses covers.
///
/// Sieves are checked for closure, not completed. Objects without an entry
/// get no covers, which the maximal-sieve axiom then rejects.
pub fn load_site(data: &SiteData, base: Option<&Path>) -> Result<(FinCategory, GrothendieckTopology)> {
    let cdata = match &data.category {
        CategorySource::Inline(d) => d.clone(),
        CategorySource::Path(p) => {
            let path = match base {
                Some(b) => b.join(p),
                None => p.into(),
            };
            serde_json::from_str(&std::fs::read_to_string(path)?)?
        }
    };
    let c = FinCategory::from_data(&cdata)?;
    let mut covers = vec![Vec::new(); c.n_objects()];
    for (obj, list) in &data.covers {
        let x = c.object(obj).map_err(|_| Error::Malformed(format!("covers for undeclared object `{obj}`")))?;
        for members in list {
            covers[x].push(Sieve::from_ids(&c, obj, members)?);
        }
    }
    let j = GrothendieckTopology::new(&c, covers)?;
    Ok((c, j))
}
