//! Finite quantaloids given by hom-lattices and composition tables.
//!
//! Homs are indexed `x*n + y` for `hom(X, Y)`. Composition of `f: X -> Y`
//! with `g: Y -> Z` is stored per object triple, so every law check is a
//! table walk. Laws that are join-preserving in a variable are checked on
//! join-irreducibles only, which keeps crible quantaloids with a few hundred
//! elements per hom tractable.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fincat::{CategoryData, FinCategory, MorphismData};
use crate::lattice::{is_distributive, validate_lattice, FinLattice, LatticeData};
use crate::report::{Value, Verdict, Witness};

/// An element of `hom(src, dst)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub src: usize,
    pub dst: usize,
    pub elem: usize,
}

#[derive(Clone, Debug)]
pub struct FinQuantaloid {
    objects: Vec<String>,
    obj_index: HashMap<String, usize>,
    homs: Vec<FinLattice>,
    identities: Vec<usize>,
    comp: Vec<Vec<u32>>,
}

impl PartialEq for FinQuantaloid {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.homs == other.homs
            && self.identities == other.identities
            && self.comp == other.comp
    }
}

/// Serialised composition table for one hom pair `["Y|Z", "X|Y"]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionTable {
    pub hom_pair: (String, String),
    /// `[a, b, a∘b]` with `a` in the first hom of the pair.
    pub table: Vec<(String, String, String)>,
}

/// Quantaloid file schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantaloidData {
    pub objects: Vec<String>,
    pub homs: BTreeMap<String, LatticeData>,
    pub identities: BTreeMap<String, String>,
    pub composition: Vec<CompositionTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<BTreeMap<String, BTreeMap<String, String>>>,
}

pub fn hom_key(x: &str, y: &str) -> String {
    format!("{x}|{y}")
}

fn sorted_objects(objects: &[String]) -> Result<(Vec<String>, HashMap<String, usize>)> {
    let mut objs = objects.to_vec();
    objs.sort();
    for w in objs.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Malformed(format!("duplicate object id `{}`", w[0])));
        }
    }
    if let Some(o) = objs.iter().find(|o| o.contains('|')) {
        return Err(Error::Malformed(format!("object id `{o}` contains `|`")));
    }
    let index = objs.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok((objs, index))
}

impl FinQuantaloid {
    /// Tabulates `compose(x, y, z, g, f)` for `f in hom(x,y)`, `g in hom(y,z)`.
    ///
    /// `objects` must be sorted and unique.
    pub fn from_fn<F>(objects: Vec<String>, homs: Vec<FinLattice>, identities: Vec<usize>, compose: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize, usize, usize) -> Result<usize> + Sync,
    {
        let (sorted, obj_index) = sorted_objects(&objects)?;
        if sorted != objects {
            return Err(Error::Internal("quantaloid objects must be supplied in sorted order".into()));
        }
        let n = objects.len();
        if homs.len() != n * n || identities.len() != n {
            return Err(Error::Internal("hom or identity table has the wrong shape".into()));
        }
        let comp = (0..n * n * n)
            .into_par_iter()
            .map(|t| {
                let (x, y, z) = (t / (n * n), (t / n) % n, t % n);
                let (a, b) = (homs[x * n + y].len(), homs[y * n + z].len());
                let mut table = vec![0u32; a * b];
                for g in 0..b {
                    for f in 0..a {
                        let gf = compose(x, y, z, g, f)?;
                        if gf >= homs[x * n + z].len() {
                            return Err(Error::Internal("composite out of range".into()));
                        }
                        table[g * a + f] = gf as u32;
                    }
                }
                Ok(table)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FinQuantaloid {
            objects,
            obj_index,
            homs,
            identities,
            comp,
        })
    }

    /// Like [`FinQuantaloid::from_fn`] for a composition known to preserve
    /// joins in each variable: `compose` is only called on join-irreducible
    /// `g` and `f`, and every other composite is a join of those.
    pub fn from_join_preserving<F>(objects: Vec<String>, homs: Vec<FinLattice>, identities: Vec<usize>, compose: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize, usize, usize) -> Result<usize> + Sync,
    {
        let n = objects.len();
        if homs.len() != n * n {
            return Err(Error::Internal("hom or identity table has the wrong shape".into()));
        }
        let splits: Vec<_> = homs.par_iter().map(FinLattice::join_splitting).collect();
        let irreducible: Vec<Vec<bool>> = homs
            .iter()
            .map(|l| {
                let mut v = vec![false; l.len()];
                l.join_irreducibles().iter().for_each(|&j| v[j] = true);
                v
            })
            .collect();
        let tables = (0..n * n * n)
            .into_par_iter()
            .map(|t| {
                let (x, y, z) = (t / (n * n), (t / n) % n, t % n);
                let (hf, hg, out) = (x * n + y, y * n + z, x * n + z);
                let (a, b) = (homs[hf].len(), homs[hg].len());
                let lz = &homs[out];
                let mut table = vec![lz.bottom() as u32; a * b];
                let (order_f, parts_f) = &splits[hf];
                let (order_g, parts_g) = &splits[hg];
                for &f in homs[hf].join_irreducibles() {
                    for &g in order_g {
                        table[g * a + f] = if irreducible[hg][g] {
                            let gf = compose(x, y, z, g, f)?;
                            if gf >= lz.len() {
                                return Err(Error::Internal("composite out of range".into()));
                            }
                            gf as u32
                        } else if let Some((p, q)) = parts_g[g] {
                            lz.join(table[p * a + f] as usize, table[q * a + f] as usize) as u32
                        } else {
                            lz.bottom() as u32
                        };
                    }
                }
                for &f in order_f {
                    if let Some((p, q)) = parts_f[f] {
                        for g in 0..b {
                            table[g * a + f] = lz.join(table[g * a + p] as usize, table[g * a + q] as usize) as u32;
                        }
                    }
                }
                Ok(table)
            })
            .collect::<Result<Vec<_>>>()?;
        let (sorted, obj_index) = sorted_objects(&objects)?;
        if sorted != objects || identities.len() != n {
            return Err(Error::Internal("objects must be sorted, with one identity each".into()));
        }
        Ok(FinQuantaloid {
            objects,
            obj_index,
            homs,
            identities,
            comp: tables,
        })
    }

    /// Structural parse: every hom present and a lattice, every table total.
    /// Laws are not checked; see [`validate_quantaloid`].
    pub fn from_data(data: &QuantaloidData) -> Result<(Self, Option<Involution>)> {
        let (objects, obj_index) = sorted_objects(&data.objects)?;
        let n = objects.len();
        let mut homs = Vec::with_capacity(n * n);
        for x in &objects {
            for y in &objects {
                let key = hom_key(x, y);
                let l = data
                    .homs
                    .get(&key)
                    .ok_or_else(|| Error::Malformed(format!("missing hom `{key}`")))?;
                homs.push(FinLattice::from_data(l)?);
            }
        }
        if data.homs.len() != n * n {
            let extra = data.homs.keys().find(|k| {
                let mut it = k.splitn(2, '|');
                let (a, b) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
                !(obj_index.contains_key(a) && obj_index.contains_key(b))
            });
            return Err(Error::Malformed(format!(
                "hom `{}` names an undeclared object",
                extra.map(String::as_str).unwrap_or("?")
            )));
        }
        let mut identities = Vec::with_capacity(n);
        for (x, o) in objects.iter().enumerate() {
            let id = data
                .identities
                .get(o)
                .ok_or_else(|| Error::Malformed(format!("object `{o}` has no identity")))?;
            identities.push(homs[x * n + x].element(id)?);
        }
        if let Some(k) = data.identities.keys().find(|k| !obj_index.contains_key(*k)) {
            return Err(Error::Malformed(format!("identity for undeclared object `{k}`")));
        }

        let parse_key = |key: &str| -> Result<(usize, usize)> {
            let mut it = key.splitn(2, '|');
            let a = it.next().unwrap_or("");
            let b = it
                .next()
                .ok_or_else(|| Error::Malformed(format!("hom key `{key}` is not of the form X|Y")))?;
            let x = *obj_index
                .get(a)
                .ok_or_else(|| Error::Malformed(format!("undeclared object `{a}` in `{key}`")))?;
            let y = *obj_index
                .get(b)
                .ok_or_else(|| Error::Malformed(format!("undeclared object `{b}` in `{key}`")))?;
            Ok((x, y))
        };
        let mut comp: Vec<Option<Vec<u32>>> = vec![None; n * n * n];
        for t in &data.composition {
            let (y, z) = parse_key(&t.hom_pair.0)?;
            let (x, y2) = parse_key(&t.hom_pair.1)?;
            if y != y2 {
                return Err(Error::Typing(format!(
                    "hom pair [{}, {}] is not composable",
                    t.hom_pair.0, t.hom_pair.1
                )));
            }
            let (hf, hg, hgf) = (&homs[x * n + y], &homs[y * n + z], &homs[x * n + z]);
            let slot = &mut comp[(x * n + y) * n + z];
            if slot.is_some() {
                return Err(Error::Malformed(format!(
                    "duplicate composition table for [{}, {}]",
                    t.hom_pair.0, t.hom_pair.1
                )));
            }
            let mut table = vec![u32::MAX; hf.len() * hg.len()];
            for (a, b, ab) in &t.table {
                let (g, f, gf) = (hg.element(a)?, hf.element(b)?, hgf.element(ab)?);
                let cell = &mut table[g * hf.len() + f];
                if *cell != u32::MAX && *cell != gf as u32 {
                    return Err(Error::Malformed(format!("conflicting entries for {a}∘{b}")));
                }
                *cell = gf as u32;
            }
            if let Some(i) = table.iter().position(|&c| c == u32::MAX) {
                return Err(Error::Malformed(format!(
                    "composition table [{}, {}] has no entry for {}∘{}",
                    t.hom_pair.0,
                    t.hom_pair.1,
                    hg.id(i / hf.len()),
                    hf.id(i % hf.len())
                )));
            }
            *slot = Some(table);
        }
        let comp = comp
            .into_iter()
            .enumerate()
            .map(|(t, c)| {
                c.ok_or_else(|| {
                    let (x, y, z) = (t / (n * n), (t / n) % n, t % n);
                    Error::Malformed(format!(
                        "missing composition table for [{}, {}]",
                        hom_key(&objects[y], &objects[z]),
                        hom_key(&objects[x], &objects[y])
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let q = FinQuantaloid {
            objects,
            obj_index,
            homs,
            identities,
            comp,
        };
        let inv = data.involution.as_ref().map(|m| Involution::from_data(&q, m)).transpose()?;
        Ok((q, inv))
    }

    pub fn to_data(&self, inv: Option<&Involution>) -> QuantaloidData {
        let n = self.n_objects();
        let mut homs = BTreeMap::new();
        let mut composition = Vec::new();
        for x in 0..n {
            for y in 0..n {
                homs.insert(hom_key(&self.objects[x], &self.objects[y]), self.hom(x, y).to_data());
                for z in 0..n {
                    let (hf, hg, hgf) = (self.hom(x, y), self.hom(y, z), self.hom(x, z));
                    let mut table = Vec::with_capacity(hf.len() * hg.len());
                    for g in 0..hg.len() {
                        for f in 0..hf.len() {
                            table.push((
                                hg.id(g).to_string(),
                                hf.id(f).to_string(),
                                hgf.id(self.compose(x, y, z, g, f)).to_string(),
                            ));
                        }
                    }
                    composition.push(CompositionTable {
                        hom_pair: (hom_key(&self.objects[y], &self.objects[z]), hom_key(&self.objects[x], &self.objects[y])),
                        table,
                    });
                }
            }
        }
        QuantaloidData {
            objects: self.objects.clone(),
            homs,
            identities: (0..n)
                .map(|x| (self.objects[x].clone(), self.hom(x, x).id(self.identities[x]).to_string()))
                .collect(),
            composition,
            involution: inv.map(|i| i.to_data(self)),
        }
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_id(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn object(&self, id: &str) -> Result<usize> {
        self.obj_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    #[inline]
    pub fn hom(&self, x: usize, y: usize) -> &FinLattice {
        &self.homs[x * self.objects.len() + y]
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identities[x]
    }

    /// `g∘f` for `f in hom(x,y)`, `g in hom(y,z)`.
    #[inline]
    pub fn compose(&self, x: usize, y: usize, z: usize, g: usize, f: usize) -> usize {
        let n = self.objects.len();
        let a = self.homs[x * n + y].len();
        self.comp[(x * n + y) * n + z][g * a + f] as usize
    }

    pub fn compose_arrows(&self, g: Arrow, f: Arrow) -> Result<Arrow> {
        if f.dst != g.src {
            return Err(Error::Typing(format!(
                "cannot compose {} after {}",
                self.arrow_value(g),
                self.arrow_value(f)
            )));
        }
        Ok(Arrow {
            src: f.src,
            dst: g.dst,
            elem: self.compose(f.src, f.dst, g.dst, g.elem, f.elem),
        })
    }

    pub fn arrow(&self, src: &str, dst: &str, id: &str) -> Result<Arrow> {
        let (x, y) = (self.object(src)?, self.object(dst)?);
        Ok(Arrow {
            src: x,
            dst: y,
            elem: self.hom(x, y).element(id)?,
        })
    }

    pub fn arrow_value(&self, a: Arrow) -> Value {
        Value::Arrow {
            src: self.objects[a.src].clone(),
            dst: self.objects[a.dst].clone(),
            id: self.hom(a.src, a.dst).id(a.elem).to_string(),
        }
    }

    fn val(&self, x: usize, y: usize, e: usize) -> Value {
        self.arrow_value(Arrow { src: x, dst: y, elem: e })
    }

    /// Total number of hom elements.
    pub fn size(&self) -> usize {
        self.homs.iter().map(FinLattice::len).sum()
    }
}

/// First `Some` in index order; tasks run in parallel.
fn first_some<T: Send>(count: usize, f: impl Fn(usize) -> Option<T> + Sync + Send) -> Option<T> {
    (0..count).into_par_iter().map(f).collect::<Vec<_>>().into_iter().flatten().next()
}

/// Checks that `phi` preserves the bottom and binary joins, using
/// `phi(a ∨ j) = phi(a) ∨ phi(j)` for irreducible `j`.
fn join_preserving(
    src: &FinLattice,
    dst: &FinLattice,
    phi: impl Fn(usize) -> usize,
) -> std::result::Result<(), (Option<usize>, Option<usize>)> {
    if phi(src.bottom()) != dst.bottom() {
        return Err((None, None));
    }
    for a in 0..src.len() {
        for &j in src.join_irreducibles() {
            if phi(src.join(a, j)) != dst.join(phi(a), phi(j)) {
                return Err((Some(a), Some(j)));
            }
        }
    }
    Ok(())
}

/// Decides the quantaloid laws: identities are units, composition preserves
/// the bottom and binary joins in each variable, and is associative.
pub fn validate_quantaloid(q: &FinQuantaloid) -> Verdict {
    let n = q.n_objects();
    for x in 0..n {
        for y in 0..n {
            for f in 0..q.hom(x, y).len() {
                if q.compose(x, y, y, q.identity(y), f) != f || q.compose(x, x, y, f, q.identity(x)) != f {
                    return Verdict::fail(
                        Witness::new("identity law 1∘f = f = f∘1").with("f", q.val(x, y, f)),
                    );
                }
            }
        }
    }
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z)))).collect();
    let joins = first_some(triples.len(), |t| {
        let (x, y, z) = triples[t];
        let (hf, hg, hgf) = (q.hom(x, y), q.hom(y, z), q.hom(x, z));
        for g in 0..hg.len() {
            if let Err((a, b)) = join_preserving(hf, hgf, |f| q.compose(x, y, z, g, f)) {
                return Some(join_witness(q, "composition preserves joins in the right variable: g∘(a ∨ b) = g∘a ∨ g∘b", (x, y), a, b, hf).with("g", q.val(y, z, g)));
            }
        }
        for f in 0..hf.len() {
            if let Err((a, b)) = join_preserving(hg, hgf, |g| q.compose(x, y, z, g, f)) {
                return Some(join_witness(q, "composition preserves joins in the left variable: (a ∨ b)∘f = a∘f ∨ b∘f", (y, z), a, b, hg).with("f", q.val(x, y, f)));
            }
        }
        None
    });
    if let Some(w) = joins {
        return Verdict::fail(w);
    }
    let quads: Vec<(usize, usize, usize, usize)> = triples
        .iter()
        .flat_map(|&(w, x, y)| (0..n).map(move |z| (w, x, y, z)))
        .collect();
    let assoc = first_some(quads.len(), |t| {
        let (w, x, y, z) = quads[t];
        for &f in q.hom(w, x).join_irreducibles() {
            for &g in q.hom(x, y).join_irreducibles() {
                let gf = q.compose(w, x, y, g, f);
                for &h in q.hom(y, z).join_irreducibles() {
                    let hg = q.compose(x, y, z, h, g);
                    if q.compose(w, y, z, h, gf) != q.compose(w, x, z, hg, f) {
                        return Some(
                            Witness::new("associativity h∘(g∘f) = (h∘g)∘f")
                                .with("f", q.val(w, x, f))
                                .with("g", q.val(x, y, g))
                                .with("h", q.val(y, z, h)),
                        );
                    }
                }
            }
        }
        None
    });
    Verdict::from_option(assoc)
}

fn join_witness(
    q: &FinQuantaloid,
    law: &str,
    (x, y): (usize, usize),
    a: Option<usize>,
    b: Option<usize>,
    l: &FinLattice,
) -> Witness {
    match (a, b) {
        (Some(a), Some(b)) => Witness::new(law).with("a", q.val(x, y, a)).with("b", q.val(x, y, b)),
        _ => Witness::new(format!("{law} (empty join)")).with("a", q.val(x, y, l.bottom())),
    }
}

/// Validates a quantaloid file: lattices, structure, laws, and the
/// involution when present. Structural defects are errors.
pub fn validate_quantaloid_data(data: &QuantaloidData) -> Result<Vec<(&'static str, Verdict)>> {
    for (key, l) in &data.homs {
        let v = validate_lattice(l)?;
        if let Some(w) = v.witness {
            let mut out = Witness::new(format!("hom {key} is a complete lattice: {}", w.law));
            out.items = w.items;
            return Ok(vec![("quantaloid", Verdict::fail(out))]);
        }
    }
    let (q, inv) = FinQuantaloid::from_data(data)?;
    let mut out = vec![("quantaloid", validate_quantaloid(&q))];
    if let Some(inv) = inv {
        out.push(("involution", validate_involution(&q, &inv)?));
    }
    Ok(out)
}

/// Per-hom bijections `hom(X,Y) -> hom(Y,X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    maps: Vec<Vec<u32>>,
}

impl Involution {
    pub fn from_fn(q: &FinQuantaloid, f: impl Fn(usize, usize, usize) -> usize) -> Self {
        let n = q.n_objects();
        let maps = (0..n * n)
            .map(|h| {
                let (x, y) = (h / n, h % n);
                (0..q.hom(x, y).len()).map(|a| f(x, y, a) as u32).collect()
            })
            .collect();
        Involution { maps }
    }

    /// Sends each element to the element with the same id in the opposite hom.
    pub fn identity_on_ids(q: &FinQuantaloid) -> Result<Self> {
        let n = q.n_objects();
        let mut maps = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let (src, dst) = (q.hom(x, y), q.hom(y, x));
                maps.push(
                    (0..src.len())
                        .map(|a| dst.element(src.id(a)).map(|b| b as u32))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
        }
        Ok(Involution { maps })
    }

    pub fn from_data(q: &FinQuantaloid, data: &BTreeMap<String, BTreeMap<String, String>>) -> Result<Self> {
        let n = q.n_objects();
        let mut maps = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let key = hom_key(q.object_id(x), q.object_id(y));
                let table = data
                    .get(&key)
                    .ok_or_else(|| Error::Malformed(format!("involution has no table for `{key}`")))?;
                let (src, dst) = (q.hom(x, y), q.hom(y, x));
                let mut row = vec![u32::MAX; src.len()];
                for (a, b) in table {
                    row[src.element(a)?] = dst.element(b)? as u32;
                }
                if let Some(a) = row.iter().position(|&b| b == u32::MAX) {
                    return Err(Error::Malformed(format!("involution undefined on `{}` in `{key}`", src.id(a))));
                }
                maps.push(row);
            }
        }
        if data.len() != n * n {
            return Err(Error::Malformed("involution names an undeclared hom".into()));
        }
        Ok(Involution { maps })
    }

    pub fn to_data(&self, q: &FinQuantaloid) -> BTreeMap<String, BTreeMap<String, String>> {
        let n = q.n_objects();
        let mut out = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                let (src, dst) = (q.hom(x, y), q.hom(y, x));
                let table = (0..src.len())
                    .map(|a| (src.id(a).to_string(), dst.id(self.apply(q, x, y, a)).to_string()))
                    .collect();
                out.insert(hom_key(q.object_id(x), q.object_id(y)), table);
            }
        }
        out
    }

    /// The involute of `a in hom(x,y)`, an element of `hom(y,x)`.
    #[inline]
    pub fn apply(&self, q: &FinQuantaloid, x: usize, y: usize, a: usize) -> usize {
        self.maps[x * q.n_objects() + y][a] as usize
    }

    pub fn apply_arrow(&self, q: &FinQuantaloid, a: Arrow) -> Arrow {
        Arrow {
            src: a.dst,
            dst: a.src,
            elem: self.apply(q, a.src, a.dst, a.elem),
        }
    }
}

/// Decides the involution laws: joins, identities, involutivity, and
/// contravariance `(g∘f)^o = f^o∘g^o`.
pub fn validate_involution(q: &FinQuantaloid, inv: &Involution) -> Result<Verdict> {
    let n = q.n_objects();
    if inv.maps.len() != n * n {
        return Err(Error::Malformed("involution table has the wrong number of homs".into()));
    }
    for x in 0..n {
        for y in 0..n {
            let (src, dst) = (q.hom(x, y), q.hom(y, x));
            let row = &inv.maps[x * n + y];
            if row.len() != src.len() || src.len() != dst.len() {
                return Err(Error::Malformed(format!(
                    "involution on hom {} is not a bijection onto hom {}",
                    hom_key(q.object_id(x), q.object_id(y)),
                    hom_key(q.object_id(y), q.object_id(x))
                )));
            }
            let mut seen = FixedBitSet::with_capacity(dst.len());
            for &b in row {
                if b as usize >= dst.len() || seen.put(b as usize) {
                    return Err(Error::Malformed(format!(
                        "involution on hom {} is not a bijection",
                        hom_key(q.object_id(x), q.object_id(y))
                    )));
                }
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            if let Err((a, b)) = join_preserving(q.hom(x, y), q.hom(y, x), |a| inv.apply(q, x, y, a)) {
                return Ok(Verdict::fail(join_witness(q, "involution preserves joins", (x, y), a, b, q.hom(x, y))));
            }
        }
    }
    for x in 0..n {
        if inv.apply(q, x, x, q.identity(x)) != q.identity(x) {
            return Ok(Verdict::fail(
                Witness::new("identities are self-involute").with("1", q.val(x, x, q.identity(x))),
            ));
        }
    }
    for x in 0..n {
        for y in 0..n {
            for a in 0..q.hom(x, y).len() {
                if inv.apply(q, y, x, inv.apply(q, x, y, a)) != a {
                    return Ok(Verdict::fail(Witness::new("f^oo = f").with("f", q.val(x, y, a))));
                }
            }
        }
    }
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z)))).collect();
    let w = first_some(triples.len(), |t| {
        let (x, y, z) = triples[t];
        for &f in q.hom(x, y).join_irreducibles() {
            for &g in q.hom(y, z).join_irreducibles() {
                let lhs = inv.apply(q, x, z, q.compose(x, y, z, g, f));
                let rhs = q.compose(z, y, x, inv.apply(q, x, y, f), inv.apply(q, y, z, g));
                if lhs != rhs {
                    return Some(
                        Witness::new("contravariance (g∘f)^o = f^o∘g^o")
                            .with("f", q.val(x, y, f))
                            .with("g", q.val(y, z, g)),
                    );
                }
            }
        }
        None
    });
    Ok(Verdict::from_option(w))
}

/// The right adjoint of `f in hom(x,y)`: the `g` with `1 ≤ g∘f` and `f∘g ≤ 1`.
pub fn right_adjoint(q: &FinQuantaloid, x: usize, y: usize, f: usize) -> Result<Option<usize>> {
    let (ix, iy) = (q.identity(x), q.identity(y));
    let mut found = None;
    for g in 0..q.hom(y, x).len() {
        let unit = q.hom(x, x).leq(ix, q.compose(x, y, x, g, f));
        let counit = q.hom(y, y).leq(q.compose(y, x, y, f, g), iy);
        if unit && counit {
            if let Some(prev) = found {
                return Err(Error::Internal(format!(
                    "{} has two right adjoints {} and {}",
                    q.val(x, y, f),
                    q.hom(y, x).id(prev),
                    q.hom(y, x).id(g)
                )));
            }
            found = Some(g);
        }
    }
    Ok(found)
}

/// Right adjoints for every element: `radj[x*n+y][f]`.
#[derive(Clone, Debug)]
pub struct AdjointTable {
    radj: Vec<Vec<Option<u32>>>,
    maps: Vec<Vec<usize>>,
}

impl AdjointTable {
    pub fn new(q: &FinQuantaloid) -> Result<Self> {
        let n = q.n_objects();
        let radj = (0..n * n)
            .into_par_iter()
            .map(|h| {
                let (x, y) = (h / n, h % n);
                (0..q.hom(x, y).len())
                    .map(|f| right_adjoint(q, x, y, f).map(|g| g.map(|g| g as u32)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let maps = radj
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, g)| g.is_some()).map(|(f, _)| f).collect())
            .collect();
        Ok(AdjointTable { radj, maps })
    }

    /// Left adjoints in `hom(x,y)`, ascending.
    pub fn maps(&self, n: usize, x: usize, y: usize) -> &[usize] {
        &self.maps[x * n + y]
    }

    pub fn right(&self, n: usize, x: usize, y: usize, f: usize) -> Option<usize> {
        self.radj[x * n + y][f].map(|g| g as usize)
    }

    fn star(&self, n: usize, x: usize, y: usize, f: usize) -> usize {
        self.right(n, x, y, f).expect("f is a map")
    }
}

/// An adjunction `left ⊣ right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Adjunction {
    pub left: Arrow,
    pub right: Arrow,
}

/// `Map(Q)` as a finite category, with each morphism's adjunction.
#[derive(Clone, Debug)]
pub struct MapsCategory {
    pub category: FinCategory,
    /// Indexed by morphism of `category`.
    pub adjunctions: Vec<Adjunction>,
    index: HashMap<Arrow, usize>,
}

impl MapsCategory {
    pub fn morphism_of(&self, a: Arrow) -> Option<usize> {
        self.index.get(&a).copied()
    }

    pub fn arrow(&self, m: usize) -> Arrow {
        self.adjunctions[m].left
    }

    pub fn right(&self, m: usize) -> Arrow {
        self.adjunctions[m].right
    }
}

/// Id of the map `e: X -> Y` in `Map(Q)`.
pub fn map_id(q: &FinQuantaloid, a: Arrow) -> String {
    format!("{}:{}->{}", q.hom(a.src, a.dst).id(a.elem), q.object_id(a.src), q.object_id(a.dst))
}

pub fn maps_category(q: &FinQuantaloid) -> Result<MapsCategory> {
    maps_category_with(q, &AdjointTable::new(q)?)
}

pub fn maps_category_with(q: &FinQuantaloid, adj: &AdjointTable) -> Result<MapsCategory> {
    let n = q.n_objects();
    let mut arrows = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for &f in adj.maps(n, x, y) {
                arrows.push(Arrow { src: x, dst: y, elem: f });
            }
        }
    }
    let mut morphisms = Vec::new();
    let mut composition = Vec::new();
    for &f in &arrows {
        morphisms.push(MorphismData {
            id: map_id(q, f),
            dom: q.object_id(f.src).to_string(),
            cod: q.object_id(f.dst).to_string(),
        });
        for &g in arrows.iter().filter(|g| g.src == f.dst) {
            let gf = q.compose_arrows(g, f)?;
            if adj.right(n, gf.src, gf.dst, gf.elem).is_none() {
                return Err(Error::Internal(format!(
                    "composite of maps {} and {} is not a map",
                    map_id(q, g),
                    map_id(q, f)
                )));
            }
            composition.push((map_id(q, g), map_id(q, f), map_id(q, gf)));
        }
    }
    let mut identities = BTreeMap::new();
    for x in 0..n {
        let id = Arrow { src: x, dst: x, elem: q.identity(x) };
        if adj.right(n, x, x, id.elem).is_none() {
            return Err(Error::Internal(format!("identity on {} is not a map", q.object_id(x))));
        }
        identities.insert(q.object_id(x).to_string(), map_id(q, id));
    }
    let data = CategoryData {
        objects: q.objects().to_vec(),
        morphisms,
        identities,
        composition,
    };
    let category = FinCategory::from_data(&data).map_err(|e| Error::Internal(format!("Map(Q) is not a category: {e}")))?;
    let mut adjunctions = Vec::with_capacity(arrows.len());
    let mut index = HashMap::new();
    for m in 0..category.n_morphisms() {
        let (x, y) = (category.dom(m), category.cod(m));
        let id = category.morphism_id(m);
        let elem = arrows
            .iter()
            .find(|a| a.src == x && a.dst == y && map_id(q, **a) == id)
            .expect("morphism comes from an arrow")
            .elem;
        let left = Arrow { src: x, dst: y, elem };
        let right = Arrow { src: y, dst: x, elem: adj.star(n, x, y, elem) };
        index.insert(left, m);
        adjunctions.push(Adjunction { left, right });
    }
    Ok(MapsCategory {
        category,
        adjunctions,
        index,
    })
}

/// The seven properties of a quantaloid decided by [`check_property`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    LocallyLocalic,
    MapDiscrete,
    WeaklyTabular,
    MapTabular,
    WeaklyModular,
    Tabular,
    Modular,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::LocallyLocalic,
        Property::MapDiscrete,
        Property::WeaklyTabular,
        Property::MapTabular,
        Property::WeaklyModular,
        Property::Tabular,
        Property::Modular,
    ];

    /// The four conditions characterising quantaloids of closed cribles.
    pub const AXIOMS: [Property; 4] = [
        Property::LocallyLocalic,
        Property::MapDiscrete,
        Property::WeaklyTabular,
        Property::WeaklyModular,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::LocallyLocalic => "locally_localic",
            Property::MapDiscrete => "map_discrete",
            Property::WeaklyTabular => "weakly_tabular",
            Property::MapTabular => "map_tabular",
            Property::WeaklyModular => "weakly_modular",
            Property::Tabular => "tabular",
            Property::Modular => "modular",
        }
    }

    pub fn needs_involution(self) -> bool {
        matches!(self, Property::Tabular | Property::Modular)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown property `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: Property,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Largest object triple rescanned in full to report the canonical-first
/// modular witness after a reduced check fails.
const RESCAN_LIMIT: usize = 1 << 24;

/// Precomputed data shared by the property checkers.
pub struct PropertyContext<'a> {
    q: &'a FinQuantaloid,
    adj: AdjointTable,
}

impl<'a> PropertyContext<'a> {
    pub fn new(q: &'a FinQuantaloid) -> Result<Self> {
        Ok(PropertyContext {
            q,
            adj: AdjointTable::new(q)?,
        })
    }

    pub fn adjoints(&self) -> &AdjointTable {
        &self.adj
    }

    fn n(&self) -> usize {
        self.q.n_objects()
    }

    fn star(&self, x: usize, y: usize, f: usize) -> usize {
        self.adj.star(self.n(), x, y, f)
    }

    /// Spans of maps `X ⇸ Y` through each apex: `(a, f: a -> y, g: a -> x)`.
    fn spans(&self, x: usize, y: usize) -> Vec<(usize, usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for a in 0..n {
            for &f in self.adj.maps(n, a, y) {
                for &g in self.adj.maps(n, a, x) {
                    out.push((a, f, g));
                }
            }
        }
        out
    }

    /// `f∘g*` for a span `(f, g)` through `a`.
    fn span_value(&self, x: usize, y: usize, (a, f, g): (usize, usize, usize)) -> usize {
        self.q.compose(x, a, y, f, self.star(a, x, g))
    }

    pub fn check(&self, p: Property, inv: Option<&Involution>) -> Result<PropertyVerdict> {
        let inv = if p.needs_involution() {
            Some(inv.ok_or_else(|| Error::Argument(format!("property `{p}` needs an involution")))?)
        } else {
            None
        };
        let w = match p {
            Property::LocallyLocalic => self.locally_localic(),
            Property::MapDiscrete => self.map_discrete(),
            Property::WeaklyTabular => self.weakly_tabular(),
            Property::MapTabular => self.tabulation(None),
            Property::WeaklyModular => self.weakly_modular(),
            Property::Tabular => self.tabulation(inv),
            Property::Modular => self.modular(inv.expect("checked")),
        };
        Ok(PropertyVerdict {
            property: p,
            verdict: Verdict::from_option(w),
        })
    }

    fn hom_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect()
    }

    fn locally_localic(&self) -> Option<Witness> {
        let q = self.q;
        let pairs = self.hom_pairs();
        first_some(pairs.len(), |i| {
            let (x, y) = pairs[i];
            let l = q.hom(x, y);
            let v = is_distributive(l);
            v.witness.map(|w| {
                let mut out = Witness::new(format!("hom is a locale: {}", w.law));
                for (k, val) in w.items {
                    if let Value::Element(e) = val {
                        out = out.with(k, q.val(x, y, l.element(&e).expect("element of hom")));
                    }
                }
                out
            })
        })
    }

    fn map_discrete(&self) -> Option<Witness> {
        let (q, n) = (self.q, self.n());
        for (x, y) in self.hom_pairs() {
            let l = q.hom(x, y);
            for &f in self.adj.maps(n, x, y) {
                for &g in self.adj.maps(n, x, y) {
                    if f != g && l.leq(f, g) {
                        return Some(
                            Witness::new("maps f ≤ g implies f = g")
                                .with("f", q.val(x, y, f))
                                .with("g", q.val(x, y, g)),
                        );
                    }
                }
            }
        }
        None
    }

    /// All `f∘g*` over spans of maps `X ⇸ Y`, as a set of elements.
    pub fn span_values(&self, x: usize, y: usize) -> FixedBitSet {
        let mut t = FixedBitSet::with_capacity(self.q.hom(x, y).len());
        for s in self.spans(x, y) {
            t.insert(self.span_value(x, y, s));
        }
        t
    }

    fn weakly_tabular(&self) -> Option<Witness> {
        let q = self.q;
        let pairs = self.hom_pairs();
        first_some(pairs.len(), |i| {
            let (x, y) = pairs[i];
            let l = q.hom(x, y);
            let t = self.span_values(x, y);
            (0..l.len()).find_map(|e| {
                let join = l.join_all(t.ones().filter(|&v| l.leq(v, e)));
                (join != e).then(|| {
                    Witness::new("q = ⋁{f∘g* | (f,g) span of maps, f∘g* ≤ q}")
                        .with("q", q.val(x, y, e))
                        .with("join", q.val(x, y, join))
                })
            })
        })
    }

    /// Map-tabularity (`inv = None`, adjoints) or tabularity (involutes).
    fn tabulation(&self, inv: Option<&Involution>) -> Option<Witness> {
        let q = self.q;
        let pairs = self.hom_pairs();
        first_some(pairs.len(), |i| {
            let (x, y) = pairs[i];
            let l = q.hom(x, y);
            let mut hit = FixedBitSet::with_capacity(l.len());
            for (a, f, g) in self.spans(x, y) {
                let (fo, go) = match inv {
                    None => (self.star(a, y, f), self.star(a, x, g)),
                    Some(inv) => (inv.apply(q, a, y, f), inv.apply(q, a, x, g)),
                };
                let ff = q.compose(a, y, a, fo, f);
                let gg = q.compose(a, x, a, go, g);
                if q.hom(a, a).meet(ff, gg) == q.identity(a) {
                    hit.insert(q.compose(x, a, y, f, go));
                }
            }
            (0..l.len()).find(|&e| !hit.contains(e)).map(|e| {
                let law = match inv {
                    None => "q = f∘g* with f*∘f ∧ g*∘g = 1 for some span of maps",
                    Some(_) => "q = f∘g^o with f^o∘f ∧ g^o∘g = 1 for some span of maps",
                };
                Witness::new(law).with("q", q.val(x, y, e))
            })
        })
    }

    fn weakly_modular(&self) -> Option<Witness> {
        let q = self.q;
        let pairs = self.hom_pairs();
        first_some(pairs.len(), |i| {
            let (x, y) = pairs[i];
            let spans = self.spans(x, y);
            let l = q.hom(x, y);
            for &(a, f, g) in &spans {
                let fg = self.span_value(x, y, (a, f, g));
                let (gs, fs) = (self.star(a, x, g), self.star(a, y, f));
                for &(b, m, nn) in &spans {
                    let mn = self.span_value(x, y, (b, m, nn));
                    let lhs = l.meet(fg, mn);
                    let gn = q.compose(b, x, a, gs, nn);
                    let fm = q.compose(b, y, a, fs, m);
                    let mid = q.hom(b, a).meet(gn, fm);
                    let rhs = q.compose(x, a, y, f, q.compose(x, b, a, mid, self.star(b, x, nn)));
                    if !l.leq(lhs, rhs) {
                        return Some(
                            Witness::new("f∘g* ∧ m∘n* ≤ f∘(g*∘n ∧ f*∘m)∘n*")
                                .with("f", q.val(a, y, f))
                                .with("g", q.val(a, x, g))
                                .with("m", q.val(b, y, m))
                                .with("n", q.val(b, x, nn)),
                        );
                    }
                }
            }
            None
        })
    }

    fn modular(&self, inv: &Involution) -> Option<Witness> {
        let q = self.q;
        let n = self.n();
        let triples: Vec<(usize, usize, usize)> =
            (0..n).flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z)))).collect();
        let all = |l: &FinLattice| (0..l.len()).collect::<Vec<_>>();
        let scan = |(x, y, z): (usize, usize, usize), fs: &[usize], gs: &[usize], hs: &[usize]| {
            let lxz = q.hom(x, z);
            for &f in fs {
                for &g in gs {
                    let gf = q.compose(x, y, z, g, f);
                    let go = inv.apply(q, y, z, g);
                    for &h in hs {
                        let lhs = lxz.meet(gf, h);
                        let inner = q.hom(x, y).meet(f, q.compose(x, z, y, go, h));
                        if !lxz.leq(lhs, q.compose(x, y, z, g, inner)) {
                            return Some(
                                Witness::new("g∘f ∧ h ≤ g∘(f ∧ g^o∘h)")
                                    .with("f", q.val(x, y, f))
                                    .with("g", q.val(y, z, g))
                                    .with("h", q.val(x, z, h)),
                            );
                        }
                    }
                }
            }
            None
        };
        let distributive: Vec<bool> = (0..n * n).map(|h| is_distributive(&q.homs[h]).holds).collect();
        let failing = first_some(triples.len(), |t| {
            let (x, y, z) = triples[t];
            let w = if distributive[x * n + z] {
                scan(
                    (x, y, z),
                    q.hom(x, y).join_irreducibles(),
                    q.hom(y, z).join_irreducibles(),
                    q.hom(x, z).join_irreducibles(),
                )
            } else {
                scan((x, y, z), &all(q.hom(x, y)), &all(q.hom(y, z)), &all(q.hom(x, z)))
            };
            w.map(|w| (t, w))
        });
        let (t, w) = failing?;
        let (x, y, z) = triples[t];
        let size = q.hom(x, y).len() * q.hom(y, z).len() * q.hom(x, z).len();
        if distributive[x * n + z] && size <= RESCAN_LIMIT {
            return scan((x, y, z), &all(q.hom(x, y)), &all(q.hom(y, z)), &all(q.hom(x, z)));
        }
        Some(w)
    }
}

/// Decides one property by exhaustive quantification. The witness is the
/// first counterexample in canonical order.
pub fn check_property(q: &FinQuantaloid, p: Property, inv: Option<&Involution>) -> Result<PropertyVerdict> {
    if p.needs_involution() && inv.is_none() {
        return Err(Error::Argument(format!("property `{p}` needs an involution")));
    }
    PropertyContext::new(q)?.check(p, inv)
}

/// Objects `(X,e)` for idempotents `e`, homs `{q | f∘q∘e = q}`, identity `e`.
pub fn split_idempotent_completion(q: &FinQuantaloid) -> Result<FinQuantaloid> {
    let n = q.n_objects();
    let mut objs: Vec<(String, usize, usize)> = Vec::new();
    for x in 0..n {
        for e in 0..q.hom(x, x).len() {
            if q.compose(x, x, x, e, e) == e {
                objs.push((format!("({},{})", q.object_id(x), q.hom(x, x).id(e)), x, e));
            }
        }
    }
    objs.sort();
    let m = objs.len();
    let mut homs = Vec::with_capacity(m * m);
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(m * m);
    let mut pos: Vec<HashMap<usize, usize>> = Vec::with_capacity(m * m);
    for (_, x, e) in &objs {
        for (_, y, f) in &objs {
            let sub: Vec<usize> = (0..q.hom(*x, *y).len())
                .filter(|&a| q.compose(*x, *y, *y, *f, q.compose(*x, *x, *y, a, *e)) == a)
                .collect();
            let l = q.hom(*x, *y).restrict(&sub)?;
            let p: HashMap<usize, usize> = sub.iter().map(|&a| (a, l.element(q.hom(*x, *y).id(a)).expect("kept"))).collect();
            let by_local: Vec<usize> = (0..l.len()).map(|i| q.hom(*x, *y).element(l.id(i)).expect("kept")).collect();
            homs.push(l);
            members.push(by_local);
            pos.push(p);
        }
    }
    let identities = (0..m)
        .map(|i| pos[i * m + i][&objs[i].2])
        .collect();
    let objects = objs.iter().map(|o| o.0.clone()).collect();
    FinQuantaloid::from_fn(objects, homs, identities, |i, j, k, g, f| {
        let (x, y, z) = (objs[i].1, objs[j].1, objs[k].1);
        let gf = q.compose(x, y, z, members[j * m + k][g], members[i * m + j][f]);
        pos[i * m + k]
            .get(&gf)
            .copied()
            .ok_or_else(|| Error::Internal("completion is not closed under composition".into()))
    })
}

fn subset_id(c: &FinCategory, ms: &[usize]) -> String {
    let names: Vec<&str> = ms.iter().map(|&m| c.morphism_id(m)).collect();
    format!("{{{}}}", names.join(","))
}

/// Powersets of hom-sets with elementwise composition; with `involution`,
/// also the inverse involution, which needs every morphism invertible.
pub fn free_quantaloid(c: &FinCategory, involution: bool, max_hom: usize) -> Result<(FinQuantaloid, Option<Involution>)> {
    let n = c.n_objects();
    let inverses = if involution {
        Some(
            (0..c.n_morphisms())
                .map(|f| {
                    c.inverse(f).ok_or_else(|| {
                        Error::Argument(format!(
                            "the inverse involution needs a groupoid; `{}` is not invertible",
                            c.morphism_id(f)
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let mut homs = Vec::with_capacity(n * n);
    let mut subsets: Vec<Vec<u64>> = Vec::with_capacity(n * n);
    let mut lookup: Vec<HashMap<u64, usize>> = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let hom = c.hom(x, y);
            if hom.len() >= 63 || (1usize << hom.len()) > max_hom {
                return Err(Error::bound("free quantaloid hom elements", 1u128 << hom.len().min(127), max_hom as u128));
            }
            let masks: Vec<u64> = (0..1u64 << hom.len()).collect();
            let ids: Vec<String> = masks
                .iter()
                .map(|&mk| {
                    let ms: Vec<usize> = (0..hom.len()).filter(|i| mk & (1 << i) != 0).map(|i| hom[i]).collect();
                    subset_id(c, &ms)
                })
                .collect();
            let l = FinLattice::from_order(ids.clone(), |a, b| masks[a] & !masks[b] == 0)?;
            let order: Vec<u64> = (0..l.len()).map(|i| masks[ids.iter().position(|s| s == l.id(i)).expect("id")]).collect();
            lookup.push(order.iter().enumerate().map(|(i, &mk)| (mk, i)).collect());
            subsets.push(order);
            homs.push(l);
        }
    }
    let bit = |x: usize, y: usize, m: usize| c.hom(x, y).iter().position(|&h| h == m).expect("typed");
    let identities = (0..n)
        .map(|x| lookup[x * n + x][&(1u64 << bit(x, x, c.identity(x)))])
        .collect();
    let q = FinQuantaloid::from_fn(c.objects().to_vec(), homs, identities, |x, y, z, g, f| {
        let (sf, sg) = (subsets[x * n + y][f], subsets[y * n + z][g]);
        let mut out = 0u64;
        for (i, &fm) in c.hom(x, y).iter().enumerate() {
            if sf & (1 << i) == 0 {
                continue;
            }
            for (k, &gm) in c.hom(y, z).iter().enumerate() {
                if sg & (1 << k) != 0 {
                    out |= 1 << bit(x, z, c.compose(gm, fm).expect("composable"));
                }
            }
        }
        Ok(lookup[x * n + z][&out])
    })?;
    let inv = inverses.map(|inverse| {
        Involution::from_fn(&q, |x, y, a| {
            let s = subsets[x * n + y][a];
            let mut out = 0u64;
            for (i, &m) in c.hom(x, y).iter().enumerate() {
                if s & (1 << i) != 0 {
                    out |= 1 << bit(y, x, inverse[m]);
                }
            }
            lookup[y * n + x][&out]
        })
    });
    Ok((q, inv))
}

/// A locale as a one-object quantaloid: composition is meet, identity is top.
pub fn locale_quantale(l: &FinLattice, object: &str) -> Result<FinQuantaloid> {
    FinQuantaloid::from_fn(vec![object.to_string()], vec![l.clone()], vec![l.top()], |_, _, _, g, f| Ok(l.meet(g, f)))
}
