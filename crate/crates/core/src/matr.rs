//! Matr(Q): Q-typed sets and matrices, and a bounded modular-law check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::is_distributive;
use crate::quantaloid::{FinQuantaloid, Involution};
use crate::report::{Check, CheckReport, Value, Verdict, Witness};

/// A finite set whose `i`-th element has type `types[i]`, an object of Q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedSet {
    pub types: Vec<usize>,
}

impl TypedSet {
    pub fn new(q: &FinQuantaloid, types: Vec<usize>) -> Result<Self> {
        if let Some(t) = types.iter().find(|&&t| t >= q.n_objects()) {
            return Err(Error::Malformed(format!("type {t} is not an object")));
        }
        Ok(TypedSet { types })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    fn labels(&self, q: &FinQuantaloid) -> Vec<String> {
        self.types.iter().enumerate().map(|(i, &t)| format!("{i}:{}", q.object_id(t))).collect()
    }
}

/// `M: src -> dst` with `entries[y * |src| + x] ∈ hom(type x, type y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    pub src: TypedSet,
    pub dst: TypedSet,
    pub entries: Vec<usize>,
}

impl QMatrix {
    pub fn new(q: &FinQuantaloid, src: TypedSet, dst: TypedSet, entries: Vec<usize>) -> Result<Self> {
        if entries.len() != src.len() * dst.len() {
            return Err(Error::Malformed(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                dst.len(),
                src.len()
            )));
        }
        for (i, &e) in entries.iter().enumerate() {
            let (y, x) = (i / src.len(), i % src.len());
            if e >= q.hom(src.types[x], dst.types[y]).len() {
                return Err(Error::Malformed(format!("entry ({y},{x}) is out of range")));
            }
        }
        Ok(QMatrix { src, dst, entries })
    }

    pub fn bottom(q: &FinQuantaloid, src: &TypedSet, dst: &TypedSet) -> Self {
        let entries = (0..dst.len() * src.len())
            .map(|i| q.hom(src.types[i % src.len()], dst.types[i / src.len()]).bottom())
            .collect();
        QMatrix {
            src: src.clone(),
            dst: dst.clone(),
            entries,
        }
    }

    /// Identities on the diagonal, bottom elsewhere.
    pub fn identity(q: &FinQuantaloid, set: &TypedSet) -> Self {
        let mut m = Self::bottom(q, set, set);
        for (i, &t) in set.types.iter().enumerate() {
            m.entries[i * set.len() + i] = q.identity(t);
        }
        m
    }

    pub fn entry(&self, y: usize, x: usize) -> usize {
        self.entries[y * self.src.len() + x]
    }

    pub fn to_value(&self, q: &FinQuantaloid) -> Value {
        let entries = (0..self.dst.len())
            .map(|y| {
                (0..self.src.len())
                    .map(|x| q.hom(self.src.types[x], self.dst.types[y]).id(self.entry(y, x)).to_string())
                    .collect()
            })
            .collect();
        Value::Matrix {
            rows: self.dst.labels(q),
            cols: self.src.labels(q),
            entries,
        }
    }
}

/// `(N∘M)(z,x) = ⋁_y N(z,y)∘M(y,x)`.
pub fn matrix_compose(q: &FinQuantaloid, n: &QMatrix, m: &QMatrix) -> Result<QMatrix> {
    if n.src != m.dst {
        return Err(Error::Typing("matrices do not share their middle typed set".into()));
    }
    let entries = compose_raw(q, &m.src.types, &m.dst.types, &n.dst.types, &n.entries, &m.entries);
    Ok(QMatrix {
        src: m.src.clone(),
        dst: n.dst.clone(),
        entries,
    })
}

/// `M^o(x,y) = M(y,x)^o`.
pub fn matrix_involution(q: &FinQuantaloid, m: &QMatrix, inv: &Involution) -> QMatrix {
    QMatrix {
        src: m.dst.clone(),
        dst: m.src.clone(),
        entries: involution_raw(q, inv, &m.src.types, &m.dst.types, &m.entries),
    }
}

pub fn matrix_meet(q: &FinQuantaloid, a: &QMatrix, b: &QMatrix) -> Result<QMatrix> {
    if a.src != b.src || a.dst != b.dst {
        return Err(Error::Typing("meet of matrices with different types".into()));
    }
    Ok(QMatrix {
        src: a.src.clone(),
        dst: a.dst.clone(),
        entries: meet_raw(q, &a.src.types, &a.dst.types, &a.entries, &b.entries),
    })
}

pub fn matrix_leq(q: &FinQuantaloid, a: &QMatrix, b: &QMatrix) -> bool {
    a.src == b.src && a.dst == b.dst && leq_raw(q, &a.src.types, &a.dst.types, &a.entries, &b.entries)
}

fn compose_raw(q: &FinQuantaloid, xs: &[usize], ys: &[usize], zs: &[usize], n: &[usize], m: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(zs.len() * xs.len());
    for (z, &tz) in zs.iter().enumerate() {
        for (x, &tx) in xs.iter().enumerate() {
            let l = q.hom(tx, tz);
            let mut acc = l.bottom();
            for (y, &ty) in ys.iter().enumerate() {
                acc = l.join(acc, q.compose(tx, ty, tz, n[z * ys.len() + y], m[y * xs.len() + x]));
            }
            out.push(acc);
        }
    }
    out
}

fn involution_raw(q: &FinQuantaloid, inv: &Involution, xs: &[usize], ys: &[usize], m: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for (x, &tx) in xs.iter().enumerate() {
        for (y, &ty) in ys.iter().enumerate() {
            out.push(inv.apply(q, tx, ty, m[y * xs.len() + x]));
        }
    }
    out
}

fn meet_raw(q: &FinQuantaloid, xs: &[usize], ys: &[usize], a: &[usize], b: &[usize]) -> Vec<usize> {
    (0..a.len())
        .map(|i| q.hom(xs[i % xs.len()], ys[i / xs.len()]).meet(a[i], b[i]))
        .collect()
}

fn leq_raw(q: &FinQuantaloid, xs: &[usize], ys: &[usize], a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| q.hom(xs[i % xs.len()], ys[i / xs.len()]).leq(a[i], b[i]))
}

/// Default number of random triples per shape in randomized mode.
pub const DEFAULT_SAMPLES: u64 = 1024;

/// How [`check_matr_modular`] searches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrConfig {
    /// Largest typed set considered.
    pub size_bound: usize,
    /// `Some(seed)` switches to randomized sampling.
    pub seed: Option<u64>,
    pub samples: u64,
    /// Most triples the exhaustive search may visit.
    pub budget: u64,
}

impl MatrConfig {
    pub fn exhaustive(size_bound: usize, budget: u64) -> Self {
        MatrConfig {
            size_bound,
            seed: None,
            samples: DEFAULT_SAMPLES,
            budget,
        }
    }
}

const LAW: &str = "modular law g∘f ∧ h ≤ g∘(f ∧ g^o∘h) in Matr(Q)";

struct Shape<'s> {
    x: &'s [usize],
    y: &'s [usize],
    z: &'s [usize],
}

impl Shape<'_> {
    /// `None` if `g∘f ∧ h ≤ g∘(f ∧ g^o∘h)`, else both sides.
    fn violation(&self, q: &FinQuantaloid, inv: &Involution, f: &[usize], g: &[usize], h: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
        let (x, y, z) = (self.x, self.y, self.z);
        let gf = compose_raw(q, x, y, z, g, f);
        let lhs = meet_raw(q, x, z, &gf, h);
        let go = involution_raw(q, inv, y, z, g);
        let goh = compose_raw(q, x, z, y, &go, h);
        let inner = meet_raw(q, x, y, f, &goh);
        let rhs = compose_raw(q, x, y, z, g, &inner);
        (!leq_raw(q, x, z, &lhs, &rhs)).then_some((lhs, rhs))
    }
}

/// Typed sets of each size up to `bound`, with nondecreasing types; every
/// typed set is isomorphic to one of these.
fn typed_sets(n_objects: usize, bound: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..bound {
        layer = layer
            .iter()
            .flat_map(|s| {
                let from = s.last().copied().unwrap_or(0);
                (from..n_objects).map(move |t| {
                    let mut v = s.clone();
                    v.push(t);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// All matrices `xs -> ys`, decoded from a mixed-radix index.
struct Matrices {
    radix: Vec<usize>,
    count: u128,
}

impl Matrices {
    fn new(q: &FinQuantaloid, xs: &[usize], ys: &[usize]) -> Self {
        let radix: Vec<usize> = (0..xs.len() * ys.len()).map(|i| q.hom(xs[i % xs.len()], ys[i / xs.len()]).len()).collect();
        let count = radix.iter().fold(1u128, |a, &r| a.saturating_mul(r as u128));
        Matrices { radix, count }
    }

    fn decode(&self, mut k: u64) -> Vec<usize> {
        self.radix
            .iter()
            .map(|&r| {
                let d = (k % r as u64) as usize;
                k /= r as u64;
                d
            })
            .collect()
    }
}

/// Matrices with one join-irreducible entry and bottom elsewhere, with the
/// (row, column) of that entry.
fn irreducible_matrices(q: &FinQuantaloid, xs: &[usize], ys: &[usize]) -> Vec<(usize, usize, Vec<usize>)> {
    let base: Vec<usize> = (0..xs.len() * ys.len()).map(|i| q.hom(xs[i % xs.len()], ys[i / xs.len()]).bottom()).collect();
    let mut out = Vec::new();
    for i in 0..base.len() {
        for &j in q.hom(xs[i % xs.len()], ys[i / xs.len()]).join_irreducibles() {
            let mut m = base.clone();
            m[i] = j;
            out.push((i / xs.len(), i % xs.len(), m));
        }
    }
    out
}

fn random_matrix(q: &FinQuantaloid, xs: &[usize], ys: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..xs.len() * ys.len())
        .map(|i| rng.gen_range(0..q.hom(xs[i % xs.len()], ys[i / xs.len()]).len()))
        .collect()
}

/// Checks the modular law for all matrix triples over typed sets of size
/// at most `cfg.size_bound`, shapes ordered by size then types.
///
/// When every hom of Q is distributive both sides reduce to triples of
/// single-entry join-irreducible matrices. Otherwise every triple is
/// visited, stopping at the first violation; a shape that would take the
/// total past `cfg.budget` is a resource-bound error. With a seed, each
/// shape is sampled `cfg.samples` times instead.
pub fn check_matr_modular(q: &FinQuantaloid, inv: &Involution, cfg: &MatrConfig) -> Result<CheckReport> {
    let sets = typed_sets(q.n_objects(), cfg.size_bound);
    let mut shapes: Vec<(&[usize], &[usize], &[usize])> = Vec::new();
    for x in &sets {
        for y in &sets {
            for z in &sets {
                shapes.push((x, y, z));
            }
        }
    }
    shapes.sort_by_key(|&(x, y, z)| (x.len(), y.len(), z.len(), x, y, z));
    let distributive = (0..q.n_objects()).all(|x| (0..q.n_objects()).all(|y| is_distributive(q.hom(x, y)).holds));
    let mode = match (cfg.seed, distributive) {
        (Some(_), _) => "randomized",
        (None, true) => "exhaustive-irreducible",
        (None, false) => "exhaustive",
    };

    let mut checked: u64 = 0;
    let mut found = None;
    for &(x, y, z) in &shapes {
        let shape = Shape { x, y, z };
        let hit = match cfg.seed {
            Some(seed) => {
                let key = (shapes.iter().position(|s| *s == (x, y, z)).expect("listed") as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ key);
                let triples: Vec<_> = (0..cfg.samples)
                    .map(|_| (random_matrix(q, x, y, &mut rng), random_matrix(q, y, z, &mut rng), random_matrix(q, x, z, &mut rng)))
                    .collect();
                checked += cfg.samples;
                triples
                    .into_par_iter()
                    .find_map_first(|(f, g, h)| shape.violation(q, inv, &f, &g, &h).map(|v| (f, g, h, v)))
            }
            None if distributive => {
                // g∘f is bottom unless g's column is f's row, and then the
                // left side is bottom unless h sits where g∘f does
                let (fs, gs, hs) = (irreducible_matrices(q, x, y), irreducible_matrices(q, y, z), irreducible_matrices(q, x, z));
                let aligned: u64 = fs
                    .iter()
                    .map(|f| {
                        gs.iter()
                            .filter(|g| g.1 == f.0)
                            .map(|g| hs.iter().filter(|h| h.0 == g.0 && h.1 == f.1).count() as u64)
                            .sum::<u64>()
                    })
                    .sum();
                checked += aligned;
                fs.par_iter().find_map_first(|f| {
                    gs.iter().filter(|g| g.1 == f.0).find_map(|g| {
                        hs.iter().filter(|h| h.0 == g.0 && h.1 == f.1).find_map(|h| {
                            shape.violation(q, inv, &f.2, &g.2, &h.2).map(|v| (f.2.clone(), g.2.clone(), h.2.clone(), v))
                        })
                    })
                })
            }
            None => {
                let (fm, gm, hm) = (Matrices::new(q, x, y), Matrices::new(q, y, z), Matrices::new(q, x, z));
                let total = fm.count.saturating_mul(gm.count).saturating_mul(hm.count);
                let needed = total.saturating_add(checked as u128);
                if needed > cfg.budget as u128 {
                    return Err(Error::bound("Matr(Q) triples for exhaustive modular check", needed, cfg.budget as u128));
                }
                checked += total as u64;
                let (nf, ng, nh) = (fm.count as u64, gm.count as u64, hm.count as u64);
                (0..nf).into_par_iter().find_map_first(|fi| {
                    let f = fm.decode(fi);
                    (0..ng).find_map(|gi| {
                        let g = gm.decode(gi);
                        (0..nh).find_map(|hi| {
                            let h = hm.decode(hi);
                            shape.violation(q, inv, &f, &g, &h).map(|v| (f.clone(), g.clone(), h, v))
                        })
                    })
                })
            }
        };
        if let Some(h) = hit {
            found = Some((x, y, z, h));
            break;
        }
    }

    let verdict = match found {
        None => Verdict::pass(),
        Some((x, y, z, (f, g, h, (lhs, rhs)))) => {
            let ts = |t: &[usize]| TypedSet { types: t.to_vec() };
            let mat = |s: &[usize], d: &[usize], e: Vec<usize>| {
                QMatrix {
                    src: ts(s),
                    dst: ts(d),
                    entries: e,
                }
                .to_value(q)
            };
            Verdict::fail(
                Witness::new(LAW)
                    .with("f", mat(x, y, f))
                    .with("g", mat(y, z, g))
                    .with("h", mat(x, z, h))
                    .with("lhs", mat(x, z, lhs))
                    .with("rhs", mat(x, z, rhs)),
            )
        }
    };
    let mut report = CheckReport::new("Matr(Q)");
    report.push(Check::new(format!("modular on typed sets of size ≤ {}", cfg.size_bound), verdict));
    report.attach("mode", mode.into());
    report.attach("size_bound", cfg.size_bound.into());
    report.attach("triples_checked", checked.into());
    if let Some(seed) = cfg.seed {
        report.attach("seed", seed.into());
        report.attach("samples_per_shape", cfg.samples.into());
    }
    Ok(report)
}
