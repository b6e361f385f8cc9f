//! Built-in example instances and seeded random categories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crible::{build_rc, CribleQuantaloid};
use crate::error::Result;
use crate::fincat::{CategoryData, FinCategory, GrothendieckTopology, MorphismData, Sieve, SiteData, CategorySource};
use crate::lattice::FinLattice;
use crate::quantaloid::{locale_quantale, split_idempotent_completion, FinQuantaloid, Involution};
use crate::Bounds;

fn morphism(id: &str, dom: &str, cod: &str) -> MorphismData {
    MorphismData {
        id: id.into(),
        dom: dom.into(),
        cod: cod.into(),
    }
}

fn identities(objects: &[&str]) -> BTreeMap<String, String> {
    objects.iter().map(|o| (o.to_string(), format!("1_{o}"))).collect()
}

/// The terminal category 1.
pub fn terminal_data() -> CategoryData {
    CategoryData {
        objects: vec!["*".into()],
        morphisms: vec![morphism("1_*", "*", "*")],
        identities: identities(&["*"]),
        composition: vec![],
    }
}

/// `f: X -> Z <- Y: g`.
pub fn cospan_data() -> CategoryData {
    CategoryData {
        objects: vec!["X".into(), "Y".into(), "Z".into()],
        morphisms: vec![
            morphism("1_X", "X", "X"),
            morphism("1_Y", "Y", "Y"),
            morphism("1_Z", "Z", "Z"),
            morphism("f", "X", "Z"),
            morphism("g", "Y", "Z"),
        ],
        identities: identities(&["X", "Y", "Z"]),
        composition: vec![],
    }
}

/// The group of order two: one object, `s∘s = e`.
pub fn g2_data() -> CategoryData {
    CategoryData {
        objects: vec!["*".into()],
        morphisms: vec![morphism("e", "*", "*"), morphism("s", "*", "*")],
        identities: [("*".to_string(), "e".to_string())].into(),
        composition: vec![("s".into(), "s".into(), "e".into())],
    }
}

pub fn terminal() -> FinCategory {
    FinCategory::from_data(&terminal_data()).expect("fixture")
}

pub fn cospan() -> FinCategory {
    FinCategory::from_data(&cospan_data()).expect("fixture")
}

pub fn g2() -> FinCategory {
    FinCategory::from_data(&g2_data()).expect("fixture")
}

/// On the cospan: `{f, g}` covers Z, otherwise only maximal sieves.
pub fn cospan_site_topology(c: &FinCategory) -> GrothendieckTopology {
    let z = c.object("Z").expect("cospan");
    let mut covers: Vec<Vec<Sieve>> = (0..c.n_objects()).map(|x| vec![Sieve::maximal(c, x)]).collect();
    covers[z].push(Sieve::from_ids(c, "Z", &["f", "g"]).expect("cospan"));
    GrothendieckTopology::new(c, covers).expect("fixture")
}

/// The three-element chain `0 < m < 1` as a one-object locale.
pub fn l3() -> FinQuantaloid {
    locale_quantale(&FinLattice::chain(["0", "m", "1"]).expect("chain"), "*").expect("fixture")
}

/// The two-element chain as a one-object locale.
pub fn chain2() -> FinQuantaloid {
    locale_quantale(&FinLattice::chain(["0", "1"]).expect("chain"), "*").expect("fixture")
}

/// Split-idempotent completion of [`l3`].
pub fn l3_si() -> FinQuantaloid {
    split_idempotent_completion(&l3()).expect("fixture")
}

/// The quantale on M3 = {0 < e, s, t < 1}: atoms multiply as the cyclic
/// group of order three with unit `e`, `1` absorbs nonzero elements and `0`
/// absorbs everything. Returned with the inverse involution (`s <-> t`).
pub fn m3_quantale() -> (FinQuantaloid, Involution) {
    let ids: Vec<String> = ["0", "1", "e", "s", "t"].iter().map(|s| s.to_string()).collect();
    let l = FinLattice::from_order(ids.clone(), |a, b| a == b || ids[a] == "0" || ids[b] == "1").expect("M3");
    let el = |s: &str| l.element(s).expect("M3");
    let atom = |a: usize| ["e", "s", "t"].iter().position(|s| *s == l.id(a));
    let q = FinQuantaloid::from_fn(vec!["*".into()], vec![l.clone()], vec![el("e")], |_, _, _, g, f| {
        Ok(match (atom(g), atom(f)) {
            _ if g == el("0") || f == el("0") => el("0"),
            (Some(i), Some(j)) => el(["e", "s", "t"][(i + j) % 3]),
            _ => el("1"),
        })
    })
    .expect("fixture");
    let inv = Involution::from_fn(&q, |_, _, a| match l.id(a) {
        "s" => el("t"),
        "t" => el("s"),
        _ => a,
    });
    (q, inv)
}

/// A concrete category: objects are sets of size 1 or 2, morphisms are
/// the functions generated by a few random ones under composition.
///
/// Object ids are `A`, `B`, ...; identities `1_A`, ...; the rest `m0`,
/// `m1`, ... in shuffled order. Generators that would push the
/// morphism count past `max_mor` are dropped.
pub fn random_category(seed: u64, max_obj: usize, max_mor: usize) -> FinCategory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_obj.max(1));
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
    let names: Vec<String> = (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    // a morphism is (dom, cod, function as a vector)
    type M = (usize, usize, Vec<usize>);
    let mut arrows: Vec<M> = (0..n).map(|x| (x, x, (0..sizes[x]).collect())).collect();
    let close = |arrows: &Vec<M>, extra: &M| -> Option<Vec<M>> {
        let mut all = arrows.clone();
        if all.contains(extra) {
            return Some(all);
        }
        all.push(extra.clone());
        let mut i = 0;
        while i < all.len() {
            for k in 0..all.len() {
                for (g, f) in [(i, k), (k, i)] {
                    let (gm, fm) = (&all[g], &all[f]);
                    if fm.1 == gm.0 {
                        let comp: M = (fm.0, gm.1, fm.2.iter().map(|&v| gm.2[v]).collect());
                        if !all.contains(&comp) {
                            all.push(comp);
                            if all.len() > max_mor {
                                return None;
                            }
                        }
                    }
                }
            }
            i += 1;
        }
        (all.len() <= max_mor).then_some(all)
    };
    let tries = rng.gen_range(1..=2 * max_mor.max(1));
    for _ in 0..tries {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let fun: Vec<usize> = (0..sizes[x]).map(|_| rng.gen_range(0..sizes[y])).collect();
        if let Some(next) = close(&arrows, &(x, y, fun)) {
            arrows = next;
        }
    }
    let mut extra: Vec<usize> = (n..arrows.len()).collect();
    extra.shuffle(&mut rng);
    let mut ids = vec![String::new(); arrows.len()];
    for x in 0..n {
        ids[x] = format!("1_{}", names[x]);
    }
    for (k, &a) in extra.iter().enumerate() {
        ids[a] = format!("m{k}");
    }
    let mut composition = Vec::new();
    for (g, gm) in arrows.iter().enumerate() {
        for (f, fm) in arrows.iter().enumerate() {
            if fm.1 == gm.0 && g >= n && f >= n {
                let comp: M = (fm.0, gm.1, fm.2.iter().map(|&v| gm.2[v]).collect());
                let gf = arrows.iter().position(|a| *a == comp).expect("closed");
                composition.push((ids[g].clone(), ids[f].clone(), ids[gf].clone()));
            }
        }
    }
    let data = CategoryData {
        objects: names.clone(),
        morphisms: arrows
            .iter()
            .enumerate()
            .map(|(i, a)| morphism(&ids[i], &names[a.0], &names[a.1]))
            .collect(),
        identities: (0..n).map(|x| (names[x].clone(), ids[x].clone())).collect(),
        composition,
    };
    FinCategory::from_data(&data).expect("concrete categories are categories")
}

/// Largest hom of R(C) accepted by [`random_rc`], to keep law suites fast.
const RANDOM_RC_HOM_CAP: usize = 64;

/// The first of `random_category(seed), random_category(seed + 1), ...`
/// whose R(C) has every hom within the smaller of `bounds` and a fixed cap.
pub fn random_rc(seed: u64, max_obj: usize, max_mor: usize, bounds: &Bounds) -> (FinCategory, CribleQuantaloid) {
    let small = Bounds {
        hom_elements: bounds.hom_elements.min(RANDOM_RC_HOM_CAP),
        ..bounds.clone()
    };
    (0u64..)
        .find_map(|k| {
            let c = random_category(seed.wrapping_add(k), max_obj, max_mor);
            build_rc(&c, &small).ok().map(|r| (c, r))
        })
        .expect("the terminal category always fits")
}

/// Writes the named built-in instances into `dir`, returning the paths.
pub fn write_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, text + "\n")?;
        out.push(p);
        Ok(())
    };
    fn json<T: serde::Serialize>(v: &T) -> String {
        serde_json::to_string_pretty(v).expect("fixture serialises")
    }
    for (name, data) in [("terminal", terminal_data()), ("C_cospan", cospan_data()), ("G2", g2_data())] {
        put(&format!("{name}.category.json"), json(&data))?;
    }
    let (m3, m3inv) = m3_quantale();
    let l3 = l3();
    let quantaloids = [
        ("L3", l3.to_data(Some(&Involution::identity_on_ids(&l3)?))),
        ("L3_si", l3_si().to_data(None)),
        ("chain2", chain2().to_data(None)),
        ("M3-meet", m3.to_data(Some(&m3inv))),
    ];
    for (name, data) in quantaloids {
        put(&format!("{name}.quantaloid.json"), json(&data))?;
    }
    let c = cospan();
    let site = SiteData {
        category: CategorySource::Path("C_cospan.category.json".into()),
        ..SiteData::new(&c, &cospan_site_topology(&c))
    };
    put("C_cospan.site.json", json(&site))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{load_site, validate_category, validate_topology};
    use crate::quantaloid::{validate_involution, validate_quantaloid, QuantaloidData};

    #[test]
    fn random_categories_are_valid_and_bounded() {
        for seed in 0..200 {
            let c = random_category(seed, 4, 10);
            assert!(c.n_objects() <= 4 && c.n_morphisms() <= 10);
            assert!(validate_category(&c.to_data()).unwrap().holds);
            assert_eq!(c, random_category(seed, 4, 10));
        }
        let distinct: std::collections::BTreeSet<usize> = (0..50).map(|s| random_category(s, 4, 10).n_morphisms()).collect();
        assert!(distinct.len() > 3);
    }

    #[test]
    fn written_fixtures_load() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_fixtures(dir.path()).unwrap();
        assert_eq!(paths.len(), 8);
        for p in &paths {
            let text = std::fs::read_to_string(p).unwrap();
            let name = p.file_name().unwrap().to_str().unwrap();
            if name.ends_with(".category.json") {
                assert!(validate_category(&serde_json::from_str(&text).unwrap()).unwrap().holds);
            } else if name.ends_with(".quantaloid.json") {
                let d: QuantaloidData = serde_json::from_str(&text).unwrap();
                let (q, inv) = FinQuantaloid::from_data(&d).unwrap();
                assert!(validate_quantaloid(&q).holds);
                if let Some(inv) = inv {
                    assert!(validate_involution(&q, &inv).unwrap().holds);
                }
            } else {
                let s: SiteData = serde_json::from_str(&text).unwrap();
                let (c, j) = load_site(&s, Some(dir.path())).unwrap();
                assert!(validate_topology(&c, &j).holds);
            }
        }
    }

    #[test]
    fn m3_is_non_distributive() {
        let (q, _) = m3_quantale();
        assert!(!crate::lattice::is_distributive(q.hom(0, 0)).holds);
        assert_eq!(q.hom(0, 0).len(), 5);
    }
}
