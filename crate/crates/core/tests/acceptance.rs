//! Acceptance suite. Prints one pass/fail line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qcrib::characterisation::{check_canonical, check_subcanonical, derive_topology, derived_involution, locale_covers, roundtrip};
use qcrib::crible::build_rc;
use qcrib::fincat::{enumerate_topologies, FinCategory, GrothendieckTopology, DEFAULT_TOPOLOGY_CANDIDATES};
use qcrib::fixtures;
use qcrib::matr::{check_matr_modular, MatrConfig};
use qcrib::nucleus::{build_rcj, nucleus_to_topology, topology_to_nucleus};
use qcrib::quantaloid::{maps_category, Arrow, FinQuantaloid, Involution, Property, PropertyContext};
use qcrib::report::{Check, CheckReport, Value, Verdict, Witness};
use qcrib::Bounds;

const SEED: u64 = 0xC0FFEE;
const RANDOM_CATEGORIES: u64 = 50;

fn check(name: impl Into<String>, ok: bool) -> Check {
    let name = name.into();
    let v = if ok { Verdict::pass() } else { Verdict::fail(Witness::new(name.clone())) };
    Check::new(name, v)
}

fn bounds() -> Bounds {
    Bounds::default()
}

fn sites() -> Vec<(&'static str, FinCategory)> {
    vec![("1", fixtures::terminal()), ("C_cospan", fixtures::cospan()), ("G2", fixtures::g2())]
}

/// Every (C, J) with C a fixture site category and J enumerated.
fn all_sites() -> Vec<(String, FinCategory, GrothendieckTopology)> {
    let mut out = Vec::new();
    for (name, c) in sites() {
        for (k, j) in enumerate_topologies(&c, DEFAULT_TOPOLOGY_CANDIDATES).unwrap().into_iter().enumerate() {
            out.push((format!("{name}/J{k}"), c.clone(), j));
        }
    }
    out
}

fn criterion_1() -> CheckReport {
    let mut r = CheckReport::new("R(C) law suite");
    let mut cats: Vec<(String, FinCategory)> = sites().into_iter().map(|(n, c)| (n.to_string(), c)).collect();
    for i in 0..RANDOM_CATEGORIES {
        cats.push((format!("random#{i}"), fixtures::random_category(SEED + i, 4, 10)));
    }
    let mut failures = 0;
    for (name, c) in &cats {
        let rc = match build_rc(c, &bounds()) {
            Ok(rc) => rc,
            Err(e) => {
                failures += 1;
                r.push(check(format!("{name}: build_rc ({e})"), false));
                continue;
            }
        };
        let ctx = PropertyContext::new(&rc.quantaloid).unwrap();
        for p in [Property::LocallyLocalic, Property::Modular, Property::MapDiscrete, Property::WeaklyTabular] {
            let v = ctx.check(p, Some(&rc.involution)).unwrap();
            if !v.verdict.holds {
                failures += 1;
                r.push(Check::new(format!("{name}: {p}"), v.verdict));
            }
        }
    }
    r.push(check(format!("{} categories, zero failures", cats.len()), failures == 0));
    r
}

fn criterion_2() -> CheckReport {
    let mut r = CheckReport::new("topology/nucleus bijection");
    for (name, c, j) in all_sites() {
        let rc = build_rc(&c, &bounds()).unwrap();
        let nucleus = topology_to_nucleus(&rc, &j);
        let back = nucleus_to_topology(&rc, &nucleus).unwrap();
        let again = topology_to_nucleus(&rc, &back);
        r.push(check(format!("{name}: J -> j -> J"), back == j));
        r.push(check(format!("{name}: j -> J -> j"), again == nucleus));
    }
    r
}

/// Rank of an object `(*,r)` of the completion of L3 in the chain 0 < m < 1.
fn l3_rank(id: &str) -> usize {
    ["(*,0)", "(*,m)", "(*,1)"].iter().position(|s| *s == id).expect("completion object")
}

fn criterion_3() -> CheckReport {
    let mut r = CheckReport::new("round trip on the completion of L3");
    let q = fixtures::l3_si();
    let rt = roundtrip(&q, &bounds()).unwrap();
    r.push(check("isomorphism certified", rt.certified()));
    let d = derive_topology(&q).unwrap();
    let c = &d.maps.category;
    // canonical topology of the locale: S covers e iff its domains join to e
    let canonical = locale_covers(c, |s| s.members.ones().map(|m| l3_rank(c.object_id(c.dom(m)))).max().unwrap_or(0) == l3_rank(c.object_id(s.at))).unwrap();
    r.push(check("derived topology is the canonical topology of L3", d.topology == canonical));
    r.push(Check::new("subcanonical", check_subcanonical(c, &d.topology, &bounds()).unwrap()));
    r.push(Check::new("canonical", check_canonical(c, &d.topology, &bounds()).unwrap()));
    r
}

fn criterion_4() -> CheckReport {
    let mut r = CheckReport::new("round trip on closed cribles");
    for (name, c, j) in all_sites() {
        let closed = build_rcj(&c, &j, &bounds()).unwrap();
        let q = closed.quantaloid();
        let rt = roundtrip(q, &bounds()).unwrap();
        r.push(check(format!("{name}: isomorphism certified"), rt.certified()));
        let same = derived_involution(q).map(|d| d == closed.involution).unwrap_or(false);
        r.push(check(format!("{name}: derived involution is the reversal"), same));
    }
    r
}

fn criterion_5() -> CheckReport {
    let mut r = CheckReport::new("negative control");
    let rt = roundtrip(&fixtures::l3(), &bounds()).unwrap();
    let last = rt.axioms.last().unwrap();
    let m = Value::Arrow {
        src: "*".into(),
        dst: "*".into(),
        id: "m".into(),
    };
    r.push(check("L3 is not certified", !rt.certified()));
    r.push(check(
        "L3 fails at weakly_tabular with q = m",
        last.property == Property::WeaklyTabular && last.verdict.witness.as_ref().and_then(|w| w.get("q")) == Some(&m),
    ));
    r.push(check("2-chain is certified", roundtrip(&fixtures::chain2(), &bounds()).unwrap().certified()));
    r
}

fn criterion_6() -> CheckReport {
    let mut r = CheckReport::new("closed cribles on the cospan with the minimal topology");
    let c = fixtures::cospan();
    let closed = build_rcj(&c, &GrothendieckTopology::minimal(&c), &bounds()).unwrap();
    let q = closed.quantaloid();
    let ctx = PropertyContext::new(q).unwrap();
    for p in Property::AXIOMS {
        r.push(Check::new(p.as_str(), ctx.check(p, None).unwrap().verdict));
    }
    let tab = ctx.check(Property::Tabular, Some(&closed.involution)).unwrap().verdict;
    r.push(check("tabular fails with a witness", !tab.holds && tab.witness.is_some()));
    if let Some(w) = tab.witness {
        r.attach("tabular_witness", serde_json::to_value(w).unwrap());
    }
    r
}

/// Every involutive fixture quantaloid, with a name.
fn involutive_fixtures() -> Vec<(String, FinQuantaloid, Involution)> {
    let mut out = Vec::new();
    for (name, c) in sites() {
        let rc = build_rc(&c, &bounds()).unwrap();
        out.push((format!("R({name})"), rc.quantaloid, rc.involution));
    }
    for (name, c, j) in all_sites() {
        let closed = build_rcj(&c, &j, &bounds()).unwrap();
        out.push((format!("R({name})"), closed.quantaloid().clone(), closed.involution.clone()));
    }
    for (name, q) in [("L3", fixtures::l3()), ("L3_si", fixtures::l3_si()), ("chain2", fixtures::chain2())] {
        let id = Involution::identity_on_ids(&q).unwrap();
        out.push((name.to_string(), q, id));
    }
    let (m3, inverse) = fixtures::m3_quantale();
    let id = Involution::identity_on_ids(&m3).unwrap();
    out.push(("M3-meet/inverse".into(), m3.clone(), inverse));
    out.push(("M3-meet/identity".into(), m3, id));
    out
}

fn criterion_7() -> CheckReport {
    let mut r = CheckReport::new("consequences of modularity and tabularity");
    let mut violations = Vec::new();
    let mut modular_count = 0;
    for (name, q, inv) in involutive_fixtures() {
        let ctx = PropertyContext::new(&q).unwrap();
        let holds = |p: Property| ctx.check(p, Some(&inv)).unwrap().verdict.holds;
        if holds(Property::MapTabular) && !holds(Property::WeaklyTabular) {
            violations.push(format!("{name}: map_tabular without weakly_tabular"));
        }
        if !holds(Property::Modular) {
            continue;
        }
        modular_count += 1;
        let maps = maps_category(&q).unwrap();
        for m in 0..maps.category.n_morphisms() {
            let (f, star) = (maps.arrow(m), maps.right(m));
            if star.elem != inv.apply(&q, f.src, f.dst, f.elem) {
                violations.push(format!("{name}: f* != f^o for {}", maps.category.morphism_id(m)));
            }
        }
        for p in [Property::MapDiscrete, Property::WeaklyModular] {
            if !holds(p) {
                violations.push(format!("{name}: {p}"));
            }
        }
        let n = q.n_objects();
        for x in 0..n {
            for y in 0..n {
                for a in 0..q.hom(x, y).len() {
                    let ao = inv.apply(&q, x, y, a);
                    let aao = q.compose(y, x, y, a, ao);
                    let aaoa = q.compose(x, y, y, aao, a);
                    if !q.hom(x, y).leq(a, aaoa) {
                        let arrow = q.arrow_value(Arrow { src: x, dst: y, elem: a });
                        violations.push(format!("{name}: q ≤ q∘q^o∘q fails at {arrow}"));
                    }
                }
            }
        }
        if holds(Property::Tabular) && !holds(Property::LocallyLocalic) {
            violations.push(format!("{name}: tabular without locally_localic"));
        }
    }
    for v in &violations {
        r.push(check(v.clone(), false));
    }
    r.push(check(format!("zero violations over {modular_count} modular fixtures"), violations.is_empty()));
    r
}

fn criterion_8() -> CheckReport {
    let mut r = CheckReport::new("modular matrices");
    let budget = bounds().matr_triples;
    let si = fixtures::l3_si();
    let inv = derived_involution(&si).unwrap();
    let pos = check_matr_modular(&si, &inv, &MatrConfig::exhaustive(2, budget)).unwrap();
    r.push(check("completion of L3, derived involution, size 2: modular", pos.overall));

    let (m3, _) = fixtures::m3_quantale();
    let id = Involution::identity_on_ids(&m3).unwrap();
    let neg = check_matr_modular(&m3, &id, &MatrConfig::exhaustive(3, budget)).unwrap();
    let again = check_matr_modular(&m3, &id, &MatrConfig::exhaustive(3, budget)).unwrap();
    let witness = neg.checks[0].witness.clone();
    r.push(check("M3-meet, identity involution, size 3: not modular", !neg.overall && witness.is_some()));
    r.push(check("witness is reproducible", neg.canonical_json() == again.canonical_json()));
    if let Some(w) = witness {
        r.attach("m3_witness", serde_json::to_value(w).unwrap());
    }

    for (name, q, inv) in involutive_fixtures() {
        let ctx = PropertyContext::new(&q).unwrap();
        let expect = ctx.check(Property::LocallyLocalic, None).unwrap().verdict.holds
            && ctx.check(Property::Modular, Some(&inv)).unwrap().verdict.holds;
        let got = check_matr_modular(&q, &inv, &MatrConfig::exhaustive(3, budget)).unwrap().overall;
        r.push(check(format!("{name}: verdict {got} matches locally_localic ∧ modular"), got == expect));
    }
    r
}

fn criterion_9() -> CheckReport {
    let mut r = CheckReport::new("derived topologies are subcanonical");
    let mut certified = vec![("L3_si".to_string(), fixtures::l3_si())];
    for (name, c, j) in all_sites() {
        certified.push((name, build_rcj(&c, &j, &bounds()).unwrap().quantaloid().clone()));
    }
    for (name, q) in certified {
        if !roundtrip(&q, &bounds()).unwrap().certified() {
            r.push(check(format!("{name}: not certified"), false));
            continue;
        }
        let d = derive_topology(&q).unwrap();
        let v = check_subcanonical(&d.maps.category, &d.topology, &bounds()).unwrap();
        r.push(Check::new(format!("{name}: subcanonical"), v));
    }
    r
}

type Criterion = (&'static str, fn() -> CheckReport, Option<Duration>);

const CRITERIA: [Criterion; 9] = [
    ("R(C) law suite on fixtures and 50 random categories", criterion_1, Some(Duration::from_secs(60))),
    ("topology/nucleus round trips are exact", criterion_2, None),
    ("round trip certified on the completion of L3", criterion_3, Some(Duration::from_secs(10))),
    ("round trip certified on every enumerated site", criterion_4, None),
    ("L3 fails at weakly_tabular, the 2-chain passes", criterion_5, None),
    ("closed cribles on the cospan satisfy the axioms but are not tabular", criterion_6, None),
    ("modularity consequences hold on every fixture", criterion_7, None),
    ("Matr(Q) modular iff Q locally localic and modular", criterion_8, None),
    ("derived topologies of certified quantaloids are subcanonical", criterion_9, None),
];

fn failures(r: &CheckReport) -> String {
    let bad: Vec<String> = r
        .checks
        .iter()
        .filter(|c| !c.verdict)
        .map(|c| match &c.witness {
            Some(w) => format!("{} [{w}]", c.name),
            None => c.name.clone(),
        })
        .collect();
    bad.join("; ")
}

fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("timing_ms");
            m.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// Runs the CLI over the written fixtures and returns its JSON reports
/// with timing removed.
fn cli_reports(dir: &std::path::Path) -> Vec<String> {
    let exe = env!("CARGO_BIN_EXE_qcrib");
    let runs: [&[&str]; 8] = [
        &["axioms", "--extended", "L3_si.quantaloid.json"],
        &["axioms", "L3.quantaloid.json"],
        &["roundtrip", "L3_si.quantaloid.json"],
        &["derive-topology", "L3_si.quantaloid.json"],
        &["build-rcj", "C_cospan.site.json"],
        &["subcanonical", "C_cospan.site.json"],
        &["matr-check", "--size", "2", "M3-meet.quantaloid.json"],
        &["matr-check", "--size", "2", "--samples", "64", "M3-meet.quantaloid.json"],
    ];
    runs.iter()
        .map(|args| {
            let out = std::process::Command::new(exe)
                .current_dir(dir)
                .args(["--format", "json", "--seed", &SEED.to_string()])
                .args(*args)
                .output()
                .expect("run qcrib");
            let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
            strip_timing(&mut v);
            format!("{:?} {v}", out.status.code())
        })
        .collect()
}

fn main() -> ExitCode {
    let mut all_ok = true;
    let mut first_run = Vec::new();
    for (i, (title, run, limit)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let report = run();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let ok = report.overall && in_time;
        all_ok &= ok;
        let mut line = format!("criterion {:>2}: {} {title} ({:.2} s)", i + 1, if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        if !report.overall {
            line.push_str(&format!(": {}", failures(&report)));
        }
        if !in_time {
            line.push_str(&format!(": over the {} s limit", limit.unwrap().as_secs()));
        }
        println!("{line}");
        first_run.push(report.canonical_json());
    }

    let start = Instant::now();
    let second_run: Vec<String> = CRITERIA.iter().map(|(_, run, _)| run().canonical_json()).collect();
    let dir = tempfile::tempdir().expect("temp dir");
    qcrib::fixtures::write_fixtures(dir.path()).expect("write fixtures");
    let cli_a = cli_reports(dir.path());
    let cli_b = cli_reports(dir.path());
    let ok = first_run == second_run && cli_a == cli_b && cli_a.iter().all(|s| !s.ends_with(" null"));
    all_ok &= ok;
    println!(
        "criterion 10: {} two runs with seed {SEED:#x} give identical JSON reports ({:.2} s)",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
