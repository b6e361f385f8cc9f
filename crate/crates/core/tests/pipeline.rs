use proptest::prelude::*;

use qcrib::characterisation::{derive_topology, derived_involution, roundtrip};
use qcrib::crible::build_rc;
use qcrib::fincat::enumerate_topologies;
use qcrib::fixtures;
use qcrib::nucleus::{closed_cribles, nucleus_to_topology, topology_to_nucleus, validate_nucleus};
use qcrib::quantaloid::{validate_involution, validate_quantaloid, FinQuantaloid, QuantaloidData};
use qcrib::Bounds;

#[test]
fn closed_cribles_survive_a_file_round_trip() {
    let c = fixtures::cospan();
    let j = fixtures::cospan_site_topology(&c);
    let closed = closed_cribles(build_rc(&c, &Bounds::default()).unwrap(), &j).unwrap();
    let text = serde_json::to_string(&closed.quantaloid().to_data(Some(&closed.involution))).unwrap();
    let data: QuantaloidData = serde_json::from_str(&text).unwrap();
    let (q, inv) = FinQuantaloid::from_data(&data).unwrap();
    assert_eq!(&q, closed.quantaloid());
    assert_eq!(inv.as_ref(), Some(&closed.involution));
    assert!(roundtrip(&q, &Bounds::default()).unwrap().certified());
}

#[test]
fn derived_site_reproduces_the_quantaloid() {
    // R(Map(Q), J_Q) built from the derived site has the hom sizes of Q
    let q = fixtures::l3_si();
    let d = derive_topology(&q).unwrap();
    let closed = closed_cribles(build_rc(&d.maps.category, &Bounds::default()).unwrap(), &d.topology).unwrap();
    let n = q.n_objects();
    for x in 0..n {
        for y in 0..n {
            assert_eq!(closed.quantaloid().hom(x, y).len(), q.hom(x, y).len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_sites_round_trip(seed in any::<u64>()) {
        let b = Bounds::default();
        let (c, rc) = fixtures::random_rc(seed, 3, 5, &b);
        let Ok(tops) = enumerate_topologies(&c, 1 << 10) else { return Ok(()) };
        for j in tops.iter().take(6) {
            let nucleus = topology_to_nucleus(&rc, j);
            prop_assert!(validate_nucleus(&rc.quantaloid, &nucleus, true).unwrap().holds);
            prop_assert_eq!(&nucleus_to_topology(&rc, &nucleus).unwrap(), j);
            let closed = closed_cribles(rc.clone(), j).unwrap();
            let q = closed.quantaloid();
            prop_assert!(validate_quantaloid(q).holds);
            prop_assert!(validate_involution(q, &closed.involution).unwrap().holds);
            prop_assert!(roundtrip(q, &b).unwrap().certified());
            prop_assert_eq!(derived_involution(q).unwrap(), closed.involution.clone());
        }
    }
}
