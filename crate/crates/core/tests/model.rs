mod common;

use std::fs;
use std::path::PathBuf;

use common::{names, rng, small_net};
use pcir_core::fixtures::random_directed;
use pcir_core::model::{DirectedNetwork, Network};
use pcir_core::{parse_network, serialize_network, validate, ConceptEvidenceLink, FactorTable, Variable};
use proptest::prelude::*;
use rand::Rng;

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    fs::read_to_string(path).unwrap()
}

fn with_links(seed: u64) -> Network {
    let mut net = small_net(seed);
    let mut r = rng(seed ^ 0xabcd);
    let count = r.random_range(0..6);
    for i in 0..count {
        let concept = net.variables[r.random_range(0..net.variables.len())].name.clone();
        net.evidence_links.push(ConceptEvidenceLink::new(
            &format!("w{i}"),
            &concept,
            r.random_range(1e-6..1.0 - 1e-6),
            r.random_range(1e-6..1.0 - 1e-6),
        ));
    }
    Network::Directed(net)
}

fn assert_close(a: &Network, b: &Network) {
    assert_eq!(a.variables(), b.variables());
    assert_eq!(a.tables().len(), b.tables().len());
    for (x, y) in a.tables().iter().zip(b.tables()) {
        assert_eq!(x.scope, y.scope);
        for (u, v) in x.values.iter().zip(&y.values) {
            assert!((u - v).abs() <= 1e-15);
        }
    }
    assert_eq!(a.evidence_links(), b.evidence_links());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parse_inverts_serialize(seed in any::<u64>()) {
        let net = with_links(seed);
        let text = serialize_network(&net);
        let back = parse_network(&text).unwrap();
        assert_close(&net, &back);
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(serialize_network(&back), text);
    }

    #[test]
    fn validate_flags_single_mutations(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let n = r.random_range(2..=10);
        let mut net = random_directed(&mut r, n, 3, 0.05, 0.95);
        prop_assert!(validate(&Network::Directed(net.clone())).is_empty());
        match kind {
            0 => {
                let t = r.random_range(0..net.cpts.len());
                let i = r.random_range(0..net.cpts[t].values.len());
                net.cpts[t].values[i] += 0.25;
            }
            1 => {
                let v = r.random_range(0..net.variables.len());
                net.variables[v].name.push_str("_renamed");
            }
            2 => {
                let v = net.variables[r.random_range(0..n)].name.clone();
                net.arcs.push((v, "ghost".into()));
            }
            _ => {
                // reverse an arc if there is one, else add a self loop
                match net.arcs.first().cloned() {
                    Some((a, b)) => net.arcs.push((b, a)),
                    None => {
                        let v = net.variables[0].name.clone();
                        net.arcs.push((v.clone(), v));
                    }
                }
            }
        }
        prop_assert!(!validate(&Network::Directed(net)).is_empty());
    }
}

fn joint_total(net: &DirectedNetwork) -> f64 {
    let n = net.variables.len();
    let index: std::collections::HashMap<&str, usize> =
        net.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let mut total = 0.0;
    for joint in 0..(1usize << n) {
        let mut p = 1.0;
        for t in &net.cpts {
            let states: Vec<u8> = t.scope.iter().map(|s| ((joint >> index[s.as_str()]) & 1) as u8).collect();
            p *= t.get(&states);
        }
        total += p;
    }
    total
}

#[test]
fn cpts_define_a_joint_distribution() {
    for seed in 0..30u64 {
        let mut r = rng(seed);
        let n = r.random_range(1..=15);
        let net = random_directed(&mut r, n, 3, 0.0, 1.0);
        assert!((joint_total(&net) - 1.0).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn single_node_document() {
    let net: Network = common::isolated("a", 0.5).into();
    let text = serialize_network(&net);
    let back = parse_network(&text).unwrap();
    assert_eq!(back.variables().len(), 1);
    assert_eq!(back.tables().len(), 1);
    assert_eq!(back.tables()[0].values, vec![0.5, 0.5]);
    assert_eq!(serialize_network(&back), text);
}

#[test]
fn table_one_values_survive_round_trip() {
    let text = fixture("kill_shoot.json");
    let net = parse_network(&text).unwrap();
    let cpt = net.as_directed().unwrap().cpt("shoot").unwrap();
    assert_eq!(cpt.scope, names(&["kill", "shoot"]));
    assert_eq!(cpt.values, vec![0.9, 0.1, 0.1, 0.9]);
    assert_eq!(serialize_network(&net), text);
}

#[test]
fn hand_built_fixture_file_validates() {
    let net = parse_network(&fixture("terrorism_hand_built.json")).unwrap();
    let d = net.as_directed().unwrap();
    assert_eq!(d.variables.len(), 24);
    assert_eq!(d.free_parameters(), 47);
    assert!(validate(&net).is_empty());
}

#[test]
fn undeclared_arc_endpoint_is_reported() {
    let text = r#"{"kind":"directed","variables":[{"name":"A","kind":"concept"}],
        "arcs":[["A","B"]],"tables":[{"scope":["A"],"values":[0.5,0.5]}],"evidence_links":[]}"#;
    let err = parse_network(text).unwrap_err().to_string();
    assert!(err.contains("unknown variable B"), "{err}");
}

#[test]
fn violations_are_named() {
    let cyclic = DirectedNetwork::new(
        vec![Variable::concept("A"), Variable::concept("B")],
        vec![("A".into(), "B".into()), ("B".into(), "A".into())],
        vec![
            FactorTable::bernoulli("A", &["B"], &[0.5, 0.5]).unwrap(),
            FactorTable::bernoulli("B", &["A"], &[0.5, 0.5]).unwrap(),
        ],
        vec![],
    );
    let v = validate(&Network::Directed(cyclic));
    assert!(v.iter().any(|v| v.to_string().contains("cycle")));

    let unnormalized = DirectedNetwork::new(
        vec![Variable::concept("A")],
        vec![],
        vec![FactorTable::new(names(&["A"]), vec![0.5, 0.4]).unwrap()],
        vec![],
    );
    let v = validate(&Network::Directed(unnormalized));
    assert_eq!(v.len(), 1);
    assert!(v[0].to_string().contains("row sum 0.9 ≠ 1"), "{}", v[0]);
}

#[test]
fn fixture_files_match_the_builders() {
    use pcir_core::fixtures;
    let cases: Vec<(&str, Network)> = vec![
        ("kill_shoot.json", fixtures::kill_shoot().into()),
        ("terrorism_four_parents.json", fixtures::terrorism_four_parents().into()),
        ("terrorism_hand_built.json", fixtures::terrorism_hand_built().into()),
        ("terrorism_analog.json", fixtures::terrorism_analog().into()),
        ("recovery_benchmark.json", fixtures::recovery_benchmark().into()),
    ];
    for (file, net) in cases {
        assert_eq!(fixture(file), serialize_network(&net), "{file} is stale");
    }
    assert_eq!(fixture("terrorism_analog.lexicon.json"), fixtures::terrorism_analog_lexicon().to_json());
}
