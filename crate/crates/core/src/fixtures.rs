//! Reference networks and lexicons.
//!
//! The terrorism networks follow the concept hierarchy used for newswire
//! retrieval (terrorism broken down into actor, violent act and subject).
//! Tables quoted from the published experiments are used verbatim where
//! they exist: `p(shoot | kill)`, `p(explosion | bombing)`,
//! `p(terrorist | terrorism)` and the four-parent `p(terrorism | ...)`
//! table. Everything else is synthetic fill.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::Lexicon;
use crate::factor::FactorTable;
use crate::model::{ConceptEvidenceLink, DirectedNetwork, Variable};

/// Fraction of terrorism documents in the original 730-document set (50/730).
pub const TERRORISM_PRIOR: f64 = 0.0685;

/// `p(shoot present | kill absent, kill present)`.
pub const SHOOT_GIVEN_KILL: [f64; 2] = [0.1, 0.9];

/// `p(explosion present | bombing absent, bombing present)`.
pub const EXPLOSION_GIVEN_BOMBING: [f64; 2] = [0.02, 0.41];

/// `p(terrorist present | terrorism absent, terrorism present)`.
pub const TERRORIST_GIVEN_TERRORISM: [f64; 2] = [0.02, 0.36];

/// `p(terrorism present | bombing, kidnap, killing, terrorist)`, parents in
/// that order with the last varying fastest.
pub const TERRORISM_GIVEN_FOUR: [f64; 16] = [
    0.006, // ¬b ¬k ¬kl ¬t
    0.15,  // ¬b ¬k ¬kl  t
    0.04,  // ¬b ¬k  kl ¬t
    0.2,   // ¬b ¬k  kl  t
    0.39,  // ¬b  k ¬kl ¬t
    0.95,  // ¬b  k ¬kl  t
    0.49,  // ¬b  k  kl ¬t
    0.93,  // ¬b  k  kl  t
    0.32,  //  b ¬k ¬kl ¬t
    0.76,  //  b ¬k ¬kl  t
    0.56,  //  b ¬k  kl ¬t
    0.47,  //  b ¬k  kl  t
    0.98,  //  b  k ¬kl ¬t
    0.997, //  b  k ¬kl  t
    0.97,  //  b  k  kl ¬t
    0.98,  //  b  k  kl  t
];

/// Builds a directed network from `(child, parents, p(child present | row))`.
pub fn directed(spec: &[(&str, &[&str], &[f64])], links: Vec<ConceptEvidenceLink>) -> DirectedNetwork {
    let variables = spec.iter().map(|(n, _, _)| Variable::concept(n)).collect();
    let arcs = spec
        .iter()
        .flat_map(|(child, parents, _)| parents.iter().map(move |p| (p.to_string(), child.to_string())))
        .collect();
    let cpts = spec
        .iter()
        .map(|(child, parents, rows)| {
            FactorTable::bernoulli(child, parents, rows).expect("fixture CPT shape")
        })
        .collect();
    DirectedNetwork::validated(variables, arcs, cpts, links).expect("fixture network is valid")
}

/// kill → shoot with a uniform prior on kill. Rows are stored exactly as
/// quoted (0.9/0.1, 0.1/0.9).
pub fn kill_shoot() -> DirectedNetwork {
    let [lo, hi] = SHOOT_GIVEN_KILL;
    DirectedNetwork::validated(
        vec![Variable::concept("kill"), Variable::concept("shoot")],
        vec![("kill".into(), "shoot".into())],
        vec![
            FactorTable::prior("kill", 0.5),
            FactorTable::conditional("shoot", &["kill"], &[[hi, lo], [lo, hi]]).expect("fixture CPT shape"),
        ],
        vec![],
    )
    .expect("fixture network is valid")
}

/// terrorism with parents bombing, kidnap, killing, terrorist (uniform priors).
pub fn terrorism_four_parents() -> DirectedNetwork {
    directed(
        &[
            ("bombing", &[], &[0.5]),
            ("kidnap", &[], &[0.5]),
            ("killing", &[], &[0.5]),
            ("terrorist", &[], &[0.5]),
            (
                "terrorism",
                &["bombing", "kidnap", "killing", "terrorist"],
                &TERRORISM_GIVEN_FOUR,
            ),
        ],
        vec![],
    )
}

fn links(spec: &[(&str, &[(&str, f64, f64)])]) -> Vec<ConceptEvidenceLink> {
    spec.iter()
        .flat_map(|(concept, words)| {
            words
                .iter()
                .map(move |&(w, p, q)| ConceptEvidenceLink::new(w, concept, p, q))
        })
        .collect()
}

/// Hand-built terrorism network: a 24-concept tree (47 free parameters)
/// with 61 keyword links.
pub fn terrorism_hand_built() -> DirectedNetwork {
    let spec: &[(&str, &[&str], &[f64])] = &[
        ("terrorism", &[], &[TERRORISM_PRIOR]),
        ("actor", &["terrorism"], &[0.2, 0.8]),
        ("violent_act", &["terrorism"], &[0.45, 0.85]),
        ("subject", &["terrorism"], &[0.3, 0.7]),
        ("terrorist", &["actor"], &[0.05, 0.5]),
        ("guerrilla", &["actor"], &[0.05, 0.35]),
        ("organization", &["actor"], &[0.1, 0.4]),
        ("bombing", &["violent_act"], &[0.01, 0.3]),
        ("killing", &["violent_act"], &[0.02, 0.4]),
        ("kidnapping", &["violent_act"], &[0.01, 0.15]),
        ("hijacking", &["violent_act"], &[0.005, 0.1]),
        ("assault", &["violent_act"], &[0.02, 0.3]),
        ("explosion", &["bombing"], &[0.05, 0.45]),
        ("device", &["bombing"], &[0.02, 0.5]),
        ("shooting", &["killing"], &SHOOT_GIVEN_KILL),
        ("death", &["killing"], &[0.05, 0.8]),
        ("hostage", &["kidnapping"], &[0.01, 0.7]),
        ("ransom", &["kidnapping"], &[0.005, 0.4]),
        ("aircraft", &["hijacking"], &[0.02, 0.6]),
        ("injury", &["assault"], &[0.03, 0.6]),
        ("politician", &["subject"], &[0.1, 0.4]),
        ("civilian", &["subject"], &[0.1, 0.5]),
        ("military", &["subject"], &[0.05, 0.3]),
        ("government", &["subject"], &[0.15, 0.5]),
    ];
    let words = links(&[
        ("terrorism", &[("terror", 0.3, 0.01), ("extremist", 0.15, 0.005)]),
        ("actor", &[("group", 0.4, 0.1)]),
        ("violent_act", &[("violence", 0.4, 0.05), ("violent", 0.3, 0.04), ("attack", 0.5, 0.05)]),
        ("subject", &[("target", 0.3, 0.05), ("victims", 0.3, 0.02)]),
        ("terrorist", &[("terrorists", 0.6, 0.01), ("terrorist", 0.5, 0.01)]),
        ("guerrilla", &[("guerrillas", 0.7, 0.01), ("rebels", 0.5, 0.02), ("insurgents", 0.3, 0.005)]),
        ("organization", &[("faction", 0.3, 0.01), ("front", 0.3, 0.05), ("army", 0.3, 0.05)]),
        ("bombing", &[("bomb", 0.7, 0.01), ("bombing", 0.5, 0.005)]),
        ("killing", &[("killed", 0.7, 0.02), ("murder", 0.3, 0.01), ("assassination", 0.2, 0.002)]),
        ("kidnapping", &[("kidnapped", 0.6, 0.002), ("abducted", 0.4, 0.002), ("kidnappers", 0.3, 0.001)]),
        ("hijacking", &[("hijacked", 0.7, 0.001), ("hijackers", 0.5, 0.001)]),
        ("assault", &[("assault", 0.4, 0.01), ("raid", 0.3, 0.01), ("ambush", 0.2, 0.002)]),
        ("explosion", &[("explosion", 0.4, 0.1), ("blast", 0.5, 0.01), ("exploded", 0.4, 0.005)]),
        ("device", &[("explosive", 0.5, 0.005), ("grenade", 0.3, 0.002), ("dynamite", 0.2, 0.001)]),
        ("shooting", &[("shot", 0.6, 0.02), ("gunmen", 0.4, 0.002), ("fired", 0.4, 0.03)]),
        ("death", &[("dead", 0.6, 0.03), ("died", 0.4, 0.03), ("bodies", 0.2, 0.002)]),
        ("hostage", &[("hostage", 0.6, 0.002), ("hostages", 0.6, 0.002)]),
        ("ransom", &[("ransom", 0.8, 0.001), ("demands", 0.4, 0.02)]),
        ("aircraft", &[("plane", 0.6, 0.01), ("airliner", 0.4, 0.002), ("flight", 0.4, 0.02)]),
        ("injury", &[("wounded", 0.6, 0.01), ("injured", 0.6, 0.02)]),
        ("politician", &[("minister", 0.5, 0.1), ("senator", 0.2, 0.02), ("president", 0.4, 0.1)]),
        ("civilian", &[("civilians", 0.5, 0.01), ("residents", 0.3, 0.03)]),
        ("military", &[("soldiers", 0.5, 0.01), ("troops", 0.4, 0.02), ("officers", 0.3, 0.03)]),
        ("government", &[("government", 0.7, 0.2), ("embassy", 0.2, 0.01), ("officials", 0.5, 0.1)]),
    ]);
    directed(spec, words)
}

/// Reduced-scale terrorism network (11 concepts) used for synthetic corpora.
/// Built around the quoted shoot/kill, explosion/bombing and
/// terrorist/terrorism tables.
pub fn terrorism_analog() -> DirectedNetwork {
    let spec: &[(&str, &[&str], &[f64])] = &[
        ("terrorism", &[], &[TERRORISM_PRIOR]),
        ("terrorist", &["terrorism"], &TERRORIST_GIVEN_TERRORISM),
        ("violent_act", &["terrorism"], &[0.15, 0.9]),
        ("kidnap", &["terrorism"], &[0.01, 0.25]),
        ("subject", &["terrorism"], &[0.2, 0.7]),
        ("bombing", &["violent_act"], &[0.02, 0.5]),
        ("killing", &["violent_act"], &[0.05, 0.5]),
        ("explosion", &["bombing"], &EXPLOSION_GIVEN_BOMBING),
        ("shooting", &["killing"], &SHOOT_GIVEN_KILL),
        ("politician", &["subject"], &[0.1, 0.5]),
        ("hostage", &["kidnap"], &[0.01, 0.6]),
    ];
    directed(spec, vec![])
}

/// 30-word lexicon for [`terrorism_analog`].
pub fn terrorism_analog_lexicon() -> Lexicon {
    Lexicon::new(links(&[
        ("terrorism", &[("terror", 0.45, 0.02), ("extremists", 0.35, 0.02), ("militants", 0.3, 0.03)]),
        ("terrorist", &[("guerrillas", 0.5, 0.02), ("rebels", 0.4, 0.03), ("faction", 0.3, 0.02)]),
        ("violent_act", &[("violence", 0.4, 0.05), ("attack", 0.5, 0.06), ("violent", 0.3, 0.04)]),
        ("kidnap", &[("kidnapped", 0.6, 0.01), ("abducted", 0.4, 0.01), ("seized", 0.3, 0.03)]),
        ("subject", &[("embassy", 0.3, 0.03), ("civilians", 0.4, 0.05)]),
        ("bombing", &[("bomb", 0.6, 0.02), ("bombs", 0.3, 0.01), ("bombed", 0.3, 0.01)]),
        ("killing", &[("killed", 0.6, 0.05), ("dead", 0.4, 0.05), ("murder", 0.3, 0.02)]),
        ("explosion", &[("blast", 0.5, 0.03), ("exploded", 0.4, 0.02), ("explosive", 0.3, 0.02)]),
        ("shooting", &[("gunmen", 0.4, 0.02), ("shot", 0.5, 0.05), ("fired", 0.4, 0.05)]),
        ("politician", &[("minister", 0.5, 0.1), ("president", 0.4, 0.1)]),
        ("hostage", &[("hostages", 0.6, 0.01), ("captives", 0.3, 0.005)]),
    ]))
    .expect("fixture lexicon is valid")
}

/// Ten-variable tree (nine arcs, degree ≤ 3) with strong CPT rows, the
/// ground truth for structure-recovery tests.
pub fn recovery_benchmark() -> DirectedNetwork {
    let strong = [0.1, 0.9];
    let medium = [0.2, 0.8];
    directed(
        &[
            ("v0", &[], &[0.5]),
            ("v1", &["v0"], &strong),
            ("v2", &["v0"], &medium),
            ("v3", &["v1"], &medium),
            ("v4", &["v1"], &strong),
            ("v5", &["v2"], &strong),
            ("v6", &["v2"], &medium),
            ("v7", &["v4"], &strong),
            ("v8", &["v5"], &medium),
            ("v9", &["v6"], &strong),
        ],
        vec![],
    )
}

/// Undirected edges of [`recovery_benchmark`], smaller name first.
pub fn recovery_benchmark_edges() -> Vec<(String, String)> {
    let mut edges: Vec<(String, String)> = recovery_benchmark()
        .arcs
        .iter()
        .map(|(a, b)| if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) })
        .collect();
    edges.sort();
    edges
}

/// Random valid directed network over `n` concepts named `x00`, `x01`, ...
/// Each node draws up to `max_parents` parents among nodes earlier in a
/// random order; CPT entries are uniform in `[lo, hi]`.
pub fn random_directed<R: Rng>(rng: &mut R, n: usize, max_parents: usize, lo: f64, hi: f64) -> DirectedNetwork {
    let mut names: Vec<String> = (0..n).map(|i| format!("x{i:02}")).collect();
    names.shuffle(rng);
    let mut variables = Vec::with_capacity(n);
    let mut arcs = Vec::new();
    let mut cpts = Vec::with_capacity(n);
    for i in 0..n {
        let mut earlier: Vec<usize> = (0..i).collect();
        earlier.shuffle(rng);
        let k = rng.random_range(0..=max_parents.min(i));
        let parents: Vec<&str> = earlier[..k].iter().map(|&j| names[j].as_str()).collect();
        let rows: Vec<f64> = (0..1usize << k).map(|_| rng.random_range(lo..=hi)).collect();
        for p in &parents {
            arcs.push((p.to_string(), names[i].clone()));
        }
        cpts.push(FactorTable::bernoulli(&names[i], &parents, &rows).expect("row count matches parents"));
        variables.push(Variable::concept(&names[i]));
    }
    DirectedNetwork::validated(variables, arcs, cpts, vec![]).expect("random network is valid")
}
