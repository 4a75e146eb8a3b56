#![allow(dead_code)]

use pcir_core::fixtures::random_directed;
use pcir_core::model::State;
use pcir_core::{sample_corpus, Dataset, DirectedNetwork, EvidenceSet, FactorTable, Lexicon, Variable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random net of 1..=12 nodes with at most 3 parents and rows in [0.05, 0.95].
pub fn small_net(seed: u64) -> DirectedNetwork {
    let mut r = rng(seed);
    let n = r.random_range(1..=12);
    random_directed(&mut r, n, 3, 0.05, 0.95)
}

/// Hard and virtual evidence on a random subset of variables other than `query`.
pub fn random_evidence<R: Rng>(r: &mut R, net: &DirectedNetwork, query: &str) -> EvidenceSet {
    let mut names: Vec<&str> = net
        .variables
        .iter()
        .map(|v| v.name.as_str())
        .filter(|n| *n != query)
        .collect();
    names.shuffle(r);
    let k = r.random_range(0..=names.len());
    let mut ev = EvidenceSet::new();
    for name in &names[..k] {
        if r.random_bool(0.4) {
            let state = if r.random_bool(0.5) { State::Present } else { State::Absent };
            ev.observe(name, state).unwrap();
        } else {
            let pair = (r.random_range(0.01..1.0), r.random_range(0.01..1.0));
            ev.add_likelihood(name, pair).unwrap();
        }
    }
    ev
}

/// Builds a directed network from `(child, parents, p(child present | row))`.
pub fn net(spec: &[(&str, &[&str], &[f64])]) -> DirectedNetwork {
    pcir_core::fixtures::directed(spec, vec![])
}

/// Forward samples of every variable in `net`.
pub fn sample(net: &DirectedNetwork, n: usize, seed: u64) -> Dataset {
    let query = net.variables[0].name.clone();
    sample_corpus(net, &Lexicon::default(), n, seed, &query).unwrap().dataset
}

pub fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn isolated(name: &str, p: f64) -> DirectedNetwork {
    DirectedNetwork::validated(vec![Variable::concept(name)], vec![], vec![FactorTable::prior(name, p)], vec![])
        .unwrap()
}
