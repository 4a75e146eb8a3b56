//! Exact posterior inference with hard and virtual (likelihood) evidence.
//!
//! [`posterior`] runs variable elimination with a greedy min-fill ordering.
//! Directed networks contribute one factor per CPT, undirected networks one
//! factor per clique potential; evidence enters as unary factors. Ties in the
//! ordering are broken by variable name, so results are deterministic.
//! [`enumerate_posterior`] is the brute-force reference used by the tests.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::FeatureVector;
use crate::error::{Error, Result};
use crate::model::{ConceptEvidenceLink, Network, State, VariableKind};

/// Largest network [`enumerate_posterior`] accepts.
pub const MAX_ENUMERATION_VARIABLES: usize = 20;

/// Hard observations and virtual likelihood pairs, keyed by variable name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvidenceSet {
    hard: BTreeMap<String, State>,
    virtual_pairs: BTreeMap<String, (f64, f64)>,
}

fn check_pair(variable: &str, pair: (f64, f64)) -> Result<()> {
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if ok(pair.0) && ok(pair.1) {
        Ok(())
    } else {
        Err(Error::InvalidLikelihood(pair.0, pair.1, variable.to_string()))
    }
}

impl EvidenceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty() && self.virtual_pairs.is_empty()
    }

    pub fn hard(&self) -> &BTreeMap<String, State> {
        &self.hard
    }

    /// Virtual pairs as `(λ_present, λ_absent)`.
    pub fn virtual_pairs(&self) -> &BTreeMap<String, (f64, f64)> {
        &self.virtual_pairs
    }

    pub fn observe(&mut self, variable: &str, state: State) -> Result<()> {
        if self.virtual_pairs.contains_key(variable) {
            return Err(Error::ConflictingEvidence(variable.to_string()));
        }
        if let Some(previous) = self.hard.insert(variable.to_string(), state) {
            if previous != state {
                return Err(Error::ConflictingEvidence(variable.to_string()));
            }
        }
        Ok(())
    }

    pub fn with_hard(mut self, variable: &str, state: State) -> Result<Self> {
        self.observe(variable, state)?;
        Ok(self)
    }

    /// Multiplies `(λ_present, λ_absent)` into the variable's virtual pair.
    pub fn add_likelihood(&mut self, variable: &str, pair: (f64, f64)) -> Result<()> {
        check_pair(variable, pair)?;
        if self.hard.contains_key(variable) {
            return Err(Error::ConflictingEvidence(variable.to_string()));
        }
        let slot = self
            .virtual_pairs
            .entry(variable.to_string())
            .or_insert((1.0, 1.0));
        slot.0 *= pair.0;
        slot.1 *= pair.1;
        check_pair(variable, *slot)
    }

    pub fn with_likelihood(mut self, variable: &str, pair: (f64, f64)) -> Result<Self> {
        self.add_likelihood(variable, pair)?;
        Ok(self)
    }

    /// Every virtual pair multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let mut out = self.clone();
        for (name, pair) in out.virtual_pairs.iter_mut() {
            pair.0 *= k;
            pair.1 *= k;
            check_pair(name, *pair)?;
        }
        Ok(out)
    }

    fn variables(&self) -> impl Iterator<Item = &String> {
        self.hard.keys().chain(self.virtual_pairs.keys())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub variable: String,
    pub p_present: f64,
    pub p_absent: f64,
}

impl Posterior {
    fn from_weights(variable: &str, absent: f64, present: f64) -> Result<Self> {
        let total = absent + present;
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroProbabilityEvidence);
        }
        let p_present = present / total;
        Ok(Posterior {
            variable: variable.to_string(),
            p_present,
            p_absent: 1.0 - p_present,
        })
    }
}

/// Evidence built from one document's feature bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Attachment {
    pub evidence: EvidenceSet,
    /// Feature words with no concept-evidence link.
    pub skipped_words: Vec<String>,
}

/// Converts observed word bits into virtual evidence on the linked concepts.
///
/// A present word linked with `(p, q)` contributes `(p, q)`, an absent one
/// `(1 - p, 1 - q)`; contributions on the same concept multiply.
pub fn attach_evidence(features: &FeatureVector, links: &[ConceptEvidenceLink]) -> Attachment {
    attach_evidence_scaled(features, links, 1.0)
}

/// [`attach_evidence`] with every word's contribution multiplied by `scale`.
/// Normalized posteriors do not depend on `scale`.
pub fn attach_evidence_scaled(
    features: &FeatureVector,
    links: &[ConceptEvidenceLink],
    scale: f64,
) -> Attachment {
    let by_word: HashMap<&str, &ConceptEvidenceLink> =
        links.iter().map(|l| (l.word.as_str(), l)).collect();
    let mut evidence = EvidenceSet::new();
    let mut skipped_words = Vec::new();
    for (word, &present) in &features.bits {
        match by_word.get(word.as_str()) {
            Some(link) => {
                let (lp, la) = link.likelihood(present);
                let slot = evidence
                    .virtual_pairs
                    .entry(link.concept.clone())
                    .or_insert((1.0, 1.0));
                slot.0 *= lp * scale;
                slot.1 *= la * scale;
            }
            None => skipped_words.push(word.clone()),
        }
    }
    Attachment {
        evidence,
        skipped_words,
    }
}

// ---------------------------------------------------------------------------
// Factor algebra over variable indices

#[derive(Clone, Debug)]
struct Factor {
    /// Strictly increasing variable indices.
    vars: Vec<usize>,
    /// Last variable fastest.
    values: Vec<f64>,
}

impl Factor {
    fn unit() -> Self {
        Factor {
            vars: Vec::new(),
            values: vec![1.0],
        }
    }

    fn unary(var: usize, absent: f64, present: f64) -> Self {
        Factor {
            vars: vec![var],
            values: vec![absent, present],
        }
    }

    /// Strides of `self.vars` laid out inside the scope `target`.
    fn strides_in(&self, target: &[usize]) -> Vec<usize> {
        target
            .iter()
            .map(|v| match self.vars.binary_search(v) {
                Ok(i) => 1usize << (self.vars.len() - 1 - i),
                Err(_) => 0,
            })
            .collect()
    }

    fn product(&self, other: &Factor) -> Factor {
        let vars: Vec<usize> = self
            .vars
            .iter()
            .chain(other.vars.iter())
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let a = self.strides_in(&vars);
        let b = other.strides_in(&vars);
        let len = vars.len();
        let mut values = Vec::with_capacity(1 << len);
        for index in 0..(1usize << len) {
            let (mut ia, mut ib) = (0, 0);
            for pos in 0..len {
                if (index >> (len - 1 - pos)) & 1 == 1 {
                    ia += a[pos];
                    ib += b[pos];
                }
            }
            values.push(self.values[ia] * other.values[ib]);
        }
        Factor { vars, values }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let len = self.vars.len();
        let step = 1usize << (len - 1 - pos);
        let mut vars = self.vars.clone();
        vars.remove(pos);
        let mut values = Vec::with_capacity(self.values.len() / 2);
        for index in 0..self.values.len() {
            if (index >> (len - 1 - pos)) & 1 == 0 {
                values.push(self.values[index] + self.values[index + step]);
            }
        }
        Factor { vars, values }
    }
}

struct Prepared {
    names: Vec<String>,
    factors: Vec<Factor>,
    query: usize,
}

fn prepare(net: &Network, evidence: &EvidenceSet, query: &str) -> Result<Prepared> {
    let mut names: Vec<String> = net.variables().iter().map(|v| v.name.clone()).collect();
    names.sort();
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let variable = net
        .variable(query)
        .ok_or_else(|| Error::UnknownVariable(query.to_string()))?;
    if variable.kind != VariableKind::Concept {
        return Err(Error::NotAConcept(query.to_string()));
    }
    let query = index[query];

    let mut factors = Vec::with_capacity(net.tables().len() + evidence.hard.len());
    for table in net.tables() {
        let mut order: Vec<(usize, usize)> = table
            .scope
            .iter()
            .enumerate()
            .map(|(pos, name)| {
                index
                    .get(name.as_str())
                    .map(|&i| (i, pos))
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))
            })
            .collect::<Result<_>>()?;
        order.sort();
        let sorted_names: Vec<String> = order.iter().map(|&(_, p)| table.scope[p].clone()).collect();
        let reordered = table.reordered(&sorted_names)?;
        factors.push(Factor {
            vars: order.into_iter().map(|(i, _)| i).collect(),
            values: reordered.values,
        });
    }

    for name in evidence.variables() {
        if !index.contains_key(name.as_str()) {
            return Err(Error::UnknownVariable(name.clone()));
        }
    }
    for (name, state) in &evidence.hard {
        let (absent, present) = match state {
            State::Absent => (1.0, 0.0),
            State::Present => (0.0, 1.0),
        };
        factors.push(Factor::unary(index[name.as_str()], absent, present));
    }
    for (name, &(lp, la)) in &evidence.virtual_pairs {
        // products built by attach_evidence may underflow to zero in one
        // component (or both, which makes the evidence impossible)
        if !(lp.is_finite() && la.is_finite() && lp >= 0.0 && la >= 0.0) {
            return Err(Error::InvalidLikelihood(lp, la, name.clone()));
        }
        if lp == 0.0 && la == 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        factors.push(Factor::unary(index[name.as_str()], la, lp));
    }
    Ok(Prepared {
        names,
        factors,
        query,
    })
}

/// Greedy min-fill elimination order over every variable but `keep`; ties
/// go to the smaller index (names are sorted, so this is lexicographic).
fn min_fill_order(n: usize, factors: &[Factor], keep: Option<usize>) -> Vec<usize> {
    let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut remaining: BTreeSet<usize> = BTreeSet::new();
    for f in factors {
        for &a in &f.vars {
            remaining.insert(a);
            for &b in &f.vars {
                if a != b {
                    adjacency[a].insert(b);
                }
            }
        }
    }
    if let Some(k) = keep {
        remaining.remove(&k);
    }
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for &v in &remaining {
            let neighbors: Vec<usize> = adjacency[v].iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in neighbors.iter().enumerate() {
                for &b in &neighbors[i + 1..] {
                    if !adjacency[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(f, _)| fill < f) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("remaining is nonempty");
        let neighbors: Vec<usize> = adjacency[v].iter().copied().collect();
        for &a in &neighbors {
            adjacency[a].remove(&v);
            for &b in &neighbors {
                if a != b {
                    adjacency[a].insert(b);
                }
            }
        }
        adjacency[v].clear();
        remaining.remove(&v);
        order.push(v);
    }
    order
}

/// Sums every variable except `keep` out of the product of `factors`.
fn eliminate(n: usize, mut factors: Vec<Factor>, keep: Option<usize>) -> Factor {
    for var in min_fill_order(n, &factors, keep) {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors
            .into_iter()
            .partition(|f| f.vars.binary_search(&var).is_ok());
        factors = rest;
        if touching.is_empty() {
            continue;
        }
        let merged = touching
            .iter()
            .skip(1)
            .fold(touching[0].clone(), |acc, f| acc.product(f));
        factors.push(merged.sum_out(var));
    }
    factors
        .iter()
        .fold(Factor::unit(), |acc, f| acc.product(f))
}

/// Splits factors into those connected to `query` and the rest.
fn split_component(n: usize, factors: Vec<Factor>, query: usize) -> (Vec<Factor>, Vec<Factor>) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for f in &factors {
        for pair in f.vars.windows(2) {
            let (a, b) = (find(&mut parent, pair[0]), find(&mut parent, pair[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let root = find(&mut parent, query);
    factors
        .into_iter()
        .partition(|f| f.vars.first().is_some_and(|&v| find(&mut parent, v) == root))
}

/// Exact normalized posterior of `query` given `evidence`.
///
/// Only the factors connected to the query are multiplied together; the
/// other components are summed separately and checked for zero mass. This
/// keeps the score of a document independent of evidence it cannot be
/// influenced by, down to the last bit.
pub fn posterior(net: &Network, evidence: &EvidenceSet, query: &str) -> Result<Posterior> {
    let Prepared {
        names,
        factors,
        query,
    } = prepare(net, evidence, query)?;
    let n = names.len();
    let (connected, detached) = split_component(n, factors, query);
    let mass = eliminate(n, detached, None).values[0];
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::ZeroProbabilityEvidence);
    }
    let result = eliminate(n, connected, Some(query));
    let (absent, present) = match result.vars.as_slice() {
        [] => (result.values[0], result.values[0]),
        _ => (result.values[0], result.values[1]),
    };
    Posterior::from_weights(&names[query], absent, present)
}

/// Brute-force posterior: sums the full joint over all `2^n` states.
pub fn enumerate_posterior(net: &Network, evidence: &EvidenceSet, query: &str) -> Result<Posterior> {
    let variables = net.variables();
    let n = variables.len();
    if n > MAX_ENUMERATION_VARIABLES {
        return Err(Error::TooManyVariables(n, MAX_ENUMERATION_VARIABLES));
    }
    let position: HashMap<&str, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let variable = net
        .variable(query)
        .ok_or_else(|| Error::UnknownVariable(query.to_string()))?;
    if variable.kind != VariableKind::Concept {
        return Err(Error::NotAConcept(query.to_string()));
    }
    let lookup = |name: &String| {
        position
            .get(name.as_str())
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.clone()))
    };
    let tables = net
        .tables()
        .iter()
        .map(|t| Ok((t.scope.iter().map(lookup).collect::<Result<Vec<_>>>()?, &t.values)))
        .collect::<Result<Vec<_>>>()?;
    let hard = evidence
        .hard()
        .iter()
        .map(|(name, s)| Ok((lookup(name)?, s.index())))
        .collect::<Result<Vec<_>>>()?;
    let soft = evidence
        .virtual_pairs()
        .iter()
        .map(|(name, &pair)| {
            if !(pair.0 >= 0.0 && pair.1 >= 0.0 && pair.0.is_finite() && pair.1.is_finite()) {
                return Err(Error::InvalidLikelihood(pair.0, pair.1, name.clone()));
            }
            Ok((lookup(name)?, pair))
        })
        .collect::<Result<Vec<_>>>()?;
    let q = position[query];

    let mut totals = [0.0f64; 2];
    let mut states = vec![0usize; n];
    'joint: for joint in 0..(1u64 << n) {
        for (i, s) in states.iter_mut().enumerate() {
            *s = ((joint >> i) & 1) as usize;
        }
        for &(v, s) in &hard {
            if states[v] != s {
                continue 'joint;
            }
        }
        let mut weight = 1.0;
        for (scope, values) in &tables {
            let mut index = 0;
            for &v in scope {
                index = index * 2 + states[v];
            }
            weight *= values[index];
        }
        for &(v, (lp, la)) in &soft {
            weight *= if states[v] == 1 { lp } else { la };
        }
        totals[states[q]] += weight;
    }
    Posterior::from_weights(query, totals[0], totals[1])
}
