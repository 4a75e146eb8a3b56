//! Network representation, validation and the JSON network format.
//!
//! Both directed networks (one CPT per variable) and undirected networks
//! (one potential per registered clique) share one file format,
//! distinguished by a `kind` tag:
//!
//! ```json
//! {
//!   "kind": "directed",
//!   "variables": [{"name": "kill", "kind": "concept"}, ...],
//!   "arcs": [["kill", "shoot"]],
//!   "tables": [{"scope": ["kill", "shoot"], "values": [...]}],
//!   "evidence_links": [{"word": "gunfire", "concept": "shoot",
//!                       "p_present": 0.4, "p_absent": 0.1}]
//! }
//! ```
//!
//! Undirected networks use `"edges"` instead of `"arcs"`. Table values are
//! listed with the last scope variable varying fastest. Networks are kept in
//! canonical order (variables, arcs, table scopes and links sorted by name),
//! which makes serialization deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::factor::FactorTable;

/// Smallest distance from 0 and 1 allowed for link probabilities.
pub const LINK_EPSILON: f64 = 1e-6;

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Binary state of every variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Absent = 0,
    Present = 1,
}

impl State {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            State::Absent
        } else {
            State::Present
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Concept,
    Feature,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub kind: VariableKind,
}

impl Variable {
    pub fn concept(name: &str) -> Self {
        Variable {
            name: name.to_string(),
            kind: VariableKind::Concept,
        }
    }

    pub fn feature(name: &str) -> Self {
        Variable {
            name: name.to_string(),
            kind: VariableKind::Feature,
        }
    }
}

/// Likelihood pair tying a keyword to the one concept it signals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptEvidenceLink {
    pub word: String,
    pub concept: String,
    /// p(word present | concept present)
    pub p_present: f64,
    /// p(word present | concept absent)
    pub p_absent: f64,
}

impl ConceptEvidenceLink {
    pub fn new(word: &str, concept: &str, p_present: f64, p_absent: f64) -> Self {
        ConceptEvidenceLink {
            word: word.to_string(),
            concept: concept.to_string(),
            p_present,
            p_absent,
        }
    }

    /// Likelihood pair `(λ_present, λ_absent)` contributed by observing the
    /// word as present or absent.
    pub fn likelihood(&self, word_present: bool) -> (f64, f64) {
        if word_present {
            (self.p_present, self.p_absent)
        } else {
            (1.0 - self.p_present, 1.0 - self.p_absent)
        }
    }

    fn clamped(mut self) -> Self {
        self.p_present = clamp_probability(self.p_present);
        self.p_absent = clamp_probability(self.p_absent);
        self
    }
}

pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(LINK_EPSILON, 1.0 - LINK_EPSILON)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectedNetwork {
    pub variables: Vec<Variable>,
    /// `(parent, child)` pairs.
    pub arcs: Vec<(String, String)>,
    pub cpts: Vec<FactorTable>,
    pub evidence_links: Vec<ConceptEvidenceLink>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UndirectedNetwork {
    pub variables: Vec<Variable>,
    /// Unordered pairs, stored with the smaller name first.
    pub edges: Vec<(String, String)>,
    pub potentials: Vec<FactorTable>,
    pub evidence_links: Vec<ConceptEvidenceLink>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    Directed(DirectedNetwork),
    Undirected(UndirectedNetwork),
}

impl From<DirectedNetwork> for Network {
    fn from(net: DirectedNetwork) -> Self {
        Network::Directed(net)
    }
}

impl From<UndirectedNetwork> for Network {
    fn from(net: UndirectedNetwork) -> Self {
        Network::Undirected(net)
    }
}

fn sort_links(links: &mut [ConceptEvidenceLink]) {
    links.sort_by(|a, b| a.word.cmp(&b.word).then_with(|| a.concept.cmp(&b.concept)));
}

fn canonical_tables(tables: &[FactorTable]) -> Vec<FactorTable> {
    let mut out: Vec<FactorTable> = tables
        .iter()
        .map(|t| t.canonical().unwrap_or_else(|_| t.clone()))
        .collect();
    out.sort_by(|a, b| a.scope.cmp(&b.scope));
    out
}

impl DirectedNetwork {
    /// Builds a network in canonical order. No validation is performed; see
    /// [`DirectedNetwork::validated`].
    pub fn new(
        variables: Vec<Variable>,
        arcs: Vec<(String, String)>,
        cpts: Vec<FactorTable>,
        evidence_links: Vec<ConceptEvidenceLink>,
    ) -> Self {
        let mut net = DirectedNetwork {
            variables,
            arcs,
            cpts,
            evidence_links,
        };
        net.canonicalize();
        net
    }

    /// Like [`DirectedNetwork::new`] but rejects invalid networks.
    pub fn validated(
        variables: Vec<Variable>,
        arcs: Vec<(String, String)>,
        cpts: Vec<FactorTable>,
        evidence_links: Vec<ConceptEvidenceLink>,
    ) -> Result<Self> {
        let net = Self::new(variables, arcs, cpts, evidence_links);
        let violations = validate_directed(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(violations))
        }
    }

    pub fn canonicalize(&mut self) {
        self.variables.sort();
        self.arcs.sort();
        self.cpts = canonical_tables(&self.cpts);
        sort_links(&mut self.evidence_links);
    }

    pub fn parents(&self, child: &str) -> Vec<&str> {
        self.arcs
            .iter()
            .filter(|(_, c)| c == child)
            .map(|(p, _)| p.as_str())
            .collect()
    }

    /// The CPT whose scope is exactly `{variable} ∪ parents(variable)`.
    pub fn cpt(&self, variable: &str) -> Option<&FactorTable> {
        let mut family: BTreeSet<&str> = self.parents(variable).into_iter().collect();
        family.insert(variable);
        self.cpts.iter().find(|t| {
            t.scope.len() == family.len() && t.scope.iter().all(|s| family.contains(s.as_str()))
        })
    }

    /// Variable names in a topological order (ties broken by name), or
    /// `None` when the arcs contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<String>> {
        topological_order(&self.variables, &self.arcs).ok()
    }

    /// Count of free parameters: one per CPT row.
    pub fn free_parameters(&self) -> usize {
        self.cpts.iter().map(|t| t.len() / 2).sum()
    }
}

impl UndirectedNetwork {
    pub fn new(
        variables: Vec<Variable>,
        edges: Vec<(String, String)>,
        potentials: Vec<FactorTable>,
        evidence_links: Vec<ConceptEvidenceLink>,
    ) -> Self {
        let mut net = UndirectedNetwork {
            variables,
            edges,
            potentials,
            evidence_links,
        };
        net.canonicalize();
        net
    }

    pub fn validated(
        variables: Vec<Variable>,
        edges: Vec<(String, String)>,
        potentials: Vec<FactorTable>,
        evidence_links: Vec<ConceptEvidenceLink>,
    ) -> Result<Self> {
        let net = Self::new(variables, edges, potentials, evidence_links);
        let violations = validate_undirected(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(violations))
        }
    }

    pub fn canonicalize(&mut self) {
        self.variables.sort();
        for edge in self.edges.iter_mut() {
            if edge.1 < edge.0 {
                std::mem::swap(&mut edge.0, &mut edge.1);
            }
        }
        self.edges.sort();
        self.potentials = canonical_tables(&self.potentials);
        sort_links(&mut self.evidence_links);
    }

    pub fn neighbors(&self, name: &str) -> BTreeSet<&str> {
        self.edges
            .iter()
            .filter_map(|(a, b)| {
                if a == name {
                    Some(b.as_str())
                } else if b == name {
                    Some(a.as_str())
                } else {
                    None
                }
            })
            .collect()
    }
}

impl Network {
    pub fn variables(&self) -> &[Variable] {
        match self {
            Network::Directed(n) => &n.variables,
            Network::Undirected(n) => &n.variables,
        }
    }

    /// CPTs of a directed network or potentials of an undirected one.
    pub fn tables(&self) -> &[FactorTable] {
        match self {
            Network::Directed(n) => &n.cpts,
            Network::Undirected(n) => &n.potentials,
        }
    }

    pub fn evidence_links(&self) -> &[ConceptEvidenceLink] {
        match self {
            Network::Directed(n) => &n.evidence_links,
            Network::Undirected(n) => &n.evidence_links,
        }
    }

    pub fn evidence_links_mut(&mut self) -> &mut Vec<ConceptEvidenceLink> {
        match self {
            Network::Directed(n) => &mut n.evidence_links,
            Network::Undirected(n) => &mut n.evidence_links,
        }
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables().iter().find(|v| v.name == name)
    }

    pub fn is_directed(&self) -> bool {
        matches!(self, Network::Directed(_))
    }

    pub fn as_directed(&self) -> Option<&DirectedNetwork> {
        match self {
            Network::Directed(n) => Some(n),
            Network::Undirected(_) => None,
        }
    }

    pub fn as_undirected(&self) -> Option<&UndirectedNetwork> {
        match self {
            Network::Undirected(n) => Some(n),
            Network::Directed(_) => None,
        }
    }

    pub fn canonicalize(&mut self) {
        match self {
            Network::Directed(n) => n.canonicalize(),
            Network::Undirected(n) => n.canonicalize(),
        }
    }
}

/// A single broken invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyName,
    DuplicateVariable(String),
    UnknownVariable { context: String, name: String },
    SelfLoop(String),
    DuplicateArc(String, String),
    Cycle(Vec<String>),
    MissingCpt(String),
    DuplicateCpt(String),
    UnmatchedTable(Vec<String>),
    TableShape(String),
    RowSum { variable: String, row: usize, sum: f64 },
    NotAClique(Vec<String>),
    UncoveredEdge(String, String),
    LinkProbability { word: String, value: f64 },
    DuplicateWord(String),
    LinkTarget { word: String, concept: String },
    EmptyWord,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyName => write!(f, "variable with empty name"),
            Violation::DuplicateVariable(n) => write!(f, "duplicate variable {n}"),
            Violation::UnknownVariable { context, name } => {
                write!(f, "unknown variable {name} (in {context})")
            }
            Violation::SelfLoop(n) => write!(f, "self loop on {n}"),
            Violation::DuplicateArc(a, b) => write!(f, "duplicate arc/edge {a}-{b}"),
            Violation::Cycle(vars) => write!(f, "cycle among {}", vars.join(", ")),
            Violation::MissingCpt(n) => write!(f, "missing CPT for {n}"),
            Violation::DuplicateCpt(n) => write!(f, "more than one CPT for {n}"),
            Violation::UnmatchedTable(scope) => write!(
                f,
                "table over [{}] matches no variable's family",
                scope.join(", ")
            ),
            Violation::TableShape(msg) => write!(f, "{msg}"),
            Violation::RowSum { variable, row, sum } => {
                write!(f, "row sum {sum} ≠ 1 in CPT of {variable} (row {row})")
            }
            Violation::NotAClique(scope) => {
                write!(f, "potential scope [{}] is not a clique", scope.join(", "))
            }
            Violation::UncoveredEdge(a, b) => write!(f, "edge {a}-{b} not covered by a potential"),
            Violation::LinkProbability { word, value } => {
                write!(f, "link probability {value} for word {word} outside (0, 1)")
            }
            Violation::DuplicateWord(w) => write!(f, "word {w} linked more than once"),
            Violation::LinkTarget { word, concept } => {
                write!(f, "word {word} linked to {concept}, which is not a concept variable")
            }
            Violation::EmptyWord => write!(f, "evidence link with empty word"),
        }
    }
}

fn check_variables(variables: &[Variable], out: &mut Vec<Violation>) -> BTreeMap<String, VariableKind> {
    let mut seen = BTreeMap::new();
    for v in variables {
        if v.name.is_empty() {
            out.push(Violation::EmptyName);
        } else if seen.insert(v.name.clone(), v.kind).is_some() {
            out.push(Violation::DuplicateVariable(v.name.clone()));
        }
    }
    seen
}

fn check_pairs(
    pairs: &[(String, String)],
    declared: &BTreeMap<String, VariableKind>,
    context: &str,
    unordered: bool,
    out: &mut Vec<Violation>,
) {
    let mut seen = BTreeSet::new();
    for (a, b) in pairs {
        for name in [a, b] {
            if !declared.contains_key(name) {
                out.push(Violation::UnknownVariable {
                    context: format!("{context} {a}-{b}"),
                    name: name.clone(),
                });
            }
        }
        if a == b {
            out.push(Violation::SelfLoop(a.clone()));
        }
        let key = if unordered && b < a { (b, a) } else { (a, b) };
        if !seen.insert(key) {
            out.push(Violation::DuplicateArc(a.clone(), b.clone()));
        }
    }
}

fn check_table_scopes(
    tables: &[FactorTable],
    declared: &BTreeMap<String, VariableKind>,
    out: &mut Vec<Violation>,
) {
    for t in tables {
        if let Some(problem) = t.shape_problem() {
            out.push(Violation::TableShape(problem));
        }
        for name in &t.scope {
            if !declared.contains_key(name) {
                out.push(Violation::UnknownVariable {
                    context: format!("table [{}]", t.scope.join(", ")),
                    name: name.clone(),
                });
            }
        }
    }
}

fn check_links(
    links: &[ConceptEvidenceLink],
    declared: &BTreeMap<String, VariableKind>,
    out: &mut Vec<Violation>,
) {
    let mut words = BTreeSet::new();
    for link in links {
        if link.word.is_empty() {
            out.push(Violation::EmptyWord);
        }
        if !words.insert(link.word.as_str()) {
            out.push(Violation::DuplicateWord(link.word.clone()));
        }
        match declared.get(&link.concept) {
            None => out.push(Violation::UnknownVariable {
                context: format!("evidence link {}", link.word),
                name: link.concept.clone(),
            }),
            Some(VariableKind::Feature) => out.push(Violation::LinkTarget {
                word: link.word.clone(),
                concept: link.concept.clone(),
            }),
            Some(VariableKind::Concept) => {}
        }
        for value in [link.p_present, link.p_absent] {
            if !(value > 0.0 && value < 1.0) {
                out.push(Violation::LinkProbability {
                    word: link.word.clone(),
                    value,
                });
            }
        }
    }
}

/// Kahn's algorithm; on failure returns the variables left on cycles.
fn topological_order(
    variables: &[Variable],
    arcs: &[(String, String)],
) -> std::result::Result<Vec<String>, Vec<String>> {
    let mut indegree: BTreeMap<&str, usize> =
        variables.iter().map(|v| (v.name.as_str(), 0)).collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (p, c) in arcs {
        if indegree.contains_key(p.as_str()) && indegree.contains_key(c.as_str()) {
            *indegree.get_mut(c.as_str()).unwrap() += 1;
            children.entry(p.as_str()).or_default().push(c.as_str());
        }
    }
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(next) = ready.pop_first() {
        order.push(next.to_string());
        for &child in children.get(next).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(child).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(child);
            }
        }
    }
    if order.len() == indegree.len() {
        Ok(order)
    } else {
        let placed: BTreeSet<&str> = order.iter().map(String::as_str).collect();
        Err(indegree
            .keys()
            .filter(|n| !placed.contains(*n))
            .map(|n| n.to_string())
            .collect())
    }
}

pub fn validate_directed(net: &DirectedNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    let declared = check_variables(&net.variables, &mut out);
    check_pairs(&net.arcs, &declared, "arc", false, &mut out);
    if let Err(cycle) = topological_order(&net.variables, &net.arcs) {
        out.push(Violation::Cycle(cycle));
    }
    check_table_scopes(&net.cpts, &declared, &mut out);

    let mut families: BTreeMap<BTreeSet<&str>, &str> = BTreeMap::new();
    for name in declared.keys() {
        let mut family: BTreeSet<&str> = net.parents(name).into_iter().collect();
        family.insert(name);
        families.insert(family, name);
    }
    let mut matched: BTreeMap<&str, usize> = BTreeMap::new();
    for table in &net.cpts {
        let scope: BTreeSet<&str> = table.scope.iter().map(String::as_str).collect();
        match families.get(&scope) {
            Some(&child) => {
                *matched.entry(child).or_default() += 1;
                if table.shape_problem().is_none() {
                    let sums = table.row_sums(child).unwrap_or_default();
                    for (row, sum) in sums.into_iter().enumerate() {
                        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                            out.push(Violation::RowSum {
                                variable: child.to_string(),
                                row,
                                sum,
                            });
                        }
                    }
                }
            }
            None => out.push(Violation::UnmatchedTable(table.scope.clone())),
        }
    }
    for name in declared.keys() {
        match matched.get(name.as_str()) {
            None => out.push(Violation::MissingCpt(name.clone())),
            Some(&n) if n > 1 => out.push(Violation::DuplicateCpt(name.clone())),
            _ => {}
        }
    }
    check_links(&net.evidence_links, &declared, &mut out);
    out
}

pub fn validate_undirected(net: &UndirectedNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    let declared = check_variables(&net.variables, &mut out);
    check_pairs(&net.edges, &declared, "edge", true, &mut out);
    check_table_scopes(&net.potentials, &declared, &mut out);

    let adjacent: BTreeSet<(&str, &str)> = net
        .edges
        .iter()
        .flat_map(|(a, b)| [(a.as_str(), b.as_str()), (b.as_str(), a.as_str())])
        .collect();
    for table in &net.potentials {
        let clique = table.scope.iter().enumerate().all(|(i, a)| {
            table.scope[i + 1..]
                .iter()
                .all(|b| adjacent.contains(&(a.as_str(), b.as_str())))
        });
        if !clique {
            out.push(Violation::NotAClique(table.scope.clone()));
        }
    }
    for (a, b) in &net.edges {
        let covered = net
            .potentials
            .iter()
            .any(|t| t.position(a).is_some() && t.position(b).is_some());
        if !covered {
            out.push(Violation::UncoveredEdge(a.clone(), b.clone()));
        }
    }
    check_links(&net.evidence_links, &declared, &mut out);
    out
}

/// Every violated invariant of `net`; empty iff the network is valid.
pub fn validate(net: &Network) -> Vec<Violation> {
    match net {
        Network::Directed(n) => validate_directed(n),
        Network::Undirected(n) => validate_undirected(n),
    }
}

/// Checks the link list on its own (words unique, probabilities in range).
/// Used for lexicon files that live outside a network.
pub fn validate_links(links: &[ConceptEvidenceLink], net: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let declared: BTreeMap<String, VariableKind> = net
        .variables()
        .iter()
        .map(|v| (v.name.clone(), v.kind))
        .collect();
    check_links(links, &declared, &mut out);
    out
}

// ---------------------------------------------------------------------------
// JSON format

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Directed,
    Undirected,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    kind: NetworkKind,
    variables: Vec<Variable>,
    #[serde(default)]
    arcs: Option<Vec<(String, String)>>,
    #[serde(default)]
    edges: Option<Vec<(String, String)>>,
    tables: Vec<RawTable>,
    #[serde(default)]
    evidence_links: Vec<ConceptEvidenceLink>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    scope: Vec<String>,
    values: Vec<f64>,
}

/// One problem found while reading a network document.
#[derive(Clone, Debug, PartialEq)]
pub enum ParseError {
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    Schema(String),
    Invalid(Violation),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                line,
                column,
                message,
            } => write!(f, "syntax error at line {line}, column {column}: {message}"),
            ParseError::Schema(msg) => write!(f, "{msg}"),
            ParseError::Invalid(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl std::error::Error for ParseErrors {}

fn clamp_links(links: Vec<ConceptEvidenceLink>) -> std::result::Result<Vec<ConceptEvidenceLink>, Vec<ParseError>> {
    let mut errors = Vec::new();
    for link in &links {
        for value in [link.p_present, link.p_absent] {
            if !(0.0..=1.0).contains(&value) {
                errors.push(ParseError::Invalid(Violation::LinkProbability {
                    word: link.word.clone(),
                    value,
                }));
            }
        }
    }
    if errors.is_empty() {
        Ok(links.into_iter().map(ConceptEvidenceLink::clamped).collect())
    } else {
        Err(errors)
    }
}

/// Reads a network document. Either the whole network is returned (and it
/// passes [`validate`]) or every problem found is reported.
pub fn parse_network(text: &str) -> std::result::Result<Network, ParseErrors> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| {
        ParseErrors(vec![if e.is_syntax() || e.is_eof() {
            ParseError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            ParseError::Schema(e.to_string())
        }])
    })?;

    let mut errors = Vec::new();
    let links = clamp_links(raw.evidence_links).unwrap_or_else(|e| {
        errors.extend(e);
        Vec::new()
    });
    let tables: Vec<FactorTable> = raw
        .tables
        .into_iter()
        .map(|t| FactorTable {
            scope: t.scope,
            values: t.values,
        })
        .collect();

    let net = match raw.kind {
        NetworkKind::Directed => {
            if raw.edges.is_some() {
                errors.push(ParseError::Schema(
                    "directed network must list \"arcs\", not \"edges\"".into(),
                ));
            }
            let arcs = raw.arcs.unwrap_or_else(|| {
                errors.push(ParseError::Schema("directed network is missing \"arcs\"".into()));
                Vec::new()
            });
            Network::Directed(DirectedNetwork::new(raw.variables, arcs, tables, links))
        }
        NetworkKind::Undirected => {
            if raw.arcs.is_some() {
                errors.push(ParseError::Schema(
                    "undirected network must list \"edges\", not \"arcs\"".into(),
                ));
            }
            let edges = raw.edges.unwrap_or_else(|| {
                errors.push(ParseError::Schema("undirected network is missing \"edges\"".into()));
                Vec::new()
            });
            Network::Undirected(UndirectedNetwork::new(raw.variables, edges, tables, links))
        }
    };
    errors.extend(validate(&net).into_iter().map(ParseError::Invalid));
    if errors.is_empty() {
        Ok(net)
    } else {
        Err(ParseErrors(errors))
    }
}

/// Formats a float with 17 significant digits.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn raw_float(value: f64) -> Box<RawValue> {
    RawValue::from_string(format_float(value)).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct OutVariable<'a> {
    name: &'a str,
    kind: VariableKind,
}

#[derive(Serialize)]
struct OutTable<'a> {
    scope: &'a [String],
    values: Vec<Box<RawValue>>,
}

#[derive(Serialize)]
pub(crate) struct OutLink<'a> {
    word: &'a str,
    concept: &'a str,
    p_present: Box<RawValue>,
    p_absent: Box<RawValue>,
}

impl<'a> OutLink<'a> {
    pub(crate) fn new(link: &'a ConceptEvidenceLink) -> Self {
        OutLink {
            word: &link.word,
            concept: &link.concept,
            p_present: raw_float(link.p_present),
            p_absent: raw_float(link.p_absent),
        }
    }
}

#[derive(Serialize)]
struct OutNetwork<'a> {
    kind: NetworkKind,
    variables: Vec<OutVariable<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arcs: Option<Vec<[String; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[String; 2]>>,
    tables: Vec<OutTable<'a>>,
    evidence_links: Vec<OutLink<'a>>,
}

/// Deterministic JSON document for `net` (canonical ordering, floats with
/// 17 significant digits).
pub fn serialize_network(net: &Network) -> String {
    let mut canonical = net.clone();
    canonical.canonicalize();
    let pairs = |v: &'_ [(String, String)]| -> Vec<[String; 2]> {
        v.iter().map(|(a, b)| [a.clone(), b.clone()]).collect()
    };
    let (kind, arcs, edges) = match &canonical {
        Network::Directed(n) => (NetworkKind::Directed, Some(pairs(&n.arcs)), None),
        Network::Undirected(n) => (NetworkKind::Undirected, None, Some(pairs(&n.edges))),
    };
    let doc = OutNetwork {
        kind,
        variables: canonical
            .variables()
            .iter()
            .map(|v| OutVariable {
                name: &v.name,
                kind: v.kind,
            })
            .collect(),
        arcs,
        edges,
        tables: canonical
            .tables()
            .iter()
            .map(|t| OutTable {
                scope: &t.scope,
                values: t.values.iter().map(|&v| raw_float(v)).collect(),
            })
            .collect(),
        evidence_links: canonical.evidence_links().iter().map(OutLink::new).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("network serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> DirectedNetwork {
        DirectedNetwork::new(
            vec![Variable::concept("kill"), Variable::concept("shoot")],
            vec![("kill".into(), "shoot".into())],
            vec![
                FactorTable::prior("kill", 0.5),
                FactorTable::conditional("shoot", &["kill"], &[[0.9, 0.1], [0.1, 0.9]]).unwrap(),
            ],
            vec![],
        )
    }

    #[test]
    fn minimal_network_serializes_one_table() {
        let net = Network::Directed(DirectedNetwork::new(
            vec![Variable::concept("a")],
            vec![],
            vec![FactorTable::prior("a", 0.5)],
            vec![],
        ));
        let text = serialize_network(&net);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["variables"].as_array().unwrap().len(), 1);
        assert_eq!(value["tables"].as_array().unwrap().len(), 1);
        assert_eq!(value["tables"][0]["values"].as_array().unwrap().len(), 2);
        assert_eq!(parse_network(&text).unwrap(), net);
    }

    #[test]
    fn table_one_round_trips() {
        let net = Network::Directed(two_node());
        let text = serialize_network(&net);
        assert_eq!(text, serialize_network(&net));
        let back = parse_network(&text).unwrap();
        let cpt = back.as_directed().unwrap().cpt("shoot").unwrap();
        assert_eq!(cpt.values, vec![0.9, 0.1, 0.1, 0.9]);
        assert_eq!(back, net);
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(format_float(0.9), "9.0000000000000002e-1");
        assert_eq!(format_float(0.9).parse::<f64>().unwrap(), 0.9);
    }

    #[test]
    fn unknown_arc_endpoint_is_reported() {
        let text = r#"{"kind":"directed","variables":[{"name":"A","kind":"concept"}],
            "arcs":[["A","B"]],"tables":[{"scope":["A"],"values":[0.5,0.5]}]}"#;
        let err = parse_network(text).unwrap_err();
        assert!(err.to_string().contains("unknown variable B"), "{err}");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_network("{\"kind\": \"directed\",\n  \"variables\": [}").unwrap_err();
        match &err.0[0] {
            ParseError::Syntax { line, .. } => assert_eq!(*line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_cpt_rows_are_reported() {
        let text = r#"{"kind":"directed","variables":[{"name":"A","kind":"concept"}],
            "arcs":[],"tables":[{"scope":["A"],"values":[1.0]}]}"#;
        let err = parse_network(text).unwrap_err();
        assert!(err.to_string().contains("expected 2"), "{err}");
    }

    #[test]
    fn link_probabilities_are_clamped() {
        let text = r#"{"kind":"directed","variables":[{"name":"a","kind":"concept"}],
            "arcs":[],"tables":[{"scope":["a"],"values":[0.5,0.5]}],
            "evidence_links":[{"word":"w","concept":"a","p_present":1.0,"p_absent":0.0}]}"#;
        let net = parse_network(text).unwrap();
        let link = &net.evidence_links()[0];
        assert_eq!(link.p_present, 1.0 - LINK_EPSILON);
        assert_eq!(link.p_absent, LINK_EPSILON);

        let bad = text.replace("1.0,\"p_absent\"", "1.5,\"p_absent\"");
        assert!(parse_network(&bad).is_err());
    }

    #[test]
    fn cycle_is_reported() {
        let net = DirectedNetwork::new(
            vec![Variable::concept("A"), Variable::concept("B")],
            vec![("A".into(), "B".into()), ("B".into(), "A".into())],
            vec![
                FactorTable::bernoulli("A", &["B"], &[0.5, 0.5]).unwrap(),
                FactorTable::bernoulli("B", &["A"], &[0.5, 0.5]).unwrap(),
            ],
            vec![],
        );
        let v = validate_directed(&net);
        assert!(v.iter().any(|v| matches!(v, Violation::Cycle(_))), "{v:?}");
        assert!(v.iter().any(|v| v.to_string().starts_with("cycle")));
    }

    #[test]
    fn row_sum_is_reported() {
        let net = DirectedNetwork::new(
            vec![Variable::concept("A")],
            vec![],
            vec![FactorTable::new(vec!["A".into()], vec![0.5, 0.4]).unwrap()],
            vec![],
        );
        let v = validate_directed(&net);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("row sum 0.9 ≠ 1"), "{}", v[0]);
    }

    #[test]
    fn undirected_clique_and_cover_checks() {
        let vars = vec![
            Variable::concept("a"),
            Variable::concept("b"),
            Variable::concept("c"),
        ];
        let good = UndirectedNetwork::new(
            vars.clone(),
            vec![("a".into(), "b".into()), ("b".into(), "c".into())],
            vec![
                FactorTable::uniform(vec!["a".into(), "b".into()], 1.0),
                FactorTable::uniform(vec!["b".into(), "c".into()], 1.0),
            ],
            vec![],
        );
        assert!(validate_undirected(&good).is_empty());

        let mut bad = good.clone();
        bad.potentials = vec![
            FactorTable::uniform(vec!["a".into(), "b".into(), "c".into()], 1.0),
        ];
        let v = validate_undirected(&bad);
        assert!(v.iter().any(|v| matches!(v, Violation::NotAClique(_))));

        let mut uncovered = good.clone();
        uncovered.potentials.pop();
        let v = validate_undirected(&uncovered);
        assert_eq!(v, vec![Violation::UncoveredEdge("b".into(), "c".into())]);
    }

    #[test]
    fn link_to_feature_variable_is_rejected() {
        let mut net = two_node();
        net.variables.push(Variable::feature("w"));
        net.cpts.push(FactorTable::prior("w", 0.5));
        net.evidence_links.push(ConceptEvidenceLink::new("gun", "w", 0.5, 0.2));
        let v = validate_directed(&net);
        assert!(v.iter().any(|v| matches!(v, Violation::LinkTarget { .. })));
    }
}
