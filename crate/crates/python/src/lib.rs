//! Python module `pcir`: networks, inference, scoring, learning and
//! synthetic corpora.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

use pcir_core::corpus::Document;
use pcir_core::model::State;
use pcir_core::retrieve::{default_thresholds, ScoredDocument};
use pcir_core::{fixtures, Dataset, EvidenceSet, LearnParams, Manifest, RankedScores, VariableKind};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn evidence(
    hard: Option<HashMap<String, bool>>,
    likelihoods: Option<HashMap<String, (f64, f64)>>,
) -> PyResult<EvidenceSet> {
    let mut ev = EvidenceSet::new();
    for (name, present) in hard.unwrap_or_default() {
        let state = if present { State::Present } else { State::Absent };
        ev.observe(&name, state).map_err(err)?;
    }
    for (name, pair) in likelihoods.unwrap_or_default() {
        ev.add_likelihood(&name, pair).map_err(err)?;
    }
    Ok(ev)
}

/// A directed or undirected concept network.
#[pyclass(frozen, module = "pcir")]
struct Network {
    inner: pcir_core::Network,
}

#[pymethods]
impl Network {
    /// Parses a JSON network document; raises ValueError listing every problem.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        pcir_core::parse_network(text)
            .map(|inner| Network { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        Self::parse(&text)
    }

    /// Bundled reference networks: kill_shoot, terrorism_four_parents,
    /// terrorism_hand_built, terrorism_analog, recovery_benchmark.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let net = match name {
            "kill_shoot" => fixtures::kill_shoot(),
            "terrorism_four_parents" => fixtures::terrorism_four_parents(),
            "terrorism_hand_built" => fixtures::terrorism_hand_built(),
            "terrorism_analog" => fixtures::terrorism_analog(),
            "recovery_benchmark" => fixtures::recovery_benchmark(),
            _ => return Err(PyKeyError::new_err(name.to_string())),
        };
        Ok(Network { inner: net.into() })
    }

    fn to_json(&self) -> String {
        pcir_core::serialize_network(&self.inner)
    }

    /// Violations as strings; empty when valid.
    fn validate(&self) -> Vec<String> {
        pcir_core::validate(&self.inner).iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn is_directed(&self) -> bool {
        self.inner.is_directed()
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.variables().iter().map(|v| v.name.clone()).collect()
    }

    /// Edges (or arcs, parent first) as name pairs.
    #[getter]
    fn edges(&self) -> Vec<(String, String)> {
        match &self.inner {
            pcir_core::Network::Directed(d) => d.arcs.clone(),
            pcir_core::Network::Undirected(u) => u.edges.clone(),
        }
    }

    /// `(p_present, p_absent)` of `query`. `hard` maps names to observed
    /// presence, `likelihoods` to `(λ_present, λ_absent)` pairs.
    #[pyo3(signature = (query, hard=None, likelihoods=None))]
    fn posterior(
        &self,
        query: &str,
        hard: Option<HashMap<String, bool>>,
        likelihoods: Option<HashMap<String, (f64, f64)>>,
    ) -> PyResult<(f64, f64)> {
        let p = pcir_core::posterior(&self.inner, &evidence(hard, likelihoods)?, query).map_err(err)?;
        Ok((p.p_present, p.p_absent))
    }

    /// Brute-force reference for [`posterior`]; at most 20 variables.
    #[pyo3(signature = (query, hard=None, likelihoods=None))]
    fn enumerate_posterior(
        &self,
        query: &str,
        hard: Option<HashMap<String, bool>>,
        likelihoods: Option<HashMap<String, (f64, f64)>>,
    ) -> PyResult<(f64, f64)> {
        let p = pcir_core::enumerate_posterior(&self.inner, &evidence(hard, likelihoods)?, query).map_err(err)?;
        Ok((p.p_present, p.p_absent))
    }

    fn __repr__(&self) -> String {
        let kind = if self.inner.is_directed() { "directed" } else { "undirected" };
        format!("<Network {kind}, {} variables>", self.inner.variables().len())
    }
}

/// Keyword vocabulary: word -> (concept, p_present, p_absent).
#[pyclass(frozen, module = "pcir")]
struct Lexicon {
    inner: pcir_core::Lexicon,
}

#[pymethods]
impl Lexicon {
    #[new]
    fn new(entries: Vec<(String, String, f64, f64)>) -> PyResult<Self> {
        let links = entries
            .iter()
            .map(|(w, c, p, q)| pcir_core::ConceptEvidenceLink::new(w, c, *p, *q))
            .collect();
        pcir_core::Lexicon::new(links).map(|inner| Lexicon { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        pcir_core::Lexicon::from_json(text).map(|inner| Lexicon { inner }).map_err(err)
    }

    /// The 30-word lexicon of the terrorism analog network.
    #[staticmethod]
    fn terrorism_analog() -> Self {
        Lexicon {
            inner: fixtures::terrorism_analog_lexicon(),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn entries(&self) -> Vec<(String, String, f64, f64)> {
        self.inner
            .entries()
            .iter()
            .map(|e| (e.word.clone(), e.concept.clone(), e.p_present, e.p_absent))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn tokenize(text: &str) -> BTreeSet<String> {
    pcir_core::tokenize(text)
}

#[pyfunction]
fn extract_features(text: &str, lexicon: &Lexicon) -> BTreeMap<String, bool> {
    pcir_core::extract_features(&Document::new("", text), &lexicon.inner).bits
}

/// Ranks `(id, text)` documents by posterior of `concept`. Returns the
/// ranking as `(id, score)` pairs and the ids of documents whose evidence
/// had zero probability.
#[pyfunction]
#[pyo3(signature = (network, lexicon, documents, concept, scale=1.0))]
fn score(
    py: Python<'_>,
    network: &Network,
    lexicon: &Lexicon,
    documents: Vec<(String, String)>,
    concept: &str,
    scale: f64,
) -> PyResult<(Vec<(String, f64)>, Vec<String>)> {
    let docs: Vec<Document> = documents.into_iter().map(|(id, text)| Document::new(id, text)).collect();
    let scored = py
        .detach(|| {
            pcir_core::retrieve::score_corpus_scaled(&network.inner, &lexicon.inner, &docs, concept, scale)
        })
        .map_err(err)?;
    let ranked = scored
        .ranked
        .entries()
        .iter()
        .map(|e| (e.id.clone(), e.score))
        .collect();
    Ok((ranked, scored.flagged.into_iter().map(|f| f.id).collect()))
}

/// Precision/recall at each threshold (default: 101-point grid plus every
/// score) and per-class statistics, as a dict.
#[pyfunction]
#[pyo3(signature = (scores, relevant, thresholds=None))]
fn evaluate(
    py: Python<'_>,
    scores: Vec<(String, f64)>,
    relevant: BTreeSet<String>,
    thresholds: Option<Vec<f64>>,
) -> PyResult<Py<PyAny>> {
    let ranked = RankedScores::new(
        scores
            .into_iter()
            .map(|(id, score)| ScoredDocument { id, score })
            .collect(),
    )
    .map_err(err)?;
    let thresholds = thresholds.unwrap_or_else(|| default_thresholds(&ranked));
    let curve = pcir_core::evaluate(&ranked, &relevant, &thresholds).map_err(err)?;
    let json = serde_json::to_string(&curve).map_err(err)?;
    let loads = py.import("json")?.getattr("loads")?;
    Ok(loads.call1((json,))?.unbind())
}

/// Forward-samples `n` documents. Returns a dict with `columns`, `rows`,
/// `roles`, `labels` (id, relevant) and `documents` (id, text).
#[pyfunction]
#[pyo3(signature = (network, lexicon, n, seed, concept))]
fn sample(py: Python<'_>, network: &Network, lexicon: &Lexicon, n: usize, seed: u64, concept: &str) -> PyResult<Py<PyAny>> {
    let directed = network
        .inner
        .as_directed()
        .ok_or_else(|| PyValueError::new_err("sampling needs a directed network"))?;
    let corpus = pcir_core::sample_corpus(directed, &lexicon.inner, n, seed, concept).map_err(err)?;
    let data = &corpus.dataset;
    let rows: Vec<Vec<u8>> = (0..data.row_count()).map(|r| data.row(r)).collect();
    let out = pyo3::types::PyDict::new(py);
    out.set_item("columns", data.columns().to_vec())?;
    out.set_item("rows", rows)?;
    let roles: BTreeMap<String, &str> = corpus
        .manifest
        .roles
        .iter()
        .map(|(k, v)| (k.clone(), if *v == VariableKind::Concept { "concept" } else { "feature" }))
        .collect();
    out.set_item("roles", roles)?;
    out.set_item("assignments", corpus.manifest.assignments.clone())?;
    out.set_item("labels", corpus.labels.clone())?;
    let docs: Vec<(String, String)> = corpus.documents.into_iter().map(|d| (d.id, d.text)).collect();
    out.set_item("documents", docs)?;
    Ok(out.into_any().unbind())
}

/// Learns an undirected network and word links from binary `rows`.
/// `roles` maps column names to "concept" or "feature". Returns
/// `(network, lexicon, diagnostics)`.
#[pyfunction]
#[pyo3(signature = (columns, rows, roles, assignments=None, alpha=0.05, max_condition_size=3,
                    cv_folds=5, cv_agreement=3, min_expected_count=5.0, smoothing=1.0, rule="AND"))]
#[allow(clippy::too_many_arguments)]
fn learn(
    py: Python<'_>,
    columns: Vec<String>,
    rows: Vec<Vec<u8>>,
    roles: BTreeMap<String, String>,
    assignments: Option<BTreeMap<String, String>>,
    alpha: f64,
    max_condition_size: usize,
    cv_folds: usize,
    cv_agreement: usize,
    min_expected_count: f64,
    smoothing: f64,
    rule: &str,
) -> PyResult<(Network, Lexicon, Vec<String>)> {
    let data = Dataset::new(columns, rows).map_err(err)?;
    let roles = roles
        .into_iter()
        .map(|(name, role)| match role.as_str() {
            "concept" => Ok((name, VariableKind::Concept)),
            "feature" => Ok((name, VariableKind::Feature)),
            other => Err(PyValueError::new_err(format!("unknown role {other} for {name}"))),
        })
        .collect::<PyResult<_>>()?;
    let manifest = Manifest {
        roles,
        assignments: assignments.unwrap_or_default(),
    };
    let params = LearnParams {
        alpha,
        max_condition_size,
        cv_folds,
        cv_agreement,
        min_expected_count,
        smoothing,
        symmetry_rule: rule.parse().map_err(err)?,
    };
    let out = py
        .detach(|| pcir_core::learn_network(&data, &manifest, &params))
        .map_err(err)?;
    let diagnostics = out
        .diagnostics
        .iter()
        .map(|d| serde_json::to_string(d).expect("diagnostic serializes"))
        .collect();
    let lexicon = pcir_core::Lexicon::new(out.links).map_err(err)?;
    Ok((
        Network {
            inner: out.network.into(),
        },
        Lexicon { inner: lexicon },
        diagnostics,
    ))
}

#[pymodule]
fn pcir(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_class::<Lexicon>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    Ok(())
}
