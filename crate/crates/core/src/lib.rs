//! Concept-based document retrieval over sparse probabilistic networks.
//!
//! The crate covers the whole pipeline:
//!
//! * [`model`]: binary-variable networks (directed CPTs or undirected clique
//!   potentials), concept-evidence links and the JSON network format.
//! * [`infer`]: exact posteriors by variable elimination, with hard and
//!   virtual evidence.
//! * [`learn`]: χ²-driven Markov-boundary search, cross-validated skeletons,
//!   clique potentials and word likelihoods from tagged data.
//! * [`corpus`]: tokenization, keyword features and synthetic corpora.
//! * [`retrieve`]: ranking, decision rules and precision/recall evaluation.

pub mod corpus;
pub mod dataset;
pub mod error;
pub mod factor;
pub mod fixtures;
pub mod infer;
pub mod learn;
pub mod model;
pub mod retrieve;

pub use corpus::{extract_features, sample_corpus, tokenize, Document, FeatureVector, Lexicon, SyntheticCorpus};
pub use dataset::{Dataset, Manifest};
pub use error::{Error, Result};
pub use factor::FactorTable;
pub use infer::{attach_evidence, enumerate_posterior, posterior, EvidenceSet, Posterior};
pub use learn::{
    build_skeleton, chi2_independence, contingency_counts, fit_concept_evidence, fit_potentials,
    learn_network, markov_boundary, LearnParams, SymmetryRule,
};
pub use model::{
    parse_network, serialize_network, validate, ConceptEvidenceLink, DirectedNetwork, Network,
    State, UndirectedNetwork, Variable, VariableKind,
};
pub use retrieve::{apply_decision, evaluate, score_corpus, DecisionRule, PrCurve, RankedScores};
