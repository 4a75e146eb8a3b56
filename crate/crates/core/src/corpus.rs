//! Keyword extraction and synthetic corpus generation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Manifest};
use crate::error::{Error, Result};
use crate::model::{clamp_probability, ConceptEvidenceLink, DirectedNetwork, Network, OutLink, VariableKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// Keyword presence bits for one document, over exactly the lexicon's words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureVector {
    pub id: String,
    pub bits: BTreeMap<String, bool>,
}

/// The keyword vocabulary with each word's concept-evidence link.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: Vec<ConceptEvidenceLink>,
}

impl Lexicon {
    /// Sorts entries by word; rejects duplicate words and probabilities
    /// outside `(0, 1)`.
    pub fn new(mut entries: Vec<ConceptEvidenceLink>) -> Result<Self> {
        entries.sort_by(|a, b| a.word.cmp(&b.word));
        for pair in entries.windows(2) {
            if pair[0].word == pair[1].word {
                return Err(Error::InvalidLexicon(format!(
                    "word {} listed more than once",
                    pair[0].word
                )));
            }
        }
        for e in &entries {
            if e.word.is_empty() {
                return Err(Error::InvalidLexicon("empty word".into()));
            }
            for p in [e.p_present, e.p_absent] {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidLexicon(format!(
                        "probability {p} for word {} outside (0, 1)",
                        e.word
                    )));
                }
            }
        }
        Ok(Lexicon { entries })
    }

    pub fn entries(&self) -> &[ConceptEvidenceLink] {
        &self.entries
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.word.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every concept named by the lexicon is a concept variable of `net`.
    pub fn check_against(&self, net: &Network) -> Result<()> {
        for e in &self.entries {
            match net.variable(&e.concept) {
                Some(v) if v.kind == VariableKind::Concept => {}
                Some(_) => {
                    return Err(Error::InvalidLexicon(format!(
                        "word {} linked to {}, which is not a concept",
                        e.word, e.concept
                    )))
                }
                None => {
                    return Err(Error::InvalidLexicon(format!(
                        "word {} linked to unknown concept {}",
                        e.word, e.concept
                    )))
                }
            }
        }
        Ok(())
    }

    /// Reads a JSON array of links. Probabilities in `[0, 1]` are clamped
    /// into the open interval.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<ConceptEvidenceLink> = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(raw.len());
        for mut e in raw {
            for p in [e.p_present, e.p_absent] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidLexicon(format!(
                        "probability {p} for word {} outside [0, 1]",
                        e.word
                    )));
                }
            }
            e.p_present = clamp_probability(e.p_present);
            e.p_absent = clamp_probability(e.p_absent);
            entries.push(e);
        }
        Self::new(entries)
    }

    pub fn to_json(&self) -> String {
        let out: Vec<OutLink<'_>> = self.entries.iter().map(OutLink::new).collect();
        let mut text = serde_json::to_string_pretty(&out).expect("lexicon serializes");
        text.push('\n');
        text
    }
}

/// Lowercased maximal runs of ASCII letters and digits, as a set.
pub fn tokenize(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_ascii_lowercase())
        .collect()
}

pub fn extract_features(doc: &Document, lexicon: &Lexicon) -> FeatureVector {
    let tokens = tokenize(&doc.text);
    FeatureVector {
        id: doc.id.clone(),
        bits: lexicon
            .words()
            .map(|w| (w.to_string(), tokens.contains(w)))
            .collect(),
    }
}

/// Space-joined present words; the text form of a synthetic document.
pub fn render(bits: &BTreeMap<String, bool>) -> String {
    bits.iter()
        .filter(|(_, &b)| b)
        .map(|(w, _)| w.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Output of [`sample_corpus`].
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    /// Concept columns (network variables) followed by word columns.
    pub dataset: Dataset,
    pub manifest: Manifest,
    /// `(document id, relevant)`; relevance is the sampled query concept.
    pub labels: Vec<(String, bool)>,
    pub documents: Vec<Document>,
}

pub fn document_id(index: usize) -> String {
    format!("doc{index:06}")
}

/// Forward-samples `n` documents from `net` and the lexicon's word links.
pub fn sample_corpus(
    net: &DirectedNetwork,
    lexicon: &Lexicon,
    n: usize,
    seed: u64,
    query: &str,
) -> Result<SyntheticCorpus> {
    let order = net
        .topological_order()
        .ok_or_else(|| Error::InvalidInput("network arcs contain a cycle".into()))?;
    let position: HashMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    if !position.contains_key(query) {
        return Err(Error::UnknownVariable(query.to_string()));
    }
    for e in lexicon.entries() {
        if !position.contains_key(e.concept.as_str()) {
            return Err(Error::InvalidLexicon(format!(
                "concept {} of word {} is not in the network",
                e.concept, e.word
            )));
        }
        if position.contains_key(e.word.as_str()) {
            return Err(Error::InvalidLexicon(format!(
                "word {} has the same name as a network variable",
                e.word
            )));
        }
    }

    // Per variable in topological order: its CPT with scope positions
    // resolved to sampling order.
    struct Node<'a> {
        scope: Vec<usize>,
        values: &'a [f64],
        child_pos: usize,
    }
    let nodes = order
        .iter()
        .map(|name| {
            let cpt = net
                .cpt(name)
                .ok_or_else(|| Error::InvalidInput(format!("missing CPT for {name}")))?;
            Ok(Node {
                scope: cpt.scope.iter().map(|s| position[s.as_str()]).collect(),
                values: &cpt.values,
                child_pos: cpt.position(name).expect("family contains the child"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let words: Vec<(&ConceptEvidenceLink, usize)> = lexicon
        .entries()
        .iter()
        .map(|e| (e, position[e.concept.as_str()]))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<String> = order.clone();
    columns.sort();
    let column_of: Vec<usize> = order
        .iter()
        .map(|n| columns.binary_search(n).expect("present"))
        .collect();
    let concept_count = columns.len();
    columns.extend(lexicon.words().map(str::to_string));
    let query_pos = position[query];

    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut documents = Vec::with_capacity(n);
    let mut states = vec![0u8; order.len()];
    for doc in 0..n {
        for (i, node) in nodes.iter().enumerate() {
            let mut index = 0usize;
            for (pos, &var) in node.scope.iter().enumerate() {
                let bit = if pos == node.child_pos { 1 } else { states[var] };
                index = (index << 1) | bit as usize;
            }
            let p_present = node.values[index];
            states[i] = u8::from(rng.random::<f64>() < p_present);
        }
        let mut row = vec![0u8; columns.len()];
        for (i, &s) in states.iter().enumerate() {
            row[column_of[i]] = s;
        }
        let mut bits = BTreeMap::new();
        for (k, (link, concept)) in words.iter().enumerate() {
            let p = if states[*concept] == 1 {
                link.p_present
            } else {
                link.p_absent
            };
            let present = rng.random::<f64>() < p;
            row[concept_count + k] = u8::from(present);
            bits.insert(link.word.clone(), present);
        }
        let id = document_id(doc);
        labels.push((id.clone(), states[query_pos] == 1));
        documents.push(Document::new(id, render(&bits)));
        rows.push(row);
    }

    let mut roles = BTreeMap::new();
    for v in &net.variables {
        roles.insert(v.name.clone(), v.kind);
    }
    for w in lexicon.words() {
        roles.insert(w.to_string(), VariableKind::Feature);
    }
    Ok(SyntheticCorpus {
        dataset: Dataset::new(columns, rows)?,
        manifest: Manifest {
            roles,
            assignments: lexicon
                .entries()
                .iter()
                .map(|e| (e.word.clone(), e.concept.clone()))
                .collect(),
        },
        labels,
        documents,
    })
}

/// Reads a corpus from a directory of text files (file name = id) or from
/// a JSON-lines file of `{"id", "text"}` objects.
pub fn load_documents(path: &Path) -> Result<Vec<Document>> {
    if path.is_dir() {
        let mut docs = Vec::new();
        let entries = fs::read_dir(path).map_err(|e| Error::io(path, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(path, e))?;
            let file = entry.path();
            if !file.is_file() {
                continue;
            }
            let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
            docs.push(Document::new(
                entry.file_name().to_string_lossy().into_owned(),
                String::from_utf8_lossy(&bytes).into_owned(),
            ));
        }
        docs.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(docs)
    } else {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_jsonl(&text)
    }
}

pub fn parse_jsonl(text: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let doc: Document = serde_json::from_str(line)?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::InvalidInput(format!("duplicate document id {}", doc.id)));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn to_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d).expect("document serializes"));
        out.push('\n');
    }
    out
}
