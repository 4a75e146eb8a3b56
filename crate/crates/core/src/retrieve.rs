//! Corpus scoring, retrieval decisions and precision/recall evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{extract_features, Document, Lexicon};
use crate::error::{Error, Result};
use crate::infer::{attach_evidence_scaled, posterior};
use crate::model::{format_float, Network, VariableKind};

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredDocument {
    pub id: String,
    /// Posterior probability that the query concept is present.
    pub score: f64,
}

/// Scores sorted by descending score, ties by ascending id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankedScores {
    entries: Vec<ScoredDocument>,
}

impl RankedScores {
    pub fn new(mut entries: Vec<ScoredDocument>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for e in &entries {
            if !(0.0..=1.0).contains(&e.score) {
                return Err(Error::InvalidInput(format!("score {} of {} outside [0, 1]", e.score, e.id)));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate document id {}", e.id)));
            }
        }
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        Ok(RankedScores { entries })
    }

    pub fn entries(&self) -> &[ScoredDocument] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }
}

/// A document that could not be scored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlaggedDocument {
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredCorpus {
    pub ranked: RankedScores,
    /// Documents excluded from the ranking (e.g. zero-probability evidence).
    pub flagged: Vec<FlaggedDocument>,
    /// Total tokens-without-link count across documents.
    pub skipped_words: usize,
}

/// Posterior of `query` for every document: extract features, attach
/// evidence, infer. Runs in parallel over documents on the current rayon
/// pool; the result does not depend on the degree of parallelism.
pub fn score_corpus(net: &Network, lexicon: &Lexicon, docs: &[Document], query: &str) -> Result<ScoredCorpus> {
    score_corpus_scaled(net, lexicon, docs, query, 1.0)
}

/// [`score_corpus`] with every word likelihood multiplied by `scale`.
pub fn score_corpus_scaled(
    net: &Network,
    lexicon: &Lexicon,
    docs: &[Document],
    query: &str,
    scale: f64,
) -> Result<ScoredCorpus> {
    match net.variable(query) {
        None => return Err(Error::UnknownVariable(query.to_string())),
        Some(v) if v.kind != VariableKind::Concept => return Err(Error::NotAConcept(query.to_string())),
        Some(_) => {}
    }
    lexicon.check_against(net)?;
    let mut ids = BTreeSet::new();
    for d in docs {
        if !ids.insert(d.id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate document id {}", d.id)));
        }
    }
    let results: Vec<(String, Result<f64>, usize)> = docs
        .par_iter()
        .map(|doc| {
            let features = extract_features(doc, lexicon);
            let attached = attach_evidence_scaled(&features, lexicon.entries(), scale);
            let score = posterior(net, &attached.evidence, query).map(|p| p.p_present);
            (doc.id.clone(), score, attached.skipped_words.len())
        })
        .collect();
    let mut entries = Vec::with_capacity(results.len());
    let mut flagged = Vec::new();
    let mut skipped_words = 0;
    for (id, score, skipped) in results {
        skipped_words += skipped;
        match score {
            Ok(score) => entries.push(ScoredDocument { id, score }),
            Err(e @ Error::ZeroProbabilityEvidence) | Err(e @ Error::InvalidLikelihood(..)) => {
                flagged.push(FlaggedDocument { id, reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ScoredCorpus {
        ranked: RankedScores::new(entries)?,
        flagged,
        skipped_words,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecisionRule {
    /// Retrieve every document scoring at least τ.
    Threshold(f64),
    /// Retrieve the first n of the ranking.
    BestN(usize),
}

impl DecisionRule {
    pub fn threshold(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidInput(format!("threshold {tau} outside [0, 1]")));
        }
        Ok(DecisionRule::Threshold(tau))
    }
}

/// Retrieved ids, in rank order.
pub fn apply_decision(scores: &RankedScores, rule: DecisionRule) -> Vec<String> {
    let count = match rule {
        DecisionRule::Threshold(tau) => scores.entries.partition_point(|e| e.score >= tau),
        DecisionRule::BestN(n) => n.min(scores.len()),
    };
    scores.entries[..count].iter().map(|e| e.id.clone()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub retrieved: usize,
}

/// Mean and population standard deviation of one class's scores; `None`
/// for an empty class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassStats {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub count: usize,
}

impl ClassStats {
    fn of(scores: &[f64]) -> Self {
        if scores.is_empty() {
            return ClassStats { mean: None, std: None, count: 0 };
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        ClassStats {
            mean: Some(mean),
            std: Some(var.sqrt()),
            count: scores.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub relevant: ClassStats,
    pub irrelevant: ClassStats,
}

/// 101 evenly spaced thresholds in `[0, 1]` plus every distinct score.
pub fn default_thresholds(scores: &RankedScores) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    t.extend(scores.entries.iter().map(|e| e.score));
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Precision and recall at each threshold, plus per-class score statistics.
/// Precision of an empty retrieval and recall with no relevant documents
/// are both 1.
pub fn evaluate(scores: &RankedScores, relevant: &BTreeSet<String>, thresholds: &[f64]) -> Result<PrCurve> {
    let known: BTreeSet<&str> = scores.entries.iter().map(|e| e.id.as_str()).collect();
    if let Some(missing) = relevant.iter().find(|id| !known.contains(id.as_str())) {
        return Err(Error::InvalidInput(format!("relevant document {missing} has no score")));
    }
    // hits[k] = relevant documents among the first k ranked
    let mut hits = Vec::with_capacity(scores.len() + 1);
    hits.push(0usize);
    for e in &scores.entries {
        hits.push(hits.last().unwrap() + usize::from(relevant.contains(&e.id)));
    }
    let total_relevant = relevant.len();
    let points = thresholds
        .iter()
        .map(|&threshold| {
            let retrieved = scores.entries.partition_point(|e| e.score >= threshold);
            let hit = hits[retrieved];
            PrPoint {
                threshold,
                precision: if retrieved == 0 { 1.0 } else { hit as f64 / retrieved as f64 },
                recall: if total_relevant == 0 {
                    1.0
                } else {
                    hit as f64 / total_relevant as f64
                },
                retrieved,
            }
        })
        .collect();
    let (rel, irr): (Vec<&ScoredDocument>, Vec<&ScoredDocument>) =
        scores.entries.iter().partition(|e| relevant.contains(&e.id));
    let collect = |v: Vec<&ScoredDocument>| v.iter().map(|e| e.score).collect::<Vec<_>>();
    Ok(PrCurve {
        points,
        relevant: ClassStats::of(&collect(rel)),
        irrelevant: ClassStats::of(&collect(irr)),
    })
}

// ---------------------------------------------------------------------------
// Files

/// Scores CSV: `id,score,rank,error_flag`. Flagged documents follow the
/// ranking with empty score and rank.
pub fn write_scores_csv<W: Write>(scored: &ScoredCorpus, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["id", "score", "rank", "error_flag"])?;
    for (rank, e) in scored.ranked.entries.iter().enumerate() {
        wtr.write_record([e.id.as_str(), &format_float(e.score), &(rank + 1).to_string(), "0"])?;
    }
    let mut flagged: Vec<&FlaggedDocument> = scored.flagged.iter().collect();
    flagged.sort_by(|a, b| a.id.cmp(&b.id));
    for f in flagged {
        wtr.write_record([f.id.as_str(), "", "", "1"])?;
    }
    wtr.flush().map_err(|e| Error::io("<scores>", e))?;
    Ok(())
}

/// Reads a scores CSV; returns the ranking and the ids of flagged rows.
pub fn read_scores_csv<R: Read>(reader: R) -> Result<(RankedScores, Vec<String>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidInput(format!("scores file lacks column {name}")))
    };
    let (id_col, score_col, flag_col) = (col("id")?, col("score")?, col("error_flag")?);
    let mut entries = Vec::new();
    let mut flagged = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        if record.get(flag_col) == Some("1") {
            flagged.push(id);
            continue;
        }
        let raw = record.get(score_col).unwrap_or("");
        let score: f64 = raw
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad score {raw:?} for {id}")))?;
        entries.push(ScoredDocument { id, score });
    }
    Ok((RankedScores::new(entries)?, flagged))
}

/// Labels CSV: `id,relevant` with relevant in {0, 1}.
pub fn write_labels_csv<W: Write>(labels: &[(String, bool)], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["id", "relevant"])?;
    for (id, rel) in labels {
        wtr.write_record([id.as_str(), if *rel { "1" } else { "0" }])?;
    }
    wtr.flush().map_err(|e| Error::io("<labels>", e))?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(reader: R) -> Result<BTreeMap<String, bool>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut labels = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let id = record.get(0).unwrap_or("").to_string();
        let rel = match record.get(1) {
            Some("1") => true,
            Some("0") => false,
            other => {
                return Err(Error::InvalidInput(format!("bad relevance {other:?} for {id}")))
            }
        };
        if labels.insert(id.clone(), rel).is_some() {
            return Err(Error::InvalidInput(format!("duplicate label for {id}")));
        }
    }
    Ok(labels)
}

/// Curve CSV: `threshold,precision,recall`. Precision is 1 where nothing
/// is retrieved.
pub fn write_curve_csv<W: Write>(curve: &PrCurve, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["threshold", "precision", "recall"])?;
    for p in &curve.points {
        wtr.write_record([format_float(p.threshold), format_float(p.precision), format_float(p.recall)])?;
    }
    wtr.flush().map_err(|e| Error::io("<curve>", e))?;
    Ok(())
}

/// `{"relevant": {...}, "irrelevant": {...}, "precision_when_empty": 1.0}`.
pub fn stats_json(curve: &PrCurve) -> String {
    #[derive(Serialize)]
    struct Stats<'a> {
        relevant: &'a ClassStats,
        irrelevant: &'a ClassStats,
        /// Convention used in the curve where nothing is retrieved.
        precision_when_empty: f64,
    }
    let mut text = serde_json::to_string_pretty(&Stats {
        relevant: &curve.relevant,
        irrelevant: &curve.irrelevant,
        precision_when_empty: 1.0,
    })
    .expect("stats serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranked(pairs: &[(&str, f64)]) -> RankedScores {
        RankedScores::new(
            pairs
                .iter()
                .map(|&(id, score)| ScoredDocument { id: id.into(), score })
                .collect(),
        )
        .unwrap()
    }

    fn ids(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let r = ranked(&[("b", 0.5), ("a", 0.5), ("c", 0.9)]);
        assert_eq!(r.ids(), vec!["c", "a", "b"]);
        assert!(RankedScores::new(vec![ScoredDocument { id: "a".into(), score: 1.5 }]).is_err());
    }

    #[test]
    fn decisions() {
        let r = ranked(&[("a", 0.9), ("b", 0.5), ("c", 0.1)]);
        assert_eq!(apply_decision(&r, DecisionRule::Threshold(0.0)).len(), 3);
        assert!(apply_decision(&r, DecisionRule::Threshold(0.95)).is_empty());
        assert_eq!(apply_decision(&r, DecisionRule::Threshold(0.5)), vec!["a", "b"]);
        assert_eq!(apply_decision(&r, DecisionRule::BestN(2)), vec!["a", "b"]);
        assert_eq!(apply_decision(&r, DecisionRule::BestN(10)).len(), 3);
        assert!(DecisionRule::threshold(1.5).is_err());
    }

    #[test]
    fn precision_and_recall_arithmetic() {
        let r = ranked(&[("a", 0.9), ("b", 0.8), ("c", 0.7), ("d", 0.6), ("e", 0.1)]);
        let curve = evaluate(&r, &ids(&["a", "b", "e"]), &[0.6, 0.0, 0.95]).unwrap();
        assert_eq!(curve.points[0].precision, 0.5);
        assert!((curve.points[0].recall - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(curve.points[1].recall, 1.0);
        assert_eq!(curve.points[2].precision, 1.0);
        assert_eq!(curve.points[2].recall, 0.0);
    }

    #[test]
    fn class_statistics() {
        let r = ranked(&[("a", 0.9), ("b", 0.8), ("c", 0.1)]);
        let curve = evaluate(&r, &ids(&["a", "b"]), &[0.5]).unwrap();
        assert!((curve.relevant.mean.unwrap() - 0.85).abs() < 1e-15);
        assert!((curve.relevant.std.unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(curve.irrelevant.mean, Some(0.1));
        assert_eq!(curve.irrelevant.std, Some(0.0));
        assert!(evaluate(&r, &ids(&["zz"]), &[0.5]).is_err());
        let none = evaluate(&r, &ids(&[]), &[0.5]).unwrap();
        assert_eq!(none.points[0].recall, 1.0);
        assert_eq!(none.relevant.count, 0);
    }

    #[test]
    fn thresholds_include_scores() {
        let r = ranked(&[("a", 0.123), ("b", 0.5)]);
        let t = default_thresholds(&r);
        assert_eq!(t.len(), 102);
        assert!(t.contains(&0.123));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scores_csv_round_trip() {
        let scored = ScoredCorpus {
            ranked: ranked(&[("a", 0.25), ("b", 0.75)]),
            flagged: vec![FlaggedDocument { id: "z".into(), reason: "zero".into() }],
            skipped_words: 0,
        };
        let mut buf = Vec::new();
        write_scores_csv(&scored, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,score,rank,error_flag\nb,"), "{text}");
        assert!(text.ends_with("z,,,1\n"));
        let (back, flagged) = read_scores_csv(buf.as_slice()).unwrap();
        assert_eq!(back, scored.ranked);
        assert_eq!(flagged, vec!["z".to_string()]);
    }

    #[test]
    fn labels_csv_round_trip() {
        let labels = vec![("a".to_string(), true), ("b".to_string(), false)];
        let mut buf = Vec::new();
        write_labels_csv(&labels, &mut buf).unwrap();
        let back = read_labels_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back["a"] && !back["b"]);
    }
}
