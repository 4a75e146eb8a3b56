//! `pcir`: learn concept networks, rank documents, evaluate rankings.
//!
//! Results go to files (or stdout for `infer` and `validate`); diagnostics
//! go to stderr, one JSON object per line. Exit status is 0 on success, 1 on
//! a domain error and 2 on a usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pcir_core::corpus::{load_documents, to_jsonl};
use pcir_core::dataset::{Dataset, Manifest};
use pcir_core::retrieve::{
    default_thresholds, read_labels_csv, read_scores_csv, stats_json, write_curve_csv,
    write_labels_csv, write_scores_csv,
};
use pcir_core::{
    attach_evidence, evaluate, extract_features, learn_network, parse_network, posterior,
    sample_corpus, score_corpus, serialize_network, validate, Document, Error, LearnParams,
    Lexicon, Network, SymmetryRule,
};

#[derive(Parser)]
#[command(name = "pcir", version, about = "Concept-network retrieval pipeline")]
struct Cli {
    /// Worker threads for document scoring and boundary search (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn an undirected concept network and word links from tagged data.
    Learn(LearnArgs),
    /// Posterior of one concept for a single document.
    Infer {
        net: PathBuf,
        lexicon: PathBuf,
        #[arg(long)]
        doc: PathBuf,
        #[arg(long)]
        concept: String,
    },
    /// Score and rank a corpus.
    Rank {
        net: PathBuf,
        lexicon: PathBuf,
        /// Directory of text files or a JSON-lines file.
        corpus: PathBuf,
        #[arg(long)]
        concept: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Precision/recall curve and class statistics for a ranking.
    Eval {
        scores: PathBuf,
        labels: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        stats: PathBuf,
    },
    /// Forward-sample a tagged synthetic corpus from a directed network.
    Synth {
        net: PathBuf,
        lexicon: PathBuf,
        #[arg(short = 'n', long = "count")]
        count: usize,
        /// Falls back to PCIR_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Concept whose sampled state is the relevance label (default: the
        /// network's only root).
        #[arg(long)]
        concept: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a network file.
    Validate { net: PathBuf },
}

#[derive(Args)]
struct LearnArgs {
    dataset: PathBuf,
    manifest: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Where to write the learned word links (default: <output stem>.lexicon.json).
    #[arg(long)]
    lexicon_out: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_condition_size: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    agreement: Option<usize>,
    #[arg(long)]
    min_expected: Option<f64>,
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long, value_parser = parse_rule)]
    rule: Option<SymmetryRule>,
}

fn parse_rule(s: &str) -> Result<SymmetryRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl LearnArgs {
    fn params(&self) -> LearnParams {
        let mut p = LearnParams::default();
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.max_condition_size {
            p.max_condition_size = v;
        }
        if let Some(v) = self.folds {
            p.cv_folds = v;
        }
        if let Some(v) = self.agreement {
            p.cv_agreement = v;
        }
        if let Some(v) = self.min_expected {
            p.min_expected_count = v;
        }
        if let Some(v) = self.smoothing {
            p.smoothing = v;
        }
        if let Some(v) = self.rule {
            p.symmetry_rule = v;
        }
        p
    }
}

/// Writes one diagnostic line to stderr.
fn emit(value: Value) {
    eprintln!("{value}");
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e).into())
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, contents).map_err(|e| Error::io(path, e).into())
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    parse_network(&read(path)?).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load_lexicon(path: &Path, net: &Network) -> Result<Lexicon, Failure> {
    let lex = Lexicon::from_json(&read(path)?)?;
    lex.check_against(net)?;
    Ok(lex)
}

fn learn(args: &LearnArgs) -> Outcome {
    let params = args.params();
    params.check().map_err(|e| Failure::Usage(e.to_string()))?;
    let data = Dataset::read_csv(read(&args.dataset)?.as_bytes())?;
    let manifest: Manifest = serde_json::from_str(&read(&args.manifest)?).map_err(Error::from)?;
    let out = learn_network(&data, &manifest, &params)?;
    for d in &out.diagnostics {
        let mut v = serde_json::to_value(d).expect("diagnostic serializes");
        v["command"] = json!("learn");
        emit(v);
    }
    let net = Network::Undirected(out.network);
    write(&args.output, serialize_network(&net))?;
    let lexicon_path = args.lexicon_out.clone().unwrap_or_else(|| {
        let stem = args.output.file_stem().unwrap_or_default().to_string_lossy();
        args.output.with_file_name(format!("{stem}.lexicon.json"))
    });
    write(&lexicon_path, Lexicon::new(out.links)?.to_json())?;
    println!(
        "{} edges among {} concepts",
        out.skeleton.edges.len(),
        out.skeleton.variables.len()
    );
    Ok(())
}

fn infer(net: &Path, lexicon: &Path, doc: &Path, concept: &str) -> Outcome {
    let net = load_network(net)?;
    let lex = load_lexicon(lexicon, &net)?;
    let id = doc.file_name().unwrap_or_default().to_string_lossy().into_owned();
    let document = Document::new(id, read(doc)?);
    let attached = attach_evidence(&extract_features(&document, &lex), lex.entries());
    let p = posterior(&net, &attached.evidence, concept)?;
    println!(
        "{}",
        json!({"document": document.id, "concept": p.variable, "p_present": p.p_present, "p_absent": p.p_absent})
    );
    Ok(())
}

fn rank(net: &Path, lexicon: &Path, corpus: &Path, concept: &str, output: &Path) -> Outcome {
    let net = load_network(net)?;
    let lex = load_lexicon(lexicon, &net)?;
    let docs = load_documents(corpus)?;
    let scored = score_corpus(&net, &lex, &docs, concept)?;
    for f in &scored.flagged {
        emit(json!({"command": "rank", "diagnostic": "flagged_document", "id": f.id, "reason": f.reason}));
    }
    if scored.skipped_words > 0 {
        emit(json!({"command": "rank", "diagnostic": "skipped_words", "count": scored.skipped_words}));
    }
    let mut buf = Vec::new();
    write_scores_csv(&scored, &mut buf)?;
    write(output, buf)
}

fn eval(scores: &Path, labels: &Path, output: &Path, stats: &Path) -> Outcome {
    let (ranked, flagged) = read_scores_csv(read(scores)?.as_bytes())?;
    let labels = read_labels_csv(read(labels)?.as_bytes())?;
    let scored: std::collections::BTreeSet<&str> = ranked.ids().into_iter().collect();
    for id in scored.iter().filter(|id| !labels.contains_key(**id)) {
        emit(json!({"command": "eval", "diagnostic": "unlabelled_document", "id": id}));
    }
    let relevant = labels
        .iter()
        .filter(|(id, &rel)| rel && !flagged.contains(id))
        .map(|(id, _)| id.clone())
        .collect();
    if !flagged.is_empty() {
        emit(json!({"command": "eval", "diagnostic": "excluded_flagged", "count": flagged.len()}));
    }
    let curve = evaluate(&ranked, &relevant, &default_thresholds(&ranked))?;
    let mut buf = Vec::new();
    write_curve_csv(&curve, &mut buf)?;
    write(output, buf)?;
    write(stats, stats_json(&curve))
}

fn synth(
    net: &Path,
    lexicon: &Path,
    count: usize,
    seed: Option<u64>,
    concept: Option<&str>,
    output: &Path,
) -> Outcome {
    let seed = match seed {
        Some(s) => s,
        None => match std::env::var("PCIR_SEED") {
            Ok(v) => v
                .parse()
                .map_err(|_| Failure::Usage(format!("PCIR_SEED={v:?} is not an unsigned integer")))?,
            Err(_) => 0,
        },
    };
    let net = load_network(net)?;
    let lex = load_lexicon(lexicon, &net)?;
    let directed = net
        .as_directed()
        .ok_or_else(|| Failure::Domain("synth needs a directed network".into()))?;
    let query = match concept {
        Some(c) => c.to_string(),
        None => {
            let roots: Vec<&str> = directed
                .variables
                .iter()
                .map(|v| v.name.as_str())
                .filter(|v| directed.parents(v).is_empty())
                .collect();
            match roots.as_slice() {
                [only] => only.to_string(),
                _ => return Err(Failure::Usage("network has several roots; pass --concept".into())),
            }
        }
    };
    let corpus = sample_corpus(directed, &lex, count, seed, &query)?;
    fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;
    let mut buf = Vec::new();
    corpus.dataset.write_csv(&mut buf)?;
    write(&output.join("dataset.csv"), buf)?;
    let mut manifest = serde_json::to_string_pretty(&corpus.manifest).map_err(Error::from)?;
    manifest.push('\n');
    write(&output.join("manifest.json"), manifest)?;
    let mut buf = Vec::new();
    write_labels_csv(&corpus.labels, &mut buf)?;
    write(&output.join("labels.csv"), buf)?;
    write(&output.join("corpus.jsonl"), to_jsonl(&corpus.documents))?;
    emit(json!({
        "command": "synth",
        "diagnostic": "summary",
        "documents": count,
        "seed": seed,
        "query": query,
        "relevant": corpus.labels.iter().filter(|(_, r)| *r).count(),
    }));
    Ok(())
}

fn validate_file(path: &Path) -> Outcome {
    let text = read(path)?;
    let problems: Vec<String> = match parse_network(&text) {
        Ok(net) => validate(&net).iter().map(ToString::to_string).collect(),
        Err(errors) => errors.0.iter().map(ToString::to_string).collect(),
    };
    for p in &problems {
        println!("{p}");
    }
    println!("{} violations", problems.len());
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Domain(format!("{} is not a valid network", path.display())))
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Learn(args) => learn(args),
        Command::Infer {
            net,
            lexicon,
            doc,
            concept,
        } => infer(net, lexicon, doc, concept),
        Command::Rank {
            net,
            lexicon,
            corpus,
            concept,
            output,
        } => rank(net, lexicon, corpus, concept, output),
        Command::Eval {
            scores,
            labels,
            output,
            stats,
        } => eval(scores, labels, output, stats),
        Command::Synth {
            net,
            lexicon,
            count,
            seed,
            concept,
            output,
        } => synth(net, lexicon, *count, *seed, concept.as_deref(), output),
        Command::Validate { net } => validate_file(net),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            emit(json!({"level": "error", "message": "--jobs must be at least 1"}));
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("thread pool is configured once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            emit(json!({"level": "error", "kind": "usage", "message": message}));
            ExitCode::from(2)
        }
        Err(Failure::Domain(message)) => {
            emit(json!({"level": "error", "message": message}));
            ExitCode::from(1)
        }
    }
}
