//! Structure and parameter learning from tagged binary data.
//!
//! The skeleton of an undirected concept network is found variable by
//! variable: a grow-shrink search driven by Pearson χ² conditional
//! independence tests finds each variable's Markov boundary, boundaries are
//! combined into edges (AND or OR rule), and edges are voted on across
//! cross-validation folds. Clique potentials are then fitted from smoothed
//! counts, and concept-evidence links from smoothed conditional word
//! frequencies.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dataset::{Dataset, Manifest};
use crate::error::{Error, Result};
use crate::factor::FactorTable;
use crate::model::{clamp_probability, ConceptEvidenceLink, UndirectedNetwork, Variable};

/// Largest clique [`fit_potentials`] will tabulate.
pub const MAX_CLIQUE_SIZE: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SymmetryRule {
    /// Edge iff each variable is in the other's boundary.
    And,
    /// Edge iff either is in the other's boundary.
    Or,
}

impl std::str::FromStr for SymmetryRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(SymmetryRule::And),
            "OR" => Ok(SymmetryRule::Or),
            _ => Err(Error::InvalidParams(format!("unknown symmetry rule {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnParams {
    /// Significance level of the χ² tests.
    pub alpha: f64,
    /// Largest conditioning set used in a test.
    pub max_condition_size: usize,
    pub cv_folds: usize,
    /// Folds that must contain an edge for it to be kept.
    pub cv_agreement: usize,
    /// Strata with an expected cell count below this are skipped.
    pub min_expected_count: f64,
    /// Laplace pseudo-count.
    pub smoothing: f64,
    pub symmetry_rule: SymmetryRule,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            alpha: 0.05,
            max_condition_size: 3,
            cv_folds: 5,
            cv_agreement: 3,
            min_expected_count: 5.0,
            smoothing: 1.0,
            symmetry_rule: SymmetryRule::And,
        }
    }
}

impl LearnParams {
    pub fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 folds, got {}", self.cv_folds)));
        }
        if self.cv_agreement > self.cv_folds {
            return Err(Error::InvalidParams(format!(
                "agreement {} exceeds fold count {}",
                self.cv_agreement, self.cv_folds
            )));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::InvalidParams(format!("smoothing {} is negative", self.smoothing)));
        }
        if !(self.min_expected_count >= 0.0) {
            return Err(Error::InvalidParams("min_expected_count is negative".into()));
        }
        Ok(())
    }
}

/// Counts of `(x, y)` within each joint state of the conditioning set.
/// Strata are indexed last-conditioning-variable-fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `strata[z][x][y]`
    pub strata: Vec<[[u64; 2]; 2]>,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.strata
            .iter()
            .flat_map(|s| s.iter().flatten())
            .sum()
    }
}

fn contingency_indices(data: &Dataset, x: usize, y: usize, z: &[usize]) -> ContingencyTable {
    let mut strata = vec![[[0u64; 2]; 2]; 1 << z.len()];
    let xs = data.column_at(x);
    let ys = data.column_at(y);
    let zs: Vec<&[u8]> = z.iter().map(|&c| data.column_at(c)).collect();
    for r in 0..data.row_count() {
        let s = zs.iter().fold(0usize, |acc, col| (acc << 1) | col[r] as usize);
        strata[s][xs[r] as usize][ys[r] as usize] += 1;
    }
    ContingencyTable { strata }
}

fn resolve(data: &Dataset, x: &str, y: &str, z: &[String]) -> Result<(usize, usize, Vec<usize>)> {
    let xi = data.column_index(x)?;
    let yi = data.column_index(y)?;
    let zi = z
        .iter()
        .map(|c| data.column_index(c))
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<usize> = zi.clone();
    all.push(xi);
    all.push(yi);
    let distinct: BTreeSet<usize> = all.iter().copied().collect();
    if distinct.len() != all.len() {
        return Err(Error::InvalidInput(format!(
            "test variables {x}, {y} | {{{}}} are not distinct",
            z.join(", ")
        )));
    }
    Ok((xi, yi, zi))
}

/// Joint counts of `x` and `y` stratified by `z`.
pub fn contingency_counts(data: &Dataset, x: &str, y: &str, z: &[String]) -> Result<ContingencyTable> {
    let (xi, yi, zi) = resolve(data, x, y, z)?;
    Ok(contingency_indices(data, xi, yi, &zi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Dependent,
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub verdict: Verdict,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
}

impl ChiSquareResult {
    pub fn dependent(&self) -> bool {
        self.verdict == Verdict::Dependent
    }
}

/// Upper `alpha` quantile of the χ² distribution with `df` degrees of freedom.
pub fn chi2_critical_value(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("df is positive")
        .inverse_cdf(1.0 - alpha)
}

/// Memoized critical values for one significance level.
struct CriticalValues {
    alpha: f64,
    by_df: Vec<f64>,
}

impl CriticalValues {
    fn new(alpha: f64) -> Self {
        CriticalValues {
            alpha,
            by_df: vec![f64::NAN],
        }
    }

    fn get(&mut self, df: usize) -> f64 {
        while self.by_df.len() <= df {
            let next = self.by_df.len();
            self.by_df.push(chi2_critical_value(next, self.alpha));
        }
        self.by_df[df]
    }
}

/// Pearson statistic and degrees of freedom summed over usable strata.
fn pearson(table: &ContingencyTable, min_expected: f64) -> (f64, usize) {
    let mut statistic = 0.0;
    let mut df = 0;
    for s in &table.strata {
        let n = (s[0][0] + s[0][1] + s[1][0] + s[1][1]) as f64;
        if n == 0.0 {
            continue;
        }
        let rows = [(s[0][0] + s[0][1]) as f64, (s[1][0] + s[1][1]) as f64];
        let cols = [(s[0][0] + s[1][0]) as f64, (s[0][1] + s[1][1]) as f64];
        let mut expected = [[0.0; 2]; 2];
        let mut usable = true;
        for i in 0..2 {
            for j in 0..2 {
                expected[i][j] = rows[i] * cols[j] / n;
                if !(expected[i][j] >= min_expected) || expected[i][j] == 0.0 {
                    usable = false;
                }
            }
        }
        if !usable {
            continue;
        }
        let term = |i: usize, j: usize| {
            let d = s[i][j] as f64 - expected[i][j];
            d * d / expected[i][j]
        };
        // grouped so that swapping x and y gives the same rounding
        statistic += (term(0, 0) + term(1, 1)) + (term(0, 1) + term(1, 0));
        df += 1;
    }
    (statistic, df)
}

fn chi2_indices(
    data: &Dataset,
    x: usize,
    y: usize,
    z: &[usize],
    params: &LearnParams,
    critical: &mut CriticalValues,
) -> ChiSquareResult {
    let table = contingency_indices(data, x, y, z);
    let (statistic, df) = pearson(&table, params.min_expected_count);
    let verdict = if df > 0 && statistic > critical.get(df) {
        Verdict::Dependent
    } else {
        Verdict::Independent
    };
    ChiSquareResult {
        verdict,
        statistic,
        degrees_of_freedom: df,
    }
}

/// Pearson χ² test of `x ⫫ y | z`.
pub fn chi2_independence(
    data: &Dataset,
    x: &str,
    y: &str,
    z: &[String],
    params: &LearnParams,
) -> Result<ChiSquareResult> {
    params.check()?;
    let (xi, yi, zi) = resolve(data, x, y, z)?;
    let mut critical = CriticalValues::new(params.alpha);
    Ok(chi2_indices(data, xi, yi, &zi, params, &mut critical))
}

/// The most recently added `cap` members.
fn recent(members: &[usize], cap: usize) -> &[usize] {
    &members[members.len().saturating_sub(cap)..]
}

/// Grow-shrink boundary of column `x` among `candidates` (which must be
/// sorted by column name). Members are returned in the order they were added.
fn boundary_indices(
    data: &Dataset,
    x: usize,
    candidates: &[usize],
    params: &LearnParams,
    critical: &mut CriticalValues,
) -> Vec<usize> {
    let mut boundary: Vec<usize> = Vec::new();
    if data.is_constant(x) {
        return boundary;
    }
    loop {
        let z = recent(&boundary, params.max_condition_size).to_vec();
        let mut best: Option<(f64, usize)> = None;
        for &y in candidates {
            if y == x || boundary.contains(&y) || data.is_constant(y) {
                continue;
            }
            let r = chi2_indices(data, x, y, &z, params, critical);
            if r.dependent() && best.is_none_or(|(s, _)| r.statistic > s) {
                best = Some((r.statistic, y));
            }
        }
        match best {
            Some((_, y)) => boundary.push(y),
            None => break,
        }
    }
    loop {
        let mut removed = false;
        for i in 0..boundary.len() {
            let y = boundary[i];
            let rest: Vec<usize> = boundary.iter().copied().filter(|&b| b != y).collect();
            let z = recent(&rest, params.max_condition_size);
            if !chi2_indices(data, x, y, z, params, critical).dependent() {
                boundary.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    boundary
}

fn sorted_indices(data: &Dataset, names: &[String]) -> Result<Vec<usize>> {
    let mut sorted: Vec<&String> = names.iter().collect();
    sorted.sort();
    sorted.dedup();
    sorted.into_iter().map(|n| data.column_index(n)).collect()
}

/// Markov boundary of `x` among all other columns, as a sorted name set.
pub fn markov_boundary(data: &Dataset, x: &str, params: &LearnParams) -> Result<BTreeSet<String>> {
    markov_boundary_among(data, x, data.columns(), params)
}

/// Markov boundary of `x` restricted to the `variables` columns.
pub fn markov_boundary_among(
    data: &Dataset,
    x: &str,
    variables: &[String],
    params: &LearnParams,
) -> Result<BTreeSet<String>> {
    params.check()?;
    let xi = data.column_index(x)?;
    let candidates = sorted_indices(data, variables)?;
    let mut critical = CriticalValues::new(params.alpha);
    Ok(boundary_indices(data, xi, &candidates, params, &mut critical)
        .into_iter()
        .map(|c| data.columns()[c].clone())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Skeleton {
    /// Sorted variable names.
    pub variables: Vec<String>,
    /// Kept edges, smaller name first, sorted.
    pub edges: Vec<(String, String)>,
    /// Fold votes for every edge proposed by at least one fold.
    pub votes: BTreeMap<String, usize>,
    /// Columns that never vary; they get no edges.
    pub constant_columns: Vec<String>,
}

fn edge_key(a: &str, b: &str) -> String {
    format!("{a}--{b}")
}

/// Rows held out in `fold` are those with `row % folds == fold`.
fn training_rows(rows: usize, folds: usize, fold: usize) -> Vec<usize> {
    (0..rows).filter(|r| r % folds != fold).collect()
}

/// Cross-validated skeleton over `variables`.
pub fn build_skeleton(data: &Dataset, variables: &[String], params: &LearnParams) -> Result<Skeleton> {
    params.check()?;
    let columns = sorted_indices(data, variables)?;
    let names: Vec<String> = columns.iter().map(|&c| data.columns()[c].clone()).collect();
    let constant_columns: Vec<String> = columns
        .iter()
        .filter(|&&c| data.is_constant(c))
        .map(|&c| data.columns()[c].clone())
        .collect();

    let fold_edges: Vec<BTreeSet<(usize, usize)>> = (0..params.cv_folds)
        .map(|fold| {
            let train = data.select_rows(&training_rows(data.row_count(), params.cv_folds, fold));
            let boundaries: Vec<BTreeSet<usize>> = columns
                .par_iter()
                .map(|&x| {
                    let mut critical = CriticalValues::new(params.alpha);
                    boundary_indices(&train, x, &columns, params, &mut critical)
                        .into_iter()
                        .collect()
                })
                .collect();
            let mut edges = BTreeSet::new();
            for (i, &a) in columns.iter().enumerate() {
                for (j, &b) in columns.iter().enumerate().skip(i + 1) {
                    let ab = boundaries[i].contains(&b);
                    let ba = boundaries[j].contains(&a);
                    let keep = match params.symmetry_rule {
                        SymmetryRule::And => ab && ba,
                        SymmetryRule::Or => ab || ba,
                    };
                    if keep {
                        edges.insert((i, j));
                    }
                }
            }
            edges
        })
        .collect();

    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for edges in &fold_edges {
        for &e in edges {
            *counts.entry(e).or_default() += 1;
        }
    }
    let edges = counts
        .iter()
        .filter(|(_, &v)| v >= params.cv_agreement.max(1))
        .map(|(&(i, j), _)| (names[i].clone(), names[j].clone()))
        .collect();
    let votes = counts
        .iter()
        .map(|(&(i, j), &v)| (edge_key(&names[i], &names[j]), v))
        .collect();
    Ok(Skeleton {
        variables: names,
        edges,
        votes,
        constant_columns,
    })
}

/// Maximal cliques (Bron–Kerbosch with pivoting), each sorted, listed in
/// lexicographic order of their index lists.
pub fn maximal_cliques(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adjacency = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        adjacency[a].insert(b);
        adjacency[b].insert(a);
    }
    fn expand(
        r: &mut Vec<usize>,
        mut p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        adjacency: &[BTreeSet<usize>],
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            let mut clique = r.clone();
            clique.sort();
            out.push(clique);
            return;
        }
        let pivot = *p
            .union(&x)
            .max_by_key(|&&u| (p.intersection(&adjacency[u]).count(), std::cmp::Reverse(u)))
            .expect("p or x nonempty");
        let candidates: Vec<usize> = p.difference(&adjacency[pivot]).copied().collect();
        for v in candidates {
            r.push(v);
            expand(
                r,
                p.intersection(&adjacency[v]).copied().collect(),
                x.intersection(&adjacency[v]).copied().collect(),
                adjacency,
                out,
            );
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    expand(&mut Vec::new(), (0..n).collect(), BTreeSet::new(), &adjacency, &mut out);
    out.sort();
    out
}

/// Smoothed joint frequency table of `columns` (names in the given order).
fn smoothed_joint(data: &Dataset, columns: &[usize], smoothing: f64) -> Vec<f64> {
    let mut counts = vec![0u64; 1 << columns.len()];
    let cols: Vec<&[u8]> = columns.iter().map(|&c| data.column_at(c)).collect();
    for r in 0..data.row_count() {
        let index = cols.iter().fold(0usize, |acc, col| (acc << 1) | col[r] as usize);
        counts[index] += 1;
    }
    let denom = data.row_count() as f64 + smoothing * counts.len() as f64;
    counts
        .into_iter()
        .map(|c| (c as f64 + smoothing) / denom)
        .collect()
}

/// Clique potentials for `skeleton`.
///
/// Each maximal clique gets its smoothed joint frequency table. Cliques are
/// joined into a maximum-weight spanning forest (weight = shared variables);
/// every non-root clique is divided by the marginal of its table on the
/// separator shared with its parent, so the product is the usual
/// clique-over-separator factorization.
pub fn fit_potentials(skeleton: &Skeleton, data: &Dataset, params: &LearnParams) -> Result<UndirectedNetwork> {
    params.check()?;
    let names = &skeleton.variables;
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let edges = skeleton
        .edges
        .iter()
        .map(|(a, b)| match (index.get(a.as_str()), index.get(b.as_str())) {
            (Some(&i), Some(&j)) => Ok((i, j)),
            _ => Err(Error::UnknownVariable(format!("{a}-{b}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let columns = names
        .iter()
        .map(|n| data.column_index(n))
        .collect::<Result<Vec<_>>>()?;

    let cliques = maximal_cliques(names.len(), &edges);
    if let Some(big) = cliques.iter().find(|c| c.len() > MAX_CLIQUE_SIZE) {
        return Err(Error::CliqueTooLarge(big.len(), MAX_CLIQUE_SIZE));
    }

    // Maximum-weight spanning forest over cliques (Kruskal).
    let mut links: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..cliques.len() {
        for j in i + 1..cliques.len() {
            let shared = cliques[i].iter().filter(|v| cliques[j].contains(v)).count();
            if shared > 0 {
                links.push((shared, i, j));
            }
        }
    }
    links.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut component: Vec<usize> = (0..cliques.len()).collect();
    fn find(c: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while c[root] != root {
            root = c[root];
        }
        c[i] = root;
        root
    }
    let mut tree = vec![Vec::new(); cliques.len()];
    for (_, i, j) in links {
        let (ri, rj) = (find(&mut component, i), find(&mut component, j));
        if ri != rj {
            component[ri.max(rj)] = ri.min(rj);
            tree[i].push(j);
            tree[j].push(i);
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; cliques.len()];
    let mut visited = vec![false; cliques.len()];
    for root in 0..cliques.len() {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(c) = queue.pop_front() {
            let mut next = tree[c].clone();
            next.sort();
            for n in next {
                if !visited[n] {
                    visited[n] = true;
                    parent[n] = Some(c);
                    queue.push_back(n);
                }
            }
        }
    }

    let mut potentials = Vec::with_capacity(cliques.len());
    for (k, clique) in cliques.iter().enumerate() {
        let scope: Vec<String> = clique.iter().map(|&v| names[v].clone()).collect();
        let cols: Vec<usize> = clique.iter().map(|&v| columns[v]).collect();
        let joint = FactorTable::new(scope.clone(), smoothed_joint(data, &cols, params.smoothing))?;
        let table = match parent[k] {
            None => joint,
            Some(p) => {
                let separator: Vec<String> = clique
                    .iter()
                    .filter(|v| cliques[p].contains(v))
                    .map(|&v| names[v].clone())
                    .collect();
                divide_by_marginal(&joint, &separator)?
            }
        };
        potentials.push(table);
    }

    let net = UndirectedNetwork::new(
        names.iter().map(|n| Variable::concept(n)).collect(),
        skeleton.edges.clone(),
        potentials,
        Vec::new(),
    );
    let violations = crate::model::validate_undirected(&net);
    if !violations.is_empty() {
        return Err(Error::InvalidNetwork(violations));
    }
    Ok(net)
}

/// `table(scope) / marginal(separator)`; zero marginals leave zeros.
fn divide_by_marginal(table: &FactorTable, separator: &[String]) -> Result<FactorTable> {
    let marginal = table.marginal(separator)?;
    let positions: Vec<usize> = separator
        .iter()
        .map(|s| table.position(s).expect("separator is inside the clique"))
        .collect();
    let len = table.scope.len();
    let values = table
        .values
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            let m = positions.iter().fold(0usize, |acc, &p| {
                (acc << 1) | crate::factor::state_at(index, len, p) as usize
            });
            let denom = marginal.values[m];
            if denom > 0.0 {
                v / denom
            } else {
                0.0
            }
        })
        .collect();
    FactorTable::new(table.scope.clone(), values)
}

/// Smoothed `p(word | concept present)` and `p(word | concept absent)` for
/// each word, clamped into the open unit interval.
pub fn fit_concept_evidence(
    data: &Dataset,
    concept: &str,
    words: &[String],
    params: &LearnParams,
) -> Result<Vec<ConceptEvidenceLink>> {
    params.check()?;
    let c = data.column_index(concept)?;
    if data.is_constant(c) {
        return Err(Error::DegenerateConcept(concept.to_string()));
    }
    let concept_col = data.column_at(c);
    let n_present = concept_col.iter().filter(|&&b| b == 1).count() as f64;
    let n_absent = data.row_count() as f64 - n_present;
    let s = params.smoothing;
    let mut links = Vec::with_capacity(words.len());
    for word in words {
        let w = data.column_at(data.column_index(word)?);
        let mut with = [0u64; 2];
        for (cb, wb) in concept_col.iter().zip(w) {
            if *wb == 1 {
                with[*cb as usize] += 1;
            }
        }
        let p_present = (with[1] as f64 + s) / (n_present + 2.0 * s);
        let p_absent = (with[0] as f64 + s) / (n_absent + 2.0 * s);
        links.push(ConceptEvidenceLink {
            word: word.clone(),
            concept: concept.to_string(),
            p_present: clamp_probability(p_present),
            p_absent: clamp_probability(p_absent),
        });
    }
    Ok(links)
}

/// Non-fatal findings reported while learning.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "diagnostic", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Column never varies; no edges, no links.
    ConstantColumn { column: String },
    /// Word showed no detectable dependence on any concept and was dropped.
    UnlinkedWord { word: String },
    /// Votes received by a proposed edge.
    EdgeVotes { edge: String, votes: usize, kept: bool },
}

#[derive(Clone, Debug)]
pub struct LearnOutput {
    /// Undirected concept network; its `evidence_links` hold the learned links.
    pub network: UndirectedNetwork,
    pub links: Vec<ConceptEvidenceLink>,
    pub skeleton: Skeleton,
    pub diagnostics: Vec<Diagnostic>,
}

/// Concept a word is attached to: the manifest's assignment if given,
/// otherwise the concept with the largest marginal χ² statistic among those
/// the word depends on.
fn assign_word(
    data: &Dataset,
    word: &str,
    concepts: &[String],
    manifest: &Manifest,
    params: &LearnParams,
    critical: &mut CriticalValues,
) -> Result<Option<String>> {
    if let Some(c) = manifest.assignments.get(word) {
        return Ok(Some(c.clone()));
    }
    let w = data.column_index(word)?;
    if data.is_constant(w) {
        return Ok(None);
    }
    let mut best: Option<(f64, &String)> = None;
    for concept in concepts {
        let c = data.column_index(concept)?;
        if data.is_constant(c) {
            continue;
        }
        let r = chi2_indices(data, w, c, &[], params, critical);
        if r.dependent() && best.is_none_or(|(s, _)| r.statistic > s) {
            best = Some((r.statistic, concept));
        }
    }
    Ok(best.map(|(_, c)| c.clone()))
}

/// Full knowledge-acquisition run: skeleton and potentials over the
/// manifest's concept columns, then one evidence link per feature column.
pub fn learn_network(data: &Dataset, manifest: &Manifest, params: &LearnParams) -> Result<LearnOutput> {
    params.check()?;
    manifest.check(data)?;
    let concepts = manifest.concepts();
    if concepts.is_empty() {
        return Err(Error::InvalidInput("manifest lists no concept columns".into()));
    }
    let skeleton = build_skeleton(data, &concepts, params)?;
    let mut network = fit_potentials(&skeleton, data, params)?;

    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    let mut constant: BTreeSet<String> = skeleton.constant_columns.iter().cloned().collect();
    for word in manifest.features() {
        if data.is_constant(data.column_index(&word)?) {
            constant.insert(word);
        }
    }
    diagnostics.extend(
        constant
            .iter()
            .map(|c| Diagnostic::ConstantColumn { column: c.clone() }),
    );
    let kept: BTreeSet<String> = skeleton
        .edges
        .iter()
        .map(|(a, b)| edge_key(a, b))
        .collect();
    diagnostics.extend(skeleton.votes.iter().map(|(edge, &votes)| Diagnostic::EdgeVotes {
        edge: edge.clone(),
        votes,
        kept: kept.contains(edge),
    }));

    let mut critical = CriticalValues::new(params.alpha);
    let mut by_concept: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for word in manifest.features() {
        if constant.contains(&word) {
            continue;
        }
        match assign_word(data, &word, &concepts, manifest, params, &mut critical)? {
            Some(c) if !constant.contains(&c) => by_concept.entry(c).or_default().push(word),
            _ => diagnostics.push(Diagnostic::UnlinkedWord { word }),
        }
    }
    let mut links = Vec::new();
    for (concept, words) in &by_concept {
        links.extend(fit_concept_evidence(data, concept, words, params)?);
    }
    links.sort_by(|a, b| a.word.cmp(&b.word));
    network.evidence_links = links.clone();
    Ok(LearnOutput {
        network,
        links,
        skeleton,
        diagnostics,
    })
}
