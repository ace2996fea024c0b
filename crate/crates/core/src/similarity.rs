//! Cosine nearest neighbours and annotation-based scoring of neighbour
//! lists.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::store::WordVectors;
use crate::vocab::WordId;

/// Query words of the standard evaluation: 30 everyday Hausa words and
/// personal names.
pub const DEFAULT_QUERIES: [&str; 30] = [
    "miji",
    "mata",
    "makaranta",
    "gida",
    "tafiya",
    "kyau",
    "ido",
    "waya",
    "kira",
    "hadisi",
    "kara",
    "godiya",
    "kuka",
    "ibrahim",
    "so",
    "kallo",
    "unguwa",
    "dariya",
    "kaga",
    "sai",
    "kuma",
    "rawa",
    "kida",
    "waka",
    "habiba",
    "zainab",
    "kalma",
    "musa",
    "abdullahi",
    "littafi",
];

/// Neighbours returned per query by default.
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("cosine of a zero vector is undefined")]
    ZeroVector,
    #[error("vector lengths differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("word {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("k must be at least 1")]
    InvalidK,
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

#[inline]
fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn cosine_with_norms(u: &[f32], nu: f64, v: &[f32], nv: f64) -> f64 {
    (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0)
}

/// `u·v / (|u||v|)`, clamped to `[-1, 1]`.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::DimensionMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok(cosine_with_norms(u, nu, v, nv))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub word: String,
    pub score: f64,
}

/// Ranking order: higher score first, then ascending word.
pub fn rank_order(a_score: f64, a_word: &str, b_score: f64, b_word: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_word.cmp(b_word))
}

struct Candidate<'a> {
    score: f64,
    word: &'a str,
}

// Heap order puts the worst-ranked candidate on top.
impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(self.score, self.word, other.score, other.word)
    }
}

impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate<'_> {}

/// Exact full-scan neighbour search with cached row norms.
pub struct SimilarityIndex<'a> {
    vectors: &'a WordVectors,
    norms: Vec<f64>,
}

impl<'a> SimilarityIndex<'a> {
    pub fn new(vectors: &'a WordVectors) -> Self {
        let norms = vectors.matrix().iter_rows().map(norm).collect();
        SimilarityIndex { vectors, norms }
    }

    pub fn vectors(&self) -> &WordVectors {
        self.vectors
    }

    /// Top-`k` words by cosine to row `id`, excluding `id` itself and
    /// zero-norm rows.
    pub fn nearest_to_id(&self, id: WordId, k: usize) -> Result<Vec<Neighbor>, SimilarityError> {
        if k == 0 {
            return Err(SimilarityError::InvalidK);
        }
        let query = self.vectors.vector(id);
        let qn = self.norms[id];
        if qn == 0.0 {
            return Err(SimilarityError::ZeroVector);
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        for (other, &on) in self.norms.iter().enumerate() {
            if other == id || on == 0.0 {
                continue;
            }
            let score = cosine_with_norms(query, qn, self.vectors.vector(other), on);
            let cand = Candidate {
                score,
                word: self.vectors.word(other),
            };
            if heap.len() < k {
                heap.push(cand);
            } else if let Some(worst) = heap.peek() {
                if cand < *worst {
                    heap.pop();
                    heap.push(cand);
                }
            }
        }
        Ok(heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| Neighbor {
                word: c.word.to_owned(),
                score: c.score,
            })
            .collect())
    }

    pub fn most_similar(&self, word: &str, k: usize) -> Result<Vec<Neighbor>, SimilarityError> {
        let id = self
            .vectors
            .id(word)
            .ok_or_else(|| SimilarityError::OutOfVocabulary(word.to_owned()))?;
        self.nearest_to_id(id, k)
    }
}

/// Top-`k` neighbours of `word` over the whole vocabulary.
pub fn most_similar(
    vectors: &WordVectors,
    word: &str,
    k: usize,
) -> Result<Vec<Neighbor>, SimilarityError> {
    SimilarityIndex::new(vectors).most_similar(word, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query: String,
    /// False when the query could not be looked up; `neighbors` is then empty.
    pub found: bool,
    pub neighbors: Vec<Neighbor>,
}

/// Ranked neighbour lists for a set of queries against one model.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    pub label: String,
    pub k: usize,
    pub results: Vec<QueryResult>,
}

/// Runs every query; missing or zero-vector queries become empty lists.
pub fn evaluate<S: AsRef<str>>(
    vectors: &WordVectors,
    queries: &[S],
    k: usize,
    label: &str,
) -> SimilarityReport {
    let index = SimilarityIndex::new(vectors);
    let results = queries
        .iter()
        .map(|q| {
            let q = q.as_ref();
            match index.most_similar(q, k) {
                Ok(neighbors) => QueryResult {
                    query: q.to_owned(),
                    found: true,
                    neighbors,
                },
                Err(_) => QueryResult {
                    query: q.to_owned(),
                    found: false,
                    neighbors: Vec::new(),
                },
            }
        })
        .collect();
    SimilarityReport {
        label: label.to_owned(),
        k,
        results,
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SimilarityReport {
    /// `query<TAB>rank<TAB>neighbor<TAB>score` rows, preceded by `#`
    /// metadata lines for the label, `k`, and queries with no neighbours.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# model={}", self.label)?;
        writeln!(out, "# k={}", self.k)?;
        for r in &self.results {
            if r.neighbors.is_empty() {
                writeln!(out, "# miss={}", r.query)?;
            }
            for (rank, n) in r.neighbors.iter().enumerate() {
                writeln!(out, "{}\t{}\t{}\t{:.6}", r.query, rank + 1, n.word, n.score)?;
            }
        }
        out.flush()
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self, ReportError> {
        let mut label = String::new();
        let mut k = None;
        let mut results: Vec<QueryResult> = Vec::new();
        let mut by_query: HashMap<String, usize> = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let bad = |reason: &str| ReportError::Malformed {
                line: lineno,
                reason: reason.to_owned(),
            };
            if line.trim().is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(v) = meta.strip_prefix("model=") {
                    label = v.to_owned();
                } else if let Some(v) = meta.strip_prefix("k=") {
                    k = Some(v.parse().map_err(|_| bad("bad k"))?);
                } else if let Some(q) = meta.strip_prefix("miss=") {
                    if by_query.contains_key(q) {
                        return Err(bad("query listed twice"));
                    }
                    by_query.insert(q.to_owned(), results.len());
                    results.push(QueryResult {
                        query: q.to_owned(),
                        found: false,
                        neighbors: Vec::new(),
                    });
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [query, rank, word, score] = fields[..] else {
                return Err(bad("expected query<TAB>rank<TAB>neighbor<TAB>score"));
            };
            let rank: usize = rank.parse().map_err(|_| bad("bad rank"))?;
            let score: f64 = score.parse().map_err(|_| bad("bad score"))?;
            let slot = *by_query.entry(query.to_owned()).or_insert_with(|| {
                results.push(QueryResult {
                    query: query.to_owned(),
                    found: true,
                    neighbors: Vec::new(),
                });
                results.len() - 1
            });
            let entry = &mut results[slot];
            if !entry.found || rank != entry.neighbors.len() + 1 {
                return Err(bad("ranks must run 1, 2, ... per query"));
            }
            entry.neighbors.push(Neighbor {
                word: word.to_owned(),
                score,
            });
        }
        let k = k.unwrap_or_else(|| {
            results
                .iter()
                .map(|r| r.neighbors.len())
                .max()
                .unwrap_or(DEFAULT_K)
        });
        Ok(SimilarityReport { label, k, results })
    }
}

/// Human correct/incorrect judgments keyed by `(query, neighbor)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSet {
    judgments: HashMap<(String, String), bool>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: &str, neighbor: &str, correct: bool) {
        self.judgments
            .insert((query.to_owned(), neighbor.to_owned()), correct);
    }

    pub fn get(&self, query: &str, neighbor: &str) -> Option<bool> {
        self.judgments
            .get(&(query.to_owned(), neighbor.to_owned()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Parses `query<TAB>neighbor<TAB>0|1` lines.
    pub fn read_from<R: BufRead>(input: R) -> Result<Self, ReportError> {
        let mut set = AnnotationSet::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| ReportError::Malformed {
                line: i + 1,
                reason: reason.to_owned(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [query, neighbor, judgment] = fields[..] else {
                return Err(bad("expected query<TAB>neighbor<TAB>0|1"));
            };
            let correct = match judgment.trim() {
                "1" => true,
                "0" => false,
                _ => return Err(bad("judgment must be 0 or 1")),
            };
            if set.get(query, neighbor).is_some_and(|prev| prev != correct) {
                return Err(bad("conflicting judgment for the same pair"));
            }
            set.insert(query, neighbor, correct);
        }
        Ok(set)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut pairs: Vec<_> = self.judgments.iter().collect();
        pairs.sort();
        for ((q, n), &c) in pairs {
            writeln!(out, "{q}\t{n}\t{}", u8::from(c))?;
        }
        out.flush()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("no judgment for pair ({query}, {neighbor})")]
    MissingAnnotation { query: String, neighbor: String },
}

/// Correct-neighbour counts and overall accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub label: String,
    pub per_query: Vec<(String, usize)>,
    pub correct: usize,
    /// `queries * k`; missing predictions count as wrong.
    pub possible: usize,
}

impl Score {
    pub fn accuracy(&self) -> f64 {
        if self.possible == 0 {
            0.0
        } else {
            self.correct as f64 / self.possible as f64
        }
    }

    /// Accuracy as a percentage with one decimal, e.g. `88.7%`.
    pub fn percent(&self) -> String {
        format!("{:.1}%", self.accuracy() * 100.0)
    }

    /// Table layout: one `word<TAB>count` row per query, then the accuracy.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let label = if self.label.is_empty() {
            "correct"
        } else {
            &self.label
        };
        let _ = writeln!(s, "words\t{label}");
        for (q, c) in &self.per_query {
            let _ = writeln!(s, "{q}\t{c}");
        }
        let _ = writeln!(s, "total\t{}/{}", self.correct, self.possible);
        let _ = writeln!(s, "accuracy\t{}", self.percent());
        s
    }
}

pub fn score_annotations(
    report: &SimilarityReport,
    annotations: &AnnotationSet,
) -> Result<Score, ScoreError> {
    let mut per_query = Vec::with_capacity(report.results.len());
    let mut correct = 0;
    for r in &report.results {
        let mut hits = 0;
        for n in r.neighbors.iter().take(report.k) {
            match annotations.get(&r.query, &n.word) {
                Some(true) => hits += 1,
                Some(false) => {}
                None => {
                    return Err(ScoreError::MissingAnnotation {
                        query: r.query.clone(),
                        neighbor: n.word.clone(),
                    })
                }
            }
        }
        correct += hits;
        per_query.push((r.query.clone(), hits));
    }
    Ok(Score {
        label: report.label.clone(),
        per_query,
        correct,
        possible: report.results.len() * report.k,
    })
}
