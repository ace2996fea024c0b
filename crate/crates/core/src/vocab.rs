//! Vocabulary construction, frequent-word subsampling and the unigram noise
//! table used for negative sampling.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use rand::Rng;
use thiserror::Error;

/// Dense word id, `0..V`.
pub type WordId = usize;

/// Default subsampling threshold.
pub const DEFAULT_SAMPLE: f64 = 1e-3;
/// Default exponent applied to counts in the noise distribution.
pub const DEFAULT_NS_EXPONENT: f64 = 0.75;
/// Default number of slots in the negative-sampling table.
pub const DEFAULT_TABLE_SIZE: usize = 10_000_000;
/// Redraws allowed when a negative draw hits the excluded id.
pub const MAX_NEGATIVE_RETRIES: usize = 100;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("no word reaches min_count {0}")]
    EmptyVocabulary(u64),
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("line {line}: expected \"word<TAB>count\"")]
    MalformedLine { line: usize },
    #[error("line {line}: duplicate word {word:?}")]
    DuplicateWord { line: usize, word: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplingError {
    #[error("negative sampling exhausted: no word other than {0} can be drawn")]
    SamplingExhausted(WordId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub word: String,
    pub count: u64,
}

/// Word/id maps with corpus frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<VocabEntry>,
    index: HashMap<String, WordId>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from entries already in id order.
    fn from_entries(words: Vec<VocabEntry>, total_tokens: u64) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(id, e)| (e.word.clone(), id))
            .collect();
        Vocabulary {
            words,
            index,
            total_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id].word
    }

    pub fn count(&self, id: WordId) -> u64 {
        self.words[id].count
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.words
    }

    /// Token count of the source corpus, including words below `min_count`.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Sum of counts of the retained words.
    pub fn retained_tokens(&self) -> u64 {
        self.words.iter().map(|e| e.count).sum()
    }

    /// Writes `word<TAB>count` lines in id order.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.words {
            writeln!(out, "{}\t{}", e.word, e.count)?;
        }
        out.flush()
    }

    /// Reads the `word<TAB>count` format back. Ids follow file order and
    /// `total_tokens` is the sum of the counts.
    pub fn read_from<R: BufRead>(input: R) -> Result<Self, VocabError> {
        let mut words = Vec::new();
        let mut seen = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or(VocabError::MalformedLine { line: i + 1 })?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| VocabError::MalformedLine { line: i + 1 })?;
            if word.is_empty() || count == 0 {
                return Err(VocabError::MalformedLine { line: i + 1 });
            }
            if seen.insert(word.to_owned(), words.len()).is_some() {
                return Err(VocabError::DuplicateWord {
                    line: i + 1,
                    word: word.to_owned(),
                });
            }
            words.push(VocabEntry {
                word: word.to_owned(),
                count,
            });
        }
        let total = words.iter().map(|e| e.count).sum();
        Ok(Vocabulary {
            words,
            index: seen,
            total_tokens: total,
        })
    }
}

/// Counts words and keeps those seen at least `min_count` times.
///
/// Ids are assigned by descending count, ties broken by ascending
/// lexicographic order.
pub fn build_vocab<I, S, T>(corpus: I, min_count: u64) -> Result<Vocabulary, VocabError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[T]>,
    T: AsRef<str>,
{
    if min_count == 0 {
        return Err(VocabError::InvalidMinCount);
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for sentence in corpus {
        for token in sentence.as_ref() {
            total += 1;
            let token = token.as_ref();
            match counts.get_mut(token) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(token.to_owned(), 1);
                }
            }
        }
    }
    if total == 0 {
        return Err(VocabError::EmptyCorpus);
    }
    let mut words: Vec<VocabEntry> = counts
        .into_iter()
        .filter(|&(_, count)| count >= min_count)
        .map(|(word, count)| VocabEntry { word, count })
        .collect();
    if words.is_empty() {
        return Err(VocabError::EmptyVocabulary(min_count));
    }
    words.sort_unstable_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
    Ok(Vocabulary::from_entries(words, total))
}

/// Probability of keeping one occurrence of a word during training:
/// `min(1, (sqrt(f / sample) + 1) * sample / f)` with `f = count / total`.
pub fn keep_probability(count: u64, total: u64, sample: f64) -> f64 {
    debug_assert!(count >= 1 && total >= count && sample > 0.0);
    let f = count as f64 / total as f64;
    (((f / sample).sqrt() + 1.0) * sample / f).min(1.0)
}

/// Per-word keep probabilities over `vocab.total_tokens()`.
/// A `sample` of zero disables subsampling.
pub fn keep_probabilities(vocab: &Vocabulary, sample: f64) -> Vec<f64> {
    let total = vocab.total_tokens();
    vocab
        .entries()
        .iter()
        .map(|e| {
            if sample > 0.0 {
                keep_probability(e.count, total, sample)
            } else {
                1.0
            }
        })
        .collect()
}

/// Unigram table: each word id occupies a share of slots proportional to
/// `count^exponent`.
#[derive(Debug, Clone)]
pub struct NegativeTable {
    entries: Vec<u32>,
    // Set when every slot holds the same id.
    sole: Option<WordId>,
}

impl NegativeTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Number of slots holding `id`.
    pub fn multiplicity(&self, id: WordId) -> usize {
        self.entries.iter().filter(|&&e| e as usize == id).count()
    }
}

/// Fills `table_size` slots so that word `w` holds
/// `round(T * C(w)) - round(T * C(w - 1))` of them, where `C` is the
/// cumulative normalized `count^exponent`.
pub fn build_negative_table(
    vocab: &Vocabulary,
    ns_exponent: f64,
    table_size: usize,
) -> NegativeTable {
    assert!(
        !vocab.is_empty(),
        "negative table needs a non-empty vocabulary"
    );
    let weights: Vec<f64> = vocab
        .entries()
        .iter()
        .map(|e| (e.count as f64).powf(ns_exponent))
        .collect();
    let norm: f64 = weights.iter().sum();
    let mut entries = Vec::with_capacity(table_size);
    let mut cumulative = 0.0;
    let last = weights.len() - 1;
    for (id, w) in weights.iter().enumerate() {
        cumulative += w / norm;
        let end = if id == last {
            table_size
        } else {
            ((cumulative * table_size as f64).round() as usize).min(table_size)
        };
        while entries.len() < end {
            entries.push(id as u32);
        }
    }
    let sole = match entries.first() {
        Some(&first) if entries.iter().all(|&e| e == first) => Some(first as WordId),
        _ => None,
    };
    NegativeTable { entries, sole }
}

/// Draws a uniformly random table slot, redrawing when it holds `exclude`.
///
/// Gives up with [`SamplingError::SamplingExhausted`] when nothing but
/// `exclude` can be drawn, or after [`MAX_NEGATIVE_RETRIES`] redraws.
pub fn sample_negative<R: Rng + ?Sized>(
    table: &NegativeTable,
    rng: &mut R,
    exclude: Option<WordId>,
) -> Result<WordId, SamplingError> {
    assert!(!table.is_empty(), "cannot sample from an empty table");
    if let (Some(sole), Some(ex)) = (table.sole, exclude) {
        if sole == ex {
            return Err(SamplingError::SamplingExhausted(ex));
        }
    }
    for _ in 0..=MAX_NEGATIVE_RETRIES {
        let id = table.entries[rng.random_range(0..table.entries.len())] as WordId;
        if Some(id) != exclude {
            return Ok(id);
        }
    }
    Err(SamplingError::SamplingExhausted(
        exclude.unwrap_or_default(),
    ))
}
