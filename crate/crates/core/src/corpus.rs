//! Corpus cleaning: segmentation, Boko-script filtering, deduplication and
//! corpus statistics.
//!
//! The pipeline turns raw line-oriented text dumps into sentences of
//! lowercase tokens. A token survives only if every character is a Boko
//! letter (`a`–`z`, `ɓ`, `ɗ`, `ƙ`, `ƴ`), an apostrophe next to a letter, or a
//! hyphen between two letters. Sentences with fewer than three surviving
//! tokens are rejected.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Minimum number of tokens a cleaned sentence must keep.
pub const MIN_SENTENCE_TOKENS: usize = 3;

const HOOKED_LETTERS: [char; 4] = ['ɓ', 'ɗ', 'ƙ', 'ƴ'];

fn punct_or_symbol() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{P}\p{S}]").expect("static regex"))
}

/// Returns true for the letters of the (lowercase) Boko alphabet.
pub fn is_boko_letter(c: char) -> bool {
    c.is_ascii_lowercase() || HOOKED_LETTERS.contains(&c)
}

/// Returns true for every character a cleaned token may contain.
pub fn is_boko_char(c: char) -> bool {
    is_boko_letter(c) || c == '\'' || c == '-'
}

/// A sentence that survived cleaning.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenizedSentence {
    tokens: Vec<String>,
}

/// Why a token sequence is not a valid [`TokenizedSentence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rejection {
    /// No surviving token contains a letter.
    NoWords,
    /// Fewer than [`MIN_SENTENCE_TOKENS`] tokens survived.
    TooShort,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NoWords => f.write_str("no words"),
            Rejection::TooShort => f.write_str("too short"),
        }
    }
}

impl TokenizedSentence {
    /// Validates already-cleaned tokens.
    ///
    /// Tokens containing characters outside the Boko whitelist are not
    /// silently dropped here; use [`clean_sentence`] for raw text.
    pub fn new(tokens: Vec<String>) -> Result<Self, Rejection> {
        if tokens
            .iter()
            .any(|t| t.is_empty() || !t.chars().all(is_boko_char))
        {
            return Err(Rejection::NoWords);
        }
        check_tokens(&tokens)?;
        Ok(TokenizedSentence { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces; the on-disk line form.
    pub fn render(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }
}

impl AsRef<[String]> for TokenizedSentence {
    fn as_ref(&self) -> &[String] {
        &self.tokens
    }
}

fn check_tokens(tokens: &[String]) -> Result<(), Rejection> {
    if !tokens.iter().any(|t| t.chars().any(is_boko_letter)) {
        return Err(Rejection::NoWords);
    }
    if tokens.len() < MIN_SENTENCE_TOKENS {
        return Err(Rejection::TooShort);
    }
    Ok(())
}

/// Splits a raw document on `.`, `!`, `?` and line breaks.
///
/// Segments are trimmed; blank segments are dropped.
pub fn segment(doc: &str) -> Vec<&str> {
    doc.split(['.', '!', '?', '\n', '\r'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn normalize_apostrophes(c: char) -> char {
    match c {
        '\u{2019}' | '\u{02BC}' => '\'',
        other => other,
    }
}

/// Lowercases and strips punctuation/symbol characters (Unicode `P*` and
/// `S*`). Apostrophes touching a letter and hyphens between two letters are
/// kept.
fn strip_punctuation(raw: &str) -> String {
    let lowered: String = raw
        .to_lowercase()
        .chars()
        .map(normalize_apostrophes)
        .collect();
    let mut out = String::with_capacity(lowered.len());
    let mut last = 0;
    for m in punct_or_symbol().find_iter(&lowered) {
        out.push_str(&lowered[last..m.start()]);
        last = m.end();
        let prev = lowered[..m.start()].chars().next_back();
        let next = lowered[m.end()..].chars().next();
        let letter = |c: Option<char>| c.is_some_and(char::is_alphabetic);
        let keep = match m.as_str() {
            "'" => letter(prev) || letter(next),
            "-" => letter(prev) && letter(next),
            _ => false,
        };
        if keep {
            out.push_str(m.as_str());
        }
    }
    out.push_str(&lowered[last..]);
    out
}

/// Cleans one segmented sentence.
///
/// Steps, in order: lowercase, punctuation removal, whitespace
/// tokenization, removal of tokens containing digits or non-Boko
/// characters, then the `NoWords` and `TooShort` checks.
pub fn clean_sentence(raw: &str) -> Result<TokenizedSentence, Rejection> {
    let stripped = strip_punctuation(raw);
    let tokens: Vec<String> = stripped
        .split_whitespace()
        .filter(|t| t.chars().all(is_boko_char))
        .map(str::to_owned)
        .collect();
    check_tokens(&tokens)?;
    Ok(TokenizedSentence { tokens })
}

/// Iterator adaptor that drops exact repeats of earlier sentences.
pub struct Dedup<I> {
    inner: I,
    seen: HashSet<String>,
    removed: usize,
}

impl<I> Dedup<I> {
    /// Number of duplicates dropped so far.
    pub fn removed_count(&self) -> usize {
        self.removed
    }
}

impl<I: Iterator<Item = TokenizedSentence>> Iterator for Dedup<I> {
    type Item = TokenizedSentence;

    fn next(&mut self) -> Option<TokenizedSentence> {
        for sentence in self.inner.by_ref() {
            if self.seen.insert(sentence.render()) {
                return Some(sentence);
            }
            self.removed += 1;
        }
        None
    }
}

/// Keeps the first occurrence of each distinct token sequence, in input order.
pub fn dedup<I>(sentences: I) -> Dedup<I::IntoIter>
where
    I: IntoIterator<Item = TokenizedSentence>,
{
    Dedup {
        inner: sentences.into_iter(),
        seen: HashSet::new(),
        removed: 0,
    }
}

/// Sentence and token counts of a cleaned corpus.
///
/// `sentence_count` counts every sentence handed in (before deduplication);
/// `total_tokens` counts tokens of the distinct sentences only, i.e. of the
/// corpus that is written out and trained on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub sentence_count: usize,
    pub total_tokens: usize,
    pub unique_sentence_count: usize,
    pub duplicate_removed_count: usize,
}

/// Computes [`CorpusStats`] over a sequence of sentences that may still
/// contain duplicates.
pub fn corpus_stats<'a, I>(corpus: I) -> CorpusStats
where
    I: IntoIterator<Item = &'a TokenizedSentence>,
{
    let mut seen = HashSet::new();
    let mut stats = CorpusStats::default();
    for sentence in corpus {
        stats.sentence_count += 1;
        if seen.insert(sentence.tokens()) {
            stats.unique_sentence_count += 1;
            stats.total_tokens += sentence.len();
        } else {
            stats.duplicate_removed_count += 1;
        }
    }
    stats
}

/// Everything the cleaning pipeline counted while running.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub documents: usize,
    pub segments: usize,
    pub rejected_no_words: usize,
    pub rejected_too_short: usize,
    pub corpus: CorpusStats,
}

impl PipelineReport {
    /// Flat `key=value` rendering, one pair per line.
    pub fn to_key_value(&self) -> String {
        format!(
            "documents={}\nsegments={}\nrejected_no_words={}\nrejected_too_short={}\n\
             sentence_count={}\nunique_sentence_count={}\nduplicate_removed_count={}\n\
             total_tokens={}\n",
            self.documents,
            self.segments,
            self.rejected_no_words,
            self.rejected_too_short,
            self.corpus.sentence_count,
            self.corpus.unique_sentence_count,
            self.corpus.duplicate_removed_count,
            self.corpus.total_tokens,
        )
    }
}

/// Streaming cleaner over raw documents.
#[derive(Debug, Default)]
pub struct CleaningPipeline {
    seen: HashSet<String>,
    report: PipelineReport,
}

impl CleaningPipeline {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cleans one raw document and returns the new distinct sentences it
    /// contributed.
    pub fn push_document(&mut self, doc: &str) -> Vec<TokenizedSentence> {
        self.report.documents += 1;
        let mut fresh = Vec::new();
        for raw in segment(doc) {
            self.report.segments += 1;
            match clean_sentence(raw) {
                Ok(sentence) => {
                    self.report.corpus.sentence_count += 1;
                    if self.seen.insert(sentence.render()) {
                        self.report.corpus.unique_sentence_count += 1;
                        self.report.corpus.total_tokens += sentence.len();
                        fresh.push(sentence);
                    } else {
                        self.report.corpus.duplicate_removed_count += 1;
                    }
                }
                Err(Rejection::NoWords) => self.report.rejected_no_words += 1,
                Err(Rejection::TooShort) => self.report.rejected_too_short += 1,
            }
        }
        fresh
    }

    pub fn report(&self) -> &PipelineReport {
        &self.report
    }

    pub fn finish(self) -> PipelineReport {
        self.report
    }
}

/// Cleans a reader of raw documents (one per line) into `out`, one sentence
/// per line.
pub fn clean_corpus<R: BufRead, W: Write>(input: R, mut out: W) -> io::Result<PipelineReport> {
    let mut pipeline = CleaningPipeline::new();
    for line in input.lines() {
        for sentence in pipeline.push_document(&line?) {
            writeln!(out, "{}", sentence.render())?;
        }
    }
    out.flush()?;
    Ok(pipeline.finish())
}

/// Reads a cleaned corpus file: one sentence per line, whitespace-separated
/// tokens. Blank lines are skipped; no other validation is applied.
pub fn read_corpus<R: BufRead>(input: R) -> io::Result<Vec<Vec<String>>> {
    let mut sentences = Vec::new();
    for line in input.lines() {
        let line = line?;
        let tokens: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if !tokens.is_empty() {
            sentences.push(tokens);
        }
    }
    Ok(sentences)
}
