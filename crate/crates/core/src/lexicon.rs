//! English/other classification of vocabulary words against a reference
//! wordlist, and the resulting composition counts.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};

/// Words that occur in English wordlists but are used as Hausa words in the
/// corpus; never counted as English.
pub const DEFAULT_EXCLUSIONS: [&str; 70] = [
    "a", "da", "ta", "ya", "na", "ba", "yi", "su", "ne", "ce", "shi", "ga", "za", "sai", "yan",
    "aka", "wa", "kan", "nan", "ko", "ka", "hau", "mu", "masu", "kasa", "kai", "dan", "ake", "sa",
    "amma", "yana", "yin", "tare", "bai", "ita", "ni", "baya", "ana", "masa", "din", "tun", "mun",
    "kafa", "dama", "akan", "ji", "zaman", "fi", "tana", "zo", "abu", "kama", "mana", "sha",
    "kula", "zan", "jin", "kayan", "boko", "ki", "dole", "babu", "dace", "gare", "dauke", "damar",
    "kansa", "kashi", "rana", "dari",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    English,
    Other,
}

/// Exact-membership classifier.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    english: HashSet<String>,
    exclusions: HashSet<String>,
}

impl Lexicon {
    pub fn new<I, J, S, T>(english: I, exclusions: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        Lexicon {
            english: english.into_iter().map(Into::into).collect(),
            exclusions: exclusions.into_iter().map(Into::into).collect(),
        }
    }

    /// English wordlist with [`DEFAULT_EXCLUSIONS`].
    pub fn with_default_exclusions<I, S>(english: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(english, DEFAULT_EXCLUSIONS)
    }

    pub fn add_exclusion(&mut self, word: &str) {
        self.exclusions.insert(word.to_owned());
    }

    pub fn classify(&self, word: &str) -> Language {
        classify_word(word, &self.english, &self.exclusions)
    }
}

pub fn classify_word(
    word: &str,
    english: &HashSet<String>,
    exclusions: &HashSet<String>,
) -> Language {
    if english.contains(word) && !exclusions.contains(word) {
        Language::English
    } else {
        Language::Other
    }
}

/// Reads a one-word-per-line list, lowercasing and skipping blank lines.
pub fn read_wordlist<R: BufRead>(input: R) -> io::Result<Vec<String>> {
    let mut words = Vec::new();
    for line in input.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() {
            words.push(w.to_lowercase());
        }
    }
    Ok(words)
}

/// English share of a vocabulary, by word type and by token.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionStats {
    pub vocab_size: u64,
    pub english_vocab_count: u64,
    pub total_tokens: u64,
    pub english_token_count: u64,
}

fn ratio(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

impl CompositionStats {
    pub fn english_vocab_ratio(&self) -> f64 {
        ratio(self.english_vocab_count, self.vocab_size)
    }

    pub fn english_token_ratio(&self) -> f64 {
        ratio(self.english_token_count, self.total_tokens)
    }

    /// English tokens per non-English token.
    pub fn english_to_other_token_ratio(&self) -> f64 {
        ratio(
            self.english_token_count,
            self.total_tokens - self.english_token_count,
        )
    }

    /// English word types per non-English word type.
    pub fn english_to_other_vocab_ratio(&self) -> f64 {
        ratio(
            self.english_vocab_count,
            self.vocab_size - self.english_vocab_count,
        )
    }
}

/// Four-row summary in the layout of a corpus-statistics table, followed by
/// both ratio conventions.
impl fmt::Display for CompositionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |r: f64| (r * 100.0).round();
        writeln!(f, "Total no. of words\t{}", self.total_tokens)?;
        writeln!(
            f,
            "No. of English words\t{} ({}%)",
            self.english_token_count,
            pct(self.english_token_ratio())
        )?;
        writeln!(f, "Vocabulary size\t{}", self.vocab_size)?;
        writeln!(
            f,
            "English words\t{} ({}%)",
            self.english_vocab_count,
            pct(self.english_vocab_ratio())
        )?;
        let inv = |r: f64| if r > 0.0 { 1.0 / r } else { f64::INFINITY };
        writeln!(
            f,
            "English:other tokens\t1:{:.1}",
            inv(self.english_to_other_token_ratio())
        )?;
        write!(
            f,
            "English:other vocabulary\t1:{:.1}",
            inv(self.english_to_other_vocab_ratio())
        )
    }
}

/// Counts English-classified words over `(word, count)` pairs; the token
/// level weights each word by its count.
pub fn vocabulary_composition<'a, I>(vocab: I, lexicon: &Lexicon) -> CompositionStats
where
    I: IntoIterator<Item = (&'a str, u64)>,
{
    let mut stats = CompositionStats::default();
    for (word, count) in vocab {
        stats.vocab_size += 1;
        stats.total_tokens += count;
        if lexicon.classify(word) == Language::English {
            stats.english_vocab_count += 1;
            stats.english_token_count += count;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exclusions_are_unique() {
        let set: HashSet<_> = DEFAULT_EXCLUSIONS.iter().collect();
        assert_eq!(set.len(), DEFAULT_EXCLUSIONS.len());
    }

    #[test]
    fn classification() {
        let lex = Lexicon::with_default_exclusions(["school", "da", "a", "go"]);
        assert_eq!(lex.classify("school"), Language::English);
        assert_eq!(lex.classify("da"), Language::Other);
        assert_eq!(lex.classify("a"), Language::Other);
        assert_eq!(lex.classify("ƙasa"), Language::Other);
        assert_eq!(lex.classify("School"), Language::Other);
    }

    #[test]
    fn composition_arithmetic() {
        let lex = Lexicon::new(["school"], Vec::<String>::new());
        let stats = vocabulary_composition([("school", 3), ("gida", 5)], &lex);
        assert_eq!(
            stats,
            CompositionStats {
                vocab_size: 2,
                english_vocab_count: 1,
                total_tokens: 8,
                english_token_count: 3
            }
        );
        assert_eq!(stats.english_vocab_ratio(), 0.5);
        assert_eq!(stats.english_token_ratio(), 3.0 / 8.0);
    }

    #[test]
    fn reference_table_counts() {
        let large = CompositionStats {
            vocab_size: 90_451,
            english_vocab_count: 8_584,
            total_tokens: 18_182_511,
            english_token_count: 1_278_069,
        };
        let text = large.to_string();
        assert!(text.contains("No. of English words\t1278069 (7%)"));
        assert!(text.contains("English words\t8584 (9%)"));
        assert!((1.0 / large.english_to_other_token_ratio() - 13.2).abs() < 0.05);

        let small = CompositionStats {
            vocab_size: 4_347,
            english_vocab_count: 1_661,
            total_tokens: 234_779,
            english_token_count: 50_255,
        };
        let text = small.to_string();
        assert!(text.contains("No. of English words\t50255 (21%)"));
        assert!(text.contains("English words\t1661 (38%)"));
        assert!((1.0 / small.english_to_other_token_ratio() - 3.7).abs() < 0.05);
    }

    #[test]
    fn wordlist_reading() {
        let words = read_wordlist(&b"School\n\n  go \n"[..]).unwrap();
        assert_eq!(words, ["school", "go"]);
    }
}
