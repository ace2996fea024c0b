//! Word-vector persistence in the word2vec text (`.vec`) and binary (`.bin`)
//! layouts.
//!
//! Text: a `"V dim"` header line, then one `word f1 ... fdim` line per word.
//! Binary: the same ASCII header terminated by `\n`, then for every word its
//! UTF-8 bytes, one space, and `dim` little-endian IEEE-754 `f32` values.
//! Only input vectors are stored.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, ErrorKind, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::train::EmbeddingModel;
use crate::vocab::WordId;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("record {record}: expected {expected} values, found {found}")]
    DimensionMismatch {
        record: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate word {0:?}")]
    DuplicateWord(String),
    #[error("header declares {expected} records, file holds {found}")]
    RecordCount { expected: usize, found: usize },
    #[error("record {record}: malformed value {value:?}")]
    MalformedValue { record: usize, value: String },
    #[error("file truncated in record {record}")]
    TruncatedFile { record: usize },
    #[error("word {0:?} cannot be stored (empty, or contains whitespace)")]
    InvalidWord(String),
    #[error("record {record}: word is not valid UTF-8")]
    InvalidUtf8 { record: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Words with one vector each, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    words: Vec<String>,
    index: HashMap<String, WordId>,
    matrix: Matrix<f32>,
}

impl WordVectors {
    pub fn new(words: Vec<String>, matrix: Matrix<f32>) -> Result<Self, StoreError> {
        if words.len() != matrix.rows() {
            return Err(StoreError::RecordCount {
                expected: matrix.rows(),
                found: words.len(),
            });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (id, w) in words.iter().enumerate() {
            if index.insert(w.clone(), id).is_some() {
                return Err(StoreError::DuplicateWord(w.clone()));
            }
        }
        Ok(WordVectors {
            words,
            index,
            matrix,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id]
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, id: WordId) -> &[f32] {
        self.matrix.row(id)
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.id(word).map(|id| self.vector(id))
    }

    pub fn matrix(&self) -> &Matrix<f32> {
        &self.matrix
    }

    /// Same words, every value multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> WordVectors {
        let data = self.matrix.as_slice().iter().map(|v| v * factor).collect();
        WordVectors {
            words: self.words.clone(),
            index: self.index.clone(),
            matrix: Matrix::from_vec(self.matrix.rows(), self.matrix.cols(), data),
        }
    }
}

impl EmbeddingModel {
    /// Input vectors keyed by vocabulary words.
    pub fn word_vectors(&self) -> WordVectors {
        let words = self
            .vocab
            .entries()
            .iter()
            .map(|e| e.word.clone())
            .collect();
        WordVectors::new(words, self.input.clone()).expect("vocabulary words are unique")
    }
}

fn check_word(word: &str) -> Result<(), StoreError> {
    if word.is_empty() || word.chars().any(char::is_whitespace) {
        return Err(StoreError::InvalidWord(word.to_owned()));
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(usize, usize), StoreError> {
    let bad = || StoreError::MalformedHeader(line.trim_end().to_owned());
    let mut fields = line.split_ascii_whitespace();
    let rows = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let dim = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if fields.next().is_some() {
        return Err(bad());
    }
    Ok((rows, dim))
}

/// Writes the text format. `f32` values use the shortest representation
/// that parses back to the same bits.
pub fn write_text<W: Write>(vectors: &WordVectors, out: W) -> Result<(), StoreError> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{} {}", vectors.len(), vectors.dim())?;
    for (word, row) in vectors.words.iter().zip(vectors.matrix.iter_rows()) {
        check_word(word)?;
        out.write_all(word.as_bytes())?;
        for v in row {
            write!(out, " {}", v)?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_text<R: BufRead>(mut input: R) -> Result<WordVectors, StoreError> {
    let mut header = String::new();
    if input.read_line(&mut header)? == 0 {
        return Err(StoreError::MalformedHeader(String::new()));
    }
    let (rows, dim) = parse_header(&header)?;
    let mut words = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    let mut found = 0;
    for line in input.lines() {
        let line = line?;
        let mut fields = line.split_ascii_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        found += 1;
        if found > rows {
            continue;
        }
        let start = data.len();
        for field in fields {
            let v: f32 = field.parse().map_err(|_| StoreError::MalformedValue {
                record: found,
                value: field.to_owned(),
            })?;
            data.push(v);
        }
        if data.len() - start != dim {
            return Err(StoreError::DimensionMismatch {
                record: found,
                expected: dim,
                found: data.len() - start,
            });
        }
        words.push(word.to_owned());
    }
    if found != rows {
        return Err(StoreError::RecordCount {
            expected: rows,
            found,
        });
    }
    WordVectors::new(words, Matrix::from_vec(rows, dim, data))
}

pub fn write_binary<W: Write>(vectors: &WordVectors, out: W) -> Result<(), StoreError> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{} {}", vectors.len(), vectors.dim())?;
    for (word, row) in vectors.words.iter().zip(vectors.matrix.iter_rows()) {
        check_word(word)?;
        out.write_all(word.as_bytes())?;
        out.write_all(b" ")?;
        for &v in row {
            out.write_f32::<LittleEndian>(v)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads the binary format. A newline before a word (as written by the
/// original C tool after every vector) is skipped.
pub fn read_binary<R: BufRead>(mut input: R) -> Result<WordVectors, StoreError> {
    let mut header = Vec::new();
    input.read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(StoreError::MalformedHeader(
            String::from_utf8_lossy(&header).into_owned(),
        ));
    }
    let header = String::from_utf8(header).map_err(|e| {
        StoreError::MalformedHeader(String::from_utf8_lossy(e.as_bytes()).into_owned())
    })?;
    let (rows, dim) = parse_header(&header)?;

    let mut words = Vec::with_capacity(rows);
    let mut data = vec![0f32; rows * dim];
    let mut raw = Vec::new();
    for record in 0..rows {
        raw.clear();
        input.read_until(b' ', &mut raw)?;
        if raw.pop() != Some(b' ') {
            return Err(StoreError::TruncatedFile { record: record + 1 });
        }
        let start = raw.iter().position(|&b| b != b'\n').unwrap_or(raw.len());
        let word = std::str::from_utf8(&raw[start..])
            .map_err(|_| StoreError::InvalidUtf8 { record: record + 1 })?;
        check_word(word)?;
        words.push(word.to_owned());
        input
            .read_f32_into::<LittleEndian>(&mut data[record * dim..(record + 1) * dim])
            .map_err(|e| match e.kind() {
                ErrorKind::UnexpectedEof => StoreError::TruncatedFile { record: record + 1 },
                _ => StoreError::Io(e),
            })?;
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if rest.iter().any(|b| !b.is_ascii_whitespace()) {
        return Err(StoreError::RecordCount {
            expected: rows,
            found: rows + 1,
        });
    }
    WordVectors::new(words, Matrix::from_vec(rows, dim, data))
}

/// Writes to `path` through a temporary file in the same directory, renamed
/// into place only after `write` succeeds.
pub fn write_atomic<P, F, E>(path: P, write: F) -> Result<(), E>
where
    P: AsRef<Path>,
    F: FnOnce(&mut File) -> Result<(), E>,
    E: From<io::Error>,
{
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    write(tmp.as_file_mut())?;
    tmp.as_file_mut().sync_all()?;
    tmp.persist(path).map_err(|e| E::from(e.error))?;
    Ok(())
}

pub fn save_text<P: AsRef<Path>>(vectors: &WordVectors, path: P) -> Result<(), StoreError> {
    write_atomic(path, |f| write_text(vectors, f))
}

pub fn load_text<P: AsRef<Path>>(path: P) -> Result<WordVectors, StoreError> {
    read_text(BufReader::new(File::open(path)?))
}

pub fn save_binary<P: AsRef<Path>>(vectors: &WordVectors, path: P) -> Result<(), StoreError> {
    write_atomic(path, |f| write_binary(vectors, f))
}

pub fn load_binary<P: AsRef<Path>>(path: P) -> Result<WordVectors, StoreError> {
    read_binary(BufReader::new(File::open(path)?))
}

/// Picks the format from the extension: `.bin` is binary, anything else text.
pub fn is_binary_path<P: AsRef<Path>>(path: P) -> bool {
    path.as_ref().extension().is_some_and(|e| e == "bin")
}

pub fn save<P: AsRef<Path>>(vectors: &WordVectors, path: P) -> Result<(), StoreError> {
    if is_binary_path(&path) {
        save_binary(vectors, path)
    } else {
        save_text(vectors, path)
    }
}

pub fn load<P: AsRef<Path>>(path: P) -> Result<WordVectors, StoreError> {
    if is_binary_path(&path) {
        load_binary(path)
    } else {
        load_text(path)
    }
}

/// Unit-length copy of a set of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedVectors {
    pub matrix: Matrix<f32>,
    /// Rows whose norm was zero; they stay zero.
    pub zero_rows: Vec<WordId>,
}

pub fn normalize(vectors: &WordVectors) -> NormalizedVectors {
    let mut matrix = vectors.matrix.clone();
    let mut zero_rows = Vec::new();
    for r in 0..matrix.rows() {
        let row = matrix.row_mut(r);
        let norm = row
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            zero_rows.push(r);
            continue;
        }
        for v in row.iter_mut() {
            *v = (*v as f64 / norm) as f32;
        }
    }
    NormalizedVectors { matrix, zero_rows }
}
