//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or format error, 4 word not
//! in the vocabulary. Output files are written through a temporary file and
//! renamed, so a failed command never leaves a partial file behind.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::corpus::{clean_corpus, read_corpus};
use crate::lexicon::{read_wordlist, vocabulary_composition, Lexicon, DEFAULT_EXCLUSIONS};
use crate::similarity::{
    evaluate, score_annotations, AnnotationSet, SimilarityError, SimilarityIndex, SimilarityReport,
    DEFAULT_K, DEFAULT_QUERIES,
};
use crate::store::{self, write_atomic};
use crate::train::{train_with_progress, Hyperparameters, Mode};
use crate::vocab::{build_vocab, Vocabulary};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("word {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::OutOfVocabulary(_) => 4,
        }
    }
}

fn data_err<E: std::fmt::Display>(context: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", context.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "hauwe",
    version,
    about = "Hausa word embeddings: clean, train, query, evaluate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cbow,
    Sg,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Cbow => Mode::Cbow,
            ModeArg::Sg => Mode::SkipGram,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a raw text dump (one document per line) into one sentence per line.
    Clean {
        input: PathBuf,
        output: PathBuf,
        /// Also write the statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Train a model on a cleaned corpus. `.bin` output is binary, anything else text.
    Train {
        corpus: PathBuf,
        out_model: PathBuf,
        #[arg(long, value_enum, default_value = "cbow")]
        mode: ModeArg,
        #[arg(long, default_value_t = 300)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 1)]
        min_count: u64,
        #[arg(long, default_value_t = 0.025)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0001)]
        min_alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        sample: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, env = "HAUWE_SEED", default_value_t = 1)]
        seed: u64,
        /// Write the vocabulary (`word<TAB>count`) here as well.
        #[arg(long)]
        vocab_out: Option<PathBuf>,
    },
    /// Print the nearest neighbours of one word.
    Similar {
        model: PathBuf,
        word: String,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Run the neighbour evaluation over a query list.
    Eval {
        model: PathBuf,
        /// `builtin30` or a file with one query per line.
        #[arg(long, default_value = "builtin30")]
        queries: String,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Model label recorded in the report; the file name by default.
        #[arg(long)]
        label: Option<String>,
    },
    /// Score a report against human judgments.
    Score {
        report: PathBuf,
        annotations: PathBuf,
    },
    /// English/other composition of a vocabulary file or model.
    Langstats {
        /// Vocabulary file (`word<TAB>count`), or a `.vec`/`.bin` model.
        input: PathBuf,
        wordlist: PathBuf,
        /// `builtin` or a file with one word per line.
        #[arg(long, default_value = "builtin")]
        exclusions: String,
    },
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(data_err(path))
}

fn write_file<F>(path: &Path, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> io::Result<()>,
{
    write_atomic(path, |f: &mut File| {
        let mut w = BufWriter::new(f);
        write(&mut w)?;
        w.flush()
    })
    .map_err(|e: io::Error| CliError::Data(format!("{}: {e}", path.display())))
}

/// Parses `args` and runs the command, writing results to `out` and
/// progress to `log`.
pub fn run<I, T>(args: I, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(cli.command, out, log)
}

pub fn execute(command: Command, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Data(e.to_string());
    match command {
        Command::Clean {
            input,
            output,
            stats,
        } => {
            let reader = open(&input)?;
            let mut report = None;
            write_file(&output, |w| {
                report = Some(clean_corpus(reader, w)?);
                Ok(())
            })?;
            let report = report.expect("report set on success");
            if let Some(path) = stats {
                let json = serde_json::to_string_pretty(&report).expect("stats serialize");
                write_file(&path, |w| writeln!(w, "{json}"))?;
            }
            out.write_all(report.to_key_value().as_bytes())
                .map_err(io_err)?;
        }
        Command::Train {
            corpus,
            out_model,
            mode,
            dim,
            window,
            epochs,
            negatives,
            min_count,
            alpha,
            min_alpha,
            sample,
            workers,
            seed,
            vocab_out,
        } => {
            let hyper = Hyperparameters {
                dim,
                epochs,
                window,
                min_count,
                negatives,
                alpha0: alpha,
                alpha_min: min_alpha,
                sample,
                workers,
                seed,
                ..Hyperparameters::default()
            };
            hyper
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let sentences = read_corpus(open(&corpus)?).map_err(data_err(&corpus))?;
            let vocab = build_vocab(&sentences, min_count).map_err(data_err(&corpus))?;
            writeln!(
                log,
                "vocab={} tokens={} mode={} dim={} window={} negatives={} epochs={}",
                vocab.len(),
                vocab.total_tokens(),
                Mode::from(mode),
                dim,
                window,
                negatives,
                epochs
            )
            .map_err(io_err)?;
            let (model, _) = train_with_progress(&sentences, vocab, hyper, mode.into(), |e| {
                let _ = writeln!(log, "{e}");
            })
            .map_err(data_err(&corpus))?;
            if let Some(path) = vocab_out {
                write_file(&path, |w| model.vocab.write_to(w))?;
            }
            store::save(&model.word_vectors(), &out_model).map_err(data_err(&out_model))?;
        }
        Command::Similar { model, word, k } => {
            if k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            let vectors = store::load(&model).map_err(data_err(&model))?;
            let neighbors = SimilarityIndex::new(&vectors)
                .most_similar(&word, k)
                .map_err(|e| match e {
                    SimilarityError::OutOfVocabulary(w) => CliError::OutOfVocabulary(w),
                    other => CliError::Data(other.to_string()),
                })?;
            for (rank, n) in neighbors.iter().enumerate() {
                writeln!(out, "{}\t{}\t{:.6}", rank + 1, n.word, n.score).map_err(io_err)?;
            }
        }
        Command::Eval {
            model,
            queries,
            k,
            out: report_path,
            label,
        } => {
            if k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            let queries: Vec<String> = if queries == "builtin30" {
                DEFAULT_QUERIES.iter().map(|q| q.to_string()).collect()
            } else {
                let path = PathBuf::from(&queries);
                read_wordlist(open(&path)?).map_err(data_err(&path))?
            };
            if queries.is_empty() {
                return Err(CliError::Usage("query list is empty".into()));
            }
            let vectors = store::load(&model).map_err(data_err(&model))?;
            let label = label.unwrap_or_else(|| {
                model
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let report = evaluate(&vectors, &queries, k, &label);
            let misses = report.results.iter().filter(|r| !r.found).count();
            if misses > 0 {
                writeln!(
                    log,
                    "{misses} of {} queries not in the vocabulary",
                    queries.len()
                )
                .map_err(io_err)?;
            }
            match report_path {
                Some(path) => write_file(&path, |w| report.write_to(w))?,
                None => report.write_to(&mut *out).map_err(io_err)?,
            }
        }
        Command::Score {
            report,
            annotations,
        } => {
            let parsed = SimilarityReport::read_from(open(&report)?).map_err(data_err(&report))?;
            let ann =
                AnnotationSet::read_from(open(&annotations)?).map_err(data_err(&annotations))?;
            let score = score_annotations(&parsed, &ann).map_err(data_err(&annotations))?;
            out.write_all(score.to_table().as_bytes()).map_err(io_err)?;
        }
        Command::Langstats {
            input,
            wordlist,
            exclusions,
        } => {
            let english = read_wordlist(open(&wordlist)?).map_err(data_err(&wordlist))?;
            let lexicon = if exclusions == "builtin" {
                Lexicon::new(english, DEFAULT_EXCLUSIONS)
            } else {
                let path = PathBuf::from(&exclusions);
                Lexicon::new(
                    english,
                    read_wordlist(open(&path)?).map_err(data_err(&path))?,
                )
            };
            let is_model = input.extension().is_some_and(|e| e == "vec" || e == "bin");
            if is_model {
                let vectors = store::load(&input).map_err(data_err(&input))?;
                let stats = vocabulary_composition(
                    vectors.words().iter().map(|w| (w.as_str(), 1)),
                    &lexicon,
                );
                writeln!(out, "Vocabulary size\t{}", stats.vocab_size).map_err(io_err)?;
                writeln!(
                    out,
                    "English words\t{} ({}%)",
                    stats.english_vocab_count,
                    (stats.english_vocab_ratio() * 100.0).round()
                )
                .map_err(io_err)?;
                writeln!(
                    out,
                    "token-level counts unavailable: model files carry no frequencies"
                )
                .map_err(io_err)?;
            } else {
                let vocab = Vocabulary::read_from(open(&input)?).map_err(data_err(&input))?;
                let stats = vocabulary_composition(
                    vocab.entries().iter().map(|e| (e.word.as_str(), e.count)),
                    &lexicon,
                );
                writeln!(out, "{stats}").map_err(io_err)?;
            }
        }
    }
    Ok(())
}
