//! CBoW and Skip-Gram training with negative sampling.
//!
//! The update rule is plain SGD on the negative-sampling objective
//!
//! ```text
//! L = -ln σ(v'_t · h) - Σ_i ln σ(-v'_{n_i} · h)
//! ```
//!
//! where `h` is the hidden vector (one context word's input vector for
//! Skip-Gram, the mean of the context input vectors for CBoW), `v'_t` the
//! output vector of the target and `v'_{n_i}` those of the sampled noise
//! words. The learning rate decays linearly in globally processed words.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{DenseRows, Matrix, ParamRows, SharedRows};
use crate::vocab::{
    build_negative_table, keep_probabilities, sample_negative, NegativeTable, Vocabulary, WordId,
    DEFAULT_NS_EXPONENT, DEFAULT_SAMPLE, DEFAULT_TABLE_SIZE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "cbow")]
    Cbow,
    #[serde(rename = "sg")]
    SkipGram,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Cbow => f.write_str("cbow"),
            Mode::SkipGram => f.write_str("sg"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub alpha0: f64,
    pub alpha_min: f64,
    /// Subsampling threshold; `0` disables subsampling.
    pub sample: f64,
    pub ns_exponent: f64,
    pub cbow_mean: bool,
    pub dynamic_window: bool,
    pub workers: usize,
    pub seed: u64,
    pub table_size: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            dim: 300,
            epochs: 5,
            window: 5,
            min_count: 1,
            negatives: 5,
            alpha0: 0.025,
            alpha_min: 0.0001,
            sample: DEFAULT_SAMPLE,
            ns_exponent: DEFAULT_NS_EXPONENT,
            cbow_mean: true,
            dynamic_window: true,
            workers: 1,
            seed: 1,
            table_size: DEFAULT_TABLE_SIZE,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum HyperError {
    #[error("dim must be at least 1")]
    Dim,
    #[error("epochs must be at least 1")]
    Epochs,
    #[error("window must be at least 1")]
    Window,
    #[error("min_count must be at least 1")]
    MinCount,
    #[error("learning rates must satisfy 0 < min_alpha <= alpha (got alpha={alpha0}, min_alpha={alpha_min})")]
    Alpha { alpha0: f64, alpha_min: f64 },
    #[error("sample must be finite and non-negative")]
    Sample,
    #[error("ns_exponent must be finite")]
    NsExponent,
    #[error("workers must be at least 1")]
    Workers,
    #[error("table_size must be at least 1")]
    TableSize,
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), HyperError> {
        if self.dim == 0 {
            return Err(HyperError::Dim);
        }
        if self.epochs == 0 {
            return Err(HyperError::Epochs);
        }
        if self.window == 0 {
            return Err(HyperError::Window);
        }
        if self.min_count == 0 {
            return Err(HyperError::MinCount);
        }
        let alpha_ok = self.alpha_min.is_finite()
            && self.alpha0.is_finite()
            && self.alpha_min > 0.0
            && self.alpha_min <= self.alpha0;
        if !alpha_ok {
            return Err(HyperError::Alpha {
                alpha0: self.alpha0,
                alpha_min: self.alpha_min,
            });
        }
        if !(self.sample.is_finite() && self.sample >= 0.0) {
            return Err(HyperError::Sample);
        }
        if !self.ns_exponent.is_finite() {
            return Err(HyperError::NsExponent);
        }
        if self.workers == 0 {
            return Err(HyperError::Workers);
        }
        if self.table_size == 0 {
            return Err(HyperError::TableSize);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("corpus contains no in-vocabulary tokens")]
    EmptyCorpus,
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error("non-finite parameter after epoch {epoch}")]
    NonFinite { epoch: usize },
}

/// Trained (or freshly initialized) embedding model.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    /// Word vectors, `V x dim`.
    pub input: Matrix<f32>,
    /// Output (context) weights, `V x dim`.
    pub output: Matrix<f32>,
    pub mode: Mode,
    pub hyper: Hyperparameters,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn all_finite(&self) -> bool {
        self.input.all_finite() && self.output.all_finite()
    }
}

/// Input vectors uniform in `[-0.5/dim, 0.5/dim]`, output weights zero.
pub fn init_model(
    vocab: Vocabulary,
    hyper: Hyperparameters,
    mode: Mode,
    seed: u64,
) -> EmbeddingModel {
    let dim = hyper.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 0.5 / dim as f32;
    let data = (0..vocab.len() * dim)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    let input = Matrix::from_vec(vocab.len(), dim, data);
    let output = Matrix::zeros(vocab.len(), dim);
    EmbeddingModel {
        vocab,
        input,
        output,
        mode,
        hyper,
    }
}

/// `max(alpha_min, alpha0 * (1 - processed / (total + 1)))`.
pub fn lr_schedule(words_processed: u64, total_words: u64, hyper: &Hyperparameters) -> f64 {
    let progress = words_processed as f64 / (total_words as f64 + 1.0);
    (hyper.alpha0 * (1.0 - progress)).max(hyper.alpha_min)
}

/// Window radius for one center token: uniform in `1..=window` when
/// `dynamic`, otherwise `window`.
pub fn effective_window<R: Rng + ?Sized>(rng: &mut R, window: usize, dynamic: bool) -> usize {
    if dynamic && window > 1 {
        rng.random_range(1..=window)
    } else {
        window
    }
}

#[inline]
pub fn sigmoid<T: Float>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `-ln σ(x)`, evaluated without overflow.
#[inline]
pub fn neg_log_sigmoid<T: Float>(x: T) -> T {
    if x >= T::zero() {
        (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p() - x
    }
}

/// Loss and exact gradients of one negative-sampling term group.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients<T> {
    pub loss: T,
    pub grad_h: Vec<T>,
    /// `(row id, dL/d row)`, target first, in evaluation order. A row that
    /// appears more than once contributes one entry per appearance.
    pub grad_output: Vec<(WordId, Vec<T>)>,
}

/// Evaluates the negative-sampling loss for hidden vector `h` against
/// `target` (label 1) and `negatives` (label 0), together with its
/// gradients. Parameters are not modified.
pub fn pair_loss_and_grads<T: Float>(
    h: &[T],
    target: WordId,
    negatives: &[WordId],
    output: &Matrix<T>,
) -> PairGradients<T> {
    let mut loss = T::zero();
    let mut grad_h = vec![T::zero(); h.len()];
    let mut grad_output = Vec::with_capacity(1 + negatives.len());
    let labelled =
        std::iter::once((target, T::one())).chain(negatives.iter().map(|&n| (n, T::zero())));
    for (row, label) in labelled {
        let v = output.row(row);
        let score = dot(v, h);
        loss = loss
            + if label > T::zero() {
                neg_log_sigmoid(score)
            } else {
                neg_log_sigmoid(-score)
            };
        let g = sigmoid(score) - label;
        for (gh, &x) in grad_h.iter_mut().zip(v) {
            *gh = *gh + g * x;
        }
        grad_output.push((row, h.iter().map(|&x| g * x).collect()));
    }
    PairGradients {
        loss,
        grad_h,
        grad_output,
    }
}

#[inline]
fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// One in-place SGD step on the output rows.
///
/// Rows are visited target first; each row is read before it is updated,
/// and `neu1e` accumulates `-alpha * dL/dh` to be applied to the input side
/// by the caller. Returns the loss before the step.
pub fn negative_sampling_step<T: Float, P: ParamRows<T>>(
    h: &[T],
    target: WordId,
    negatives: &[WordId],
    output: &mut P,
    alpha: T,
    neu1e: &mut [T],
) -> T {
    let mut loss = T::zero();
    let labelled =
        std::iter::once((target, T::one())).chain(negatives.iter().map(|&n| (n, T::zero())));
    for (row, label) in labelled {
        let score = output.dot(row, h);
        loss = loss
            + if label > T::zero() {
                neg_log_sigmoid(score)
            } else {
                neg_log_sigmoid(-score)
            };
        let g = (label - sigmoid(score)) * alpha;
        output.add_scaled_to(row, g, neu1e);
        output.axpy(row, g, h);
    }
    loss
}

/// Counters from one window update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WindowStats {
    pub loss: f64,
    /// Hidden-vector/target updates performed.
    pub pairs: usize,
    /// Sigmoid terms evaluated (one per target plus one per negative).
    pub terms: usize,
}

impl WindowStats {
    fn add(&mut self, other: WindowStats) {
        self.loss += other.loss;
        self.pairs += other.pairs;
        self.terms += other.terms;
    }
}

/// Scratch buffers and read-only tables for the window kernels.
pub struct WindowTrainer<'t> {
    table: &'t NegativeTable,
    negatives: usize,
    window: usize,
    dynamic_window: bool,
    cbow_mean: bool,
    h: Vec<f32>,
    neu1e: Vec<f32>,
    noise: Vec<WordId>,
}

impl<'t> WindowTrainer<'t> {
    pub fn new(table: &'t NegativeTable, hyper: &Hyperparameters) -> Self {
        WindowTrainer {
            table,
            negatives: hyper.negatives,
            window: hyper.window,
            dynamic_window: hyper.dynamic_window,
            cbow_mean: hyper.cbow_mean,
            h: vec![0.0; hyper.dim],
            neu1e: vec![0.0; hyper.dim],
            noise: Vec::with_capacity(hyper.negatives),
        }
    }

    fn draw_noise<R: Rng + ?Sized>(&mut self, rng: &mut R, target: WordId) {
        self.noise.clear();
        for _ in 0..self.negatives {
            // Exhausted draws are skipped.
            if let Ok(id) = sample_negative(self.table, rng, Some(target)) {
                self.noise.push(id);
            }
        }
    }

    fn context_range<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        len: usize,
        position: usize,
    ) -> (usize, usize) {
        let radius = effective_window(rng, self.window, self.dynamic_window);
        (
            position.saturating_sub(radius),
            (position + radius + 1).min(len),
        )
    }

    /// Skip-Gram: every context word's input vector predicts the center word.
    pub fn train_window_sg<P, R>(
        &mut self,
        sentence: &[WordId],
        position: usize,
        input: &mut P,
        output: &mut P,
        alpha: f32,
        rng: &mut R,
    ) -> WindowStats
    where
        P: ParamRows<f32>,
        R: Rng + ?Sized,
    {
        let mut stats = WindowStats::default();
        let (start, end) = self.context_range(rng, sentence.len(), position);
        let center = sentence[position];
        for (offset, &context) in sentence[start..end].iter().enumerate() {
            if start + offset == position {
                continue;
            }
            input.read_row(context, &mut self.h);
            self.neu1e.fill(0.0);
            self.draw_noise(rng, center);
            let loss = negative_sampling_step(
                &self.h,
                center,
                &self.noise,
                output,
                alpha,
                &mut self.neu1e,
            );
            input.axpy(context, 1.0, &self.neu1e);
            stats.add(WindowStats {
                loss: loss as f64,
                pairs: 1,
                terms: 1 + self.noise.len(),
            });
        }
        stats
    }

    /// CBoW: the mean (or sum) of the context input vectors predicts the
    /// center word; the hidden-vector gradient is spread over the context.
    pub fn train_window_cbow<P, R>(
        &mut self,
        sentence: &[WordId],
        position: usize,
        input: &mut P,
        output: &mut P,
        alpha: f32,
        rng: &mut R,
    ) -> WindowStats
    where
        P: ParamRows<f32>,
        R: Rng + ?Sized,
    {
        let (start, end) = self.context_range(rng, sentence.len(), position);
        let center = sentence[position];
        self.h.fill(0.0);
        let mut count = 0usize;
        for (offset, &context) in sentence[start..end].iter().enumerate() {
            if start + offset != position {
                input.add_scaled_to(context, 1.0, &mut self.h);
                count += 1;
            }
        }
        if count == 0 {
            return WindowStats::default();
        }
        if self.cbow_mean {
            let inv = 1.0 / count as f32;
            self.h.iter_mut().for_each(|x| *x *= inv);
        }
        self.neu1e.fill(0.0);
        self.draw_noise(rng, center);
        let loss =
            negative_sampling_step(&self.h, center, &self.noise, output, alpha, &mut self.neu1e);
        if self.cbow_mean {
            let inv = 1.0 / count as f32;
            self.neu1e.iter_mut().for_each(|x| *x *= inv);
        }
        for (offset, &context) in sentence[start..end].iter().enumerate() {
            if start + offset != position {
                input.axpy(context, 1.0, &self.neu1e);
            }
        }
        WindowStats {
            loss: loss as f64,
            pairs: 1,
            terms: 1 + self.noise.len(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn train_window<P, R>(
        &mut self,
        mode: Mode,
        sentence: &[WordId],
        position: usize,
        input: &mut P,
        output: &mut P,
        alpha: f32,
        rng: &mut R,
    ) -> WindowStats
    where
        P: ParamRows<f32>,
        R: Rng + ?Sized,
    {
        match mode {
            Mode::Cbow => self.train_window_cbow(sentence, position, input, output, alpha, rng),
            Mode::SkipGram => self.train_window_sg(sentence, position, input, output, alpha, rng),
        }
    }
}

/// Skip-Gram window update directly on a model. Returns the summed loss.
pub fn train_window_sg<R: Rng + ?Sized>(
    sentence: &[WordId],
    position: usize,
    model: &mut EmbeddingModel,
    table: &NegativeTable,
    alpha: f32,
    rng: &mut R,
) -> f64 {
    let mut trainer = WindowTrainer::new(table, &model.hyper);
    let mut input = DenseRows::new(&mut model.input);
    let mut output = DenseRows::new(&mut model.output);
    trainer
        .train_window_sg(sentence, position, &mut input, &mut output, alpha, rng)
        .loss
}

/// CBoW window update directly on a model. Returns the loss (0 when the
/// window holds no context word).
pub fn train_window_cbow<R: Rng + ?Sized>(
    sentence: &[WordId],
    position: usize,
    model: &mut EmbeddingModel,
    table: &NegativeTable,
    alpha: f32,
    rng: &mut R,
) -> f64 {
    let mut trainer = WindowTrainer::new(table, &model.hyper);
    let mut input = DenseRows::new(&mut model.input);
    let mut output = DenseRows::new(&mut model.output);
    trainer
        .train_window_cbow(sentence, position, &mut input, &mut output, alpha, rng)
        .loss
}

/// Summary of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Words processed so far, across all epochs.
    pub words: u64,
    /// Learning rate at the end of the epoch.
    pub alpha: f64,
    /// Mean loss per hidden-vector/target update.
    pub mean_loss: f64,
    pub pairs: u64,
}

impl fmt::Display for EpochStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch={} words={} alpha={:.6} mean_loss={:.6}",
            self.epoch, self.words, self.alpha, self.mean_loss
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainingLog {
    pub fn mean_losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }

    /// Mean loss over every update from the first epoch through each epoch,
    /// weighted by the epoch's update count.
    pub fn running_mean_losses(&self) -> Vec<f64> {
        let mut loss = 0.0;
        let mut pairs = 0u64;
        self.epochs
            .iter()
            .map(|e| {
                loss += e.mean_loss * e.pairs as f64;
                pairs += e.pairs;
                if pairs == 0 {
                    0.0
                } else {
                    loss / pairs as f64
                }
            })
            .collect()
    }
}

/// Maps tokens to ids; out-of-vocabulary tokens are dropped.
pub fn encode_corpus<I, S, T>(corpus: I, vocab: &Vocabulary) -> Vec<Vec<u32>>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[T]>,
    T: AsRef<str>,
{
    corpus
        .into_iter()
        .map(|s| {
            s.as_ref()
                .iter()
                .filter_map(|t| vocab.id(t.as_ref()).map(|id| id as u32))
                .collect::<Vec<u32>>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Runs `hyper.epochs` passes of SGD over `corpus`.
pub fn train<I, S, T>(
    corpus: I,
    vocab: Vocabulary,
    hyper: Hyperparameters,
    mode: Mode,
) -> Result<(EmbeddingModel, TrainingLog), TrainError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[T]>,
    T: AsRef<str>,
{
    train_with_progress(corpus, vocab, hyper, mode, |_| {})
}

/// [`train`], calling `progress` after every epoch.
pub fn train_with_progress<I, S, T, F>(
    corpus: I,
    vocab: Vocabulary,
    hyper: Hyperparameters,
    mode: Mode,
    mut progress: F,
) -> Result<(EmbeddingModel, TrainingLog), TrainError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[T]>,
    T: AsRef<str>,
    F: FnMut(&EpochStats),
{
    hyper.validate()?;
    if vocab.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let sentences = encode_corpus(corpus, &vocab);
    let epoch_words: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    if epoch_words == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let total_words = epoch_words * hyper.epochs as u64;
    let table = build_negative_table(&vocab, hyper.ns_exponent, hyper.table_size.max(vocab.len()));
    let keep = keep_probabilities(&vocab, hyper.sample);

    let mut model = init_model(vocab, hyper.clone(), mode, hyper.seed);
    let mut log = TrainingLog::default();
    let processed = AtomicU64::new(0);
    let job = EpochJob {
        sentences: &sentences,
        keep: &keep,
        table: &table,
        hyper: &hyper,
        mode,
        total_words,
        processed: &processed,
    };

    for epoch in 0..hyper.epochs {
        let (loss, pairs) = if hyper.workers == 1 {
            let mut input = DenseRows::new(&mut model.input);
            let mut output = DenseRows::new(&mut model.output);
            let mut rng = worker_rng(hyper.seed, epoch, 0);
            job.run(&sentences, &mut input, &mut output, &mut rng)
        } else {
            let input = SharedRows::new(&mut model.input);
            let output = SharedRows::new(&mut model.output);
            job.run_parallel(epoch, input, output)
        };
        if !(model.input.all_finite() && model.output.all_finite()) {
            return Err(TrainError::NonFinite { epoch: epoch + 1 });
        }
        let words = processed.load(Ordering::Relaxed);
        let stats = EpochStats {
            epoch: epoch + 1,
            words,
            alpha: lr_schedule(words, total_words, &hyper),
            mean_loss: if pairs > 0 { loss / pairs as f64 } else { 0.0 },
            pairs,
        };
        progress(&stats);
        log.epochs.push(stats);
    }
    Ok((model, log))
}

fn worker_rng(seed: u64, epoch: usize, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 32) | worker as u64);
    rng
}

struct EpochJob<'a> {
    sentences: &'a [Vec<u32>],
    keep: &'a [f64],
    table: &'a NegativeTable,
    hyper: &'a Hyperparameters,
    mode: Mode,
    total_words: u64,
    processed: &'a AtomicU64,
}

impl EpochJob<'_> {
    fn run<P: ParamRows<f32>>(
        &self,
        shard: &[Vec<u32>],
        input: &mut P,
        output: &mut P,
        rng: &mut ChaCha8Rng,
    ) -> (f64, u64) {
        let mut trainer = WindowTrainer::new(self.table, self.hyper);
        let mut kept: Vec<WordId> = Vec::new();
        let mut loss = 0.0;
        let mut pairs = 0u64;
        for sentence in shard {
            let done = self.processed.load(Ordering::Relaxed);
            let alpha = lr_schedule(done, self.total_words, self.hyper) as f32;
            kept.clear();
            for &id in sentence {
                let p = self.keep[id as usize];
                if p >= 1.0 || rng.random::<f64>() < p {
                    kept.push(id as WordId);
                }
            }
            for position in 0..kept.len() {
                let stats =
                    trainer.train_window(self.mode, &kept, position, input, output, alpha, rng);
                loss += stats.loss;
                pairs += stats.pairs as u64;
            }
            self.processed
                .fetch_add(sentence.len() as u64, Ordering::Relaxed);
        }
        (loss, pairs)
    }

    fn run_parallel(
        &self,
        epoch: usize,
        input: SharedRows<'_>,
        output: SharedRows<'_>,
    ) -> (f64, u64) {
        let workers = self.hyper.workers;
        let chunk = self.sentences.len().div_ceil(workers).max(1);
        let totals = Mutex::new((0.0f64, 0u64));
        std::thread::scope(|scope| {
            for (worker, shard) in self.sentences.chunks(chunk).enumerate() {
                let totals = &totals;
                scope.spawn(move || {
                    let mut input = input;
                    let mut output = output;
                    let mut rng = worker_rng(self.hyper.seed, epoch, worker);
                    let (loss, pairs) = self.run(shard, &mut input, &mut output, &mut rng);
                    let mut t = totals.lock().expect("loss accumulator poisoned");
                    t.0 += loss;
                    t.1 += pairs;
                });
            }
        });
        totals.into_inner().expect("loss accumulator poisoned")
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::vocab::build_vocab;

    fn small_hyper(dim: usize) -> Hyperparameters {
        Hyperparameters {
            dim,
            table_size: 1000,
            ..Hyperparameters::default()
        }
    }

    fn toy_vocab() -> Vocabulary {
        build_vocab([["a", "b", "c", "d", "e", "a", "b", "a"]], 1).unwrap()
    }

    #[test]
    fn defaults_match_training_regime() {
        let h = Hyperparameters::default();
        assert_eq!(
            (h.dim, h.window, h.negatives, h.epochs, h.min_count),
            (300, 5, 5, 5, 1)
        );
        assert_eq!(h.alpha0, 0.025);
        assert_eq!(h.alpha_min, 0.0001);
        assert!(h.validate().is_ok());
    }

    #[test]
    fn hyper_validation() {
        let bad = |f: fn(&mut Hyperparameters)| {
            let mut h = Hyperparameters::default();
            f(&mut h);
            h.validate()
        };
        assert_eq!(bad(|h| h.dim = 0), Err(HyperError::Dim));
        assert_eq!(bad(|h| h.epochs = 0), Err(HyperError::Epochs));
        assert_eq!(bad(|h| h.window = 0), Err(HyperError::Window));
        assert!(matches!(
            bad(|h| h.alpha_min = 0.0),
            Err(HyperError::Alpha { .. })
        ));
        assert!(matches!(
            bad(|h| h.alpha_min = 0.5),
            Err(HyperError::Alpha { .. })
        ));
        assert_eq!(bad(|h| h.workers = 0), Err(HyperError::Workers));
        assert!(bad(|h| h.negatives = 0).is_ok());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let h = small_hyper(300);
        let a = init_model(toy_vocab(), h.clone(), Mode::Cbow, 9);
        let b = init_model(toy_vocab(), h.clone(), Mode::Cbow, 9);
        assert_eq!(a.input, b.input);
        let bound = 0.5 / 300.0;
        assert!(a.input.as_slice().iter().all(|v| v.abs() <= bound));
        assert!(a.output.as_slice().iter().all(|&v| v == 0.0));
        let c = init_model(toy_vocab(), h, Mode::Cbow, 10);
        assert_ne!(a.input, c.input);
    }

    #[test]
    fn schedule_endpoints() {
        let h = Hyperparameters::default();
        let total = 1_000_000;
        assert_eq!(lr_schedule(0, total, &h), 0.025);
        assert_eq!(lr_schedule(total, total, &h), 0.0001);
        let half = lr_schedule(total / 2, total, &h);
        assert!((half - 0.0125).abs() < 1e-6);
        let mut prev = f64::INFINITY;
        for p in (0..=total).step_by(10_007) {
            let a = lr_schedule(p, total, &h);
            assert!(a <= prev && (h.alpha_min..=h.alpha0).contains(&a));
            prev = a;
        }
    }

    #[test]
    fn window_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..100).all(|_| effective_window(&mut rng, 1, true) == 1));
        assert!((0..100).all(|_| effective_window(&mut rng, 5, false) == 5));
        let n = 100_000;
        let mut hist = [0usize; 6];
        for _ in 0..n {
            hist[effective_window(&mut rng, 5, true)] += 1;
        }
        assert_eq!(hist[0], 0);
        for &c in &hist[1..] {
            assert!((c as f64 / n as f64 - 0.2).abs() < 0.01);
        }
    }

    #[test]
    fn log_sigmoid_stable() {
        assert!((neg_log_sigmoid(0.0f64) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(neg_log_sigmoid(-800.0f64).is_finite());
        assert!((neg_log_sigmoid(-800.0f64) - 800.0).abs() < 1e-9);
        assert!(neg_log_sigmoid(800.0f64) >= 0.0);
    }

    #[test]
    fn zero_scores_give_ln2_per_term() {
        let output = Matrix::<f64>::zeros(6, 4);
        let h = [0.3, -0.1, 0.2, 0.9];
        let g = pair_loss_and_grads(&h, 0, &[1, 2, 3, 4, 5], &output);
        assert!((g.loss - 6.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(g.grad_output.len(), 6);
        // gradient of target row is (σ(0) - 1) h
        assert!((g.grad_output[0].1[0] - (-0.5 * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn in_place_step_follows_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = 8;
        let data: Vec<f64> = (0..6 * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let output = Matrix::from_vec(6, dim, data);
        let h: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let negs = [1, 3, 5];
        let alpha = 0.01;

        let grads = pair_loss_and_grads(&h, 2, &negs, &output);
        let mut stepped = output.clone();
        let mut neu1e = vec![0.0; dim];
        let loss = negative_sampling_step(
            &h,
            2,
            &negs,
            &mut DenseRows::new(&mut stepped),
            alpha,
            &mut neu1e,
        );
        assert!((loss - grads.loss).abs() < 1e-12);
        for (a, b) in neu1e.iter().zip(&grads.grad_h) {
            assert!((a + alpha * b).abs() < 1e-12);
        }
        for (row, g) in &grads.grad_output {
            for j in 0..dim {
                let expected = output.row(*row)[j] - alpha * g[j];
                assert!((stepped.row(*row)[j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sgd_step_reduces_pair_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dim = 8;
        let data: Vec<f64> = (0..4 * dim).map(|_| rng.random_range(-0.5..0.5)).collect();
        let mut output = Matrix::from_vec(4, dim, data);
        let mut h: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
        let before = pair_loss_and_grads(&h, 0, &[1, 2], &output).loss;
        let mut neu1e = vec![0.0; dim];
        negative_sampling_step(
            &h,
            0,
            &[1, 2],
            &mut DenseRows::new(&mut output),
            0.01,
            &mut neu1e,
        );
        for (x, d) in h.iter_mut().zip(&neu1e) {
            *x += d;
        }
        let after = pair_loss_and_grads(&h, 0, &[1, 2], &output).loss;
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn one_word_sentence_has_no_updates() {
        let vocab = toy_vocab();
        let table = build_negative_table(&vocab, 0.75, 100);
        let mut model = init_model(vocab, small_hyper(4), Mode::SkipGram, 1);
        let before = model.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            train_window_sg(&[0], 0, &mut model, &table, 0.025, &mut rng),
            0.0
        );
        assert_eq!(
            train_window_cbow(&[0], 0, &mut model, &table, 0.025, &mut rng),
            0.0
        );
        assert_eq!(model.input, before.input);
        assert_eq!(model.output, before.output);
    }

    #[test]
    fn sg_term_count() {
        let vocab = toy_vocab();
        let table = build_negative_table(&vocab, 0.75, 1000);
        let hyper = Hyperparameters {
            window: 1,
            ..small_hyper(4)
        };
        let mut model = init_model(vocab, hyper.clone(), Mode::SkipGram, 1);
        let mut trainer = WindowTrainer::new(&table, &hyper);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut input = DenseRows::new(&mut model.input);
        let mut output = DenseRows::new(&mut model.output);
        let stats =
            trainer.train_window_sg(&[1, 0, 2], 1, &mut input, &mut output, 0.025, &mut rng);
        assert_eq!(stats.pairs, 2);
        assert_eq!(stats.terms, 2 * (1 + 5));
    }

    #[test]
    fn cbow_single_context_matches_sg() {
        let vocab = toy_vocab();
        let table = build_negative_table(&vocab, 0.75, 1000);
        let hyper = small_hyper(6);
        let mut sg = init_model(vocab, hyper, Mode::SkipGram, 4);
        for v in sg.output.as_mut_slice() {
            *v = 0.01;
        }
        let mut cbow = sg.clone();
        let l1 = train_window_sg(
            &[3, 1],
            1,
            &mut sg,
            &table,
            0.05,
            &mut ChaCha8Rng::seed_from_u64(8),
        );
        let l2 = train_window_cbow(
            &[3, 1],
            1,
            &mut cbow,
            &table,
            0.05,
            &mut ChaCha8Rng::seed_from_u64(8),
        );
        assert_eq!(l1, l2);
        assert_eq!(sg.input, cbow.input);
        assert_eq!(sg.output, cbow.output);
    }

    #[test]
    fn cbow_redistribution_sums_to_hidden_update() {
        for mean in [true, false] {
            let vocab = toy_vocab();
            let table = build_negative_table(&vocab, 0.75, 1000);
            let hyper = Hyperparameters {
                window: 2,
                negatives: 3,
                dynamic_window: false,
                cbow_mean: mean,
                ..small_hyper(5)
            };
            let mut model = init_model(vocab, hyper.clone(), Mode::Cbow, 6);
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            for v in model.output.as_mut_slice() {
                *v = rng.random_range(-0.3..0.3);
            }
            let sentence = [1usize, 2, 0, 3, 4];
            let before = model.clone();

            // Repeated noise rows see their own earlier update, which the
            // closed-form gradient does not model; pick a draw without repeats.
            let mut trainer = WindowTrainer::new(&table, &hyper);
            let mut seed = 21;
            let noise = loop {
                model = before.clone();
                let mut draw_rng = ChaCha8Rng::seed_from_u64(seed);
                let mut input = DenseRows::new(&mut model.input);
                let mut output = DenseRows::new(&mut model.output);
                trainer.train_window_cbow(
                    &sentence,
                    2,
                    &mut input,
                    &mut output,
                    0.1,
                    &mut draw_rng,
                );
                let mut sorted = trainer.noise.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() == trainer.noise.len() {
                    break trainer.noise.clone();
                }
                seed += 1;
            };

            let ctx = [1usize, 2, 3, 4];
            let dim = 5;
            let mut h = vec![0.0f64; dim];
            for &c in &ctx {
                for j in 0..dim {
                    h[j] += before.input.row(c)[j] as f64;
                }
            }
            if mean {
                h.iter_mut().for_each(|x| *x /= ctx.len() as f64);
            }
            let out64 = Matrix::from_vec(
                before.output.rows(),
                dim,
                before.output.as_slice().iter().map(|&v| v as f64).collect(),
            );
            let grads = pair_loss_and_grads(&h, 0, &noise, &out64);
            let mut total_delta = vec![0.0f64; dim];
            for &c in &ctx {
                for j in 0..dim {
                    total_delta[j] += (model.input.row(c)[j] - before.input.row(c)[j]) as f64;
                }
            }
            let scale = if mean { 1.0 } else { ctx.len() as f64 };
            for j in 0..dim {
                let expected = -0.1 * grads.grad_h[j] * scale;
                assert!((total_delta[j] - expected).abs() < 1e-6, "mean={mean}");
            }
        }
    }

    #[test]
    fn zero_negatives_trains() {
        let corpus = vec![vec!["a", "b", "c", "d"]; 20];
        let vocab = build_vocab(&corpus, 1).unwrap();
        let hyper = Hyperparameters {
            negatives: 0,
            ..small_hyper(8)
        };
        let (model, log) = train(&corpus, vocab, hyper, Mode::SkipGram).unwrap();
        assert!(model.all_finite());
        assert_eq!(log.epochs.len(), 5);
    }

    #[test]
    fn single_worker_is_reproducible() {
        let corpus: Vec<Vec<String>> = (0..50)
            .map(|i| {
                (0..6)
                    .map(|j| format!("w{}", (i * 7 + j * 3) % 13))
                    .collect()
            })
            .collect();
        for mode in [Mode::Cbow, Mode::SkipGram] {
            let run = || {
                let vocab = build_vocab(&corpus, 1).unwrap();
                train(&corpus, vocab, small_hyper(16), mode).unwrap()
            };
            let (a, la) = run();
            let (b, lb) = run();
            assert_eq!(a.input, b.input);
            assert_eq!(a.output, b.output);
            assert_eq!(la, lb);
        }
    }

    #[test]
    fn multi_worker_runs() {
        let corpus: Vec<Vec<String>> = (0..200)
            .map(|i| {
                (0..6)
                    .map(|j| format!("w{}", (i * 7 + j * 3) % 13))
                    .collect()
            })
            .collect();
        let vocab = build_vocab(&corpus, 1).unwrap();
        let hyper = Hyperparameters {
            workers: 4,
            ..small_hyper(16)
        };
        let (model, log) = train(&corpus, vocab, hyper, Mode::SkipGram).unwrap();
        assert!(model.all_finite());
        let total: u64 = corpus.iter().map(|s| s.len() as u64).sum();
        assert_eq!(log.epochs.last().unwrap().words, 5 * total);
    }

    #[test]
    fn empty_corpus_rejected() {
        let vocab = toy_vocab();
        let empty: Vec<Vec<&str>> = vec![vec!["zzz"]];
        assert!(matches!(
            train(&empty, vocab, small_hyper(4), Mode::Cbow),
            Err(TrainError::EmptyCorpus)
        ));
    }

    #[test]
    fn progress_line_format() {
        let s = EpochStats {
            epoch: 2,
            words: 100,
            alpha: 0.0125,
            mean_loss: 1.5,
            pairs: 10,
        };
        assert_eq!(
            s.to_string(),
            "epoch=2 words=100 alpha=0.012500 mean_loss=1.500000"
        );
    }

    #[test]
    fn running_mean_weights_by_pairs() {
        let stats = |mean_loss, pairs| EpochStats {
            epoch: 1,
            words: 0,
            alpha: 0.0,
            mean_loss,
            pairs,
        };
        let log = TrainingLog {
            epochs: vec![stats(4.0, 1), stats(1.0, 3), stats(2.0, 0)],
        };
        assert_eq!(log.running_mean_losses(), [4.0, 1.75, 1.75]);
    }
}
