//! Word-embedding toolkit for Hausa text.
//!
//! The crate covers the whole pipeline: cleaning raw text dumps into
//! tokenized sentences ([`corpus`]), building the vocabulary and noise
//! distribution ([`vocab`]), training CBoW and Skip-Gram models with negative
//! sampling ([`train`]), storing vectors in the common text and binary
//! interchange formats ([`store`]), nearest-neighbour evaluation
//! ([`similarity`]) and vocabulary language composition ([`lexicon`]).

pub mod cli;
pub mod corpus;
pub mod lexicon;
pub mod matrix;
pub mod similarity;
pub mod store;
pub mod train;
pub mod vocab;

pub use corpus::{clean_sentence, CorpusStats, TokenizedSentence};
pub use matrix::Matrix;
pub use store::WordVectors;
pub use train::{EmbeddingModel, Hyperparameters, Mode};
pub use vocab::{Vocabulary, WordId};
