//! BM25, dense and two-stage ranking, plus TREC run I/O.

mod bm25;
mod dense;
mod lexical;
mod ranked;
mod tokenizer;
pub mod trec;

pub use bm25::{idf, term_counts, Bm25Index, Bm25Params};
pub use dense::{dense_retrieve, two_stage_retrieve, TwoStageDepths};
pub use lexical::{bm25_promptcase_text, LexicalText};
pub use ranked::{rank_order, RankedList, Stage};
pub use tokenizer::Tokenizer;

use crate::encoding::RepresentationError;

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("cannot index an empty collection")]
    EmptyCollection,
    #[error("document {0} indexed twice")]
    DuplicateDocument(String),
    #[error("document {0} is not in the index")]
    UnknownDocument(String),
    #[error("query {0} has an empty candidate pool")]
    EmptyPool(String),
    #[error("query {query}: candidate {candidate} listed twice")]
    DuplicateCandidate { query: String, candidate: String },
    #[error("query {query}: candidate {candidate} has a non-finite score")]
    NonFiniteScore { query: String, candidate: String },
    #[error("no representation for query {0}; run encode first")]
    MissingRepresentation(String),
    #[error("invalid depths: k_first={k_first}, k_final={k_final} (need 1 <= k_final <= k_first)")]
    Depths { k_first: usize, k_final: usize },
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error("run file line {line}: {message}")]
    RunFormat { line: usize, message: String },
    #[error("index snapshot: {0}")]
    Snapshot(String),
}
