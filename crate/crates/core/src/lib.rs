//! Legal case retrieval engine.
//!
//! The pipeline runs in five stages, and each stage has its own module:
//!
//! 1. [`corpus`] loads COLIEE-style and LeCaRD-style case collections into a
//!    normalized [`corpus::Corpus`].
//! 2. [`extraction`] pulls the legal facts and legal issues out of every case.
//! 3. [`encoding`] prefixes those features with prompts, embeds them through an
//!    [`backend::EmbeddingBackend`] and concatenates the dual and cross
//!    embeddings into one case vector.
//! 4. [`retrieval`] ranks candidates with BM25, dot-product similarity, or BM25
//!    followed by a dense rerank.
//! 5. [`eval`] scores TREC run files against binary relevance judgments.

pub mod backend;
pub mod corpus;
pub mod encoding;
pub mod eval;
pub mod extraction;
pub mod hash;
pub mod io;
pub mod retrieval;
pub mod text;

pub use backend::{BackendDescriptor, EmbeddingBackend, EncoderInput};
pub use corpus::{CaseDocument, Corpus, Jurisdiction, Language, RelevanceJudgments};
pub use encoding::{CaseRepresentation, PromptTemplate, ReformulationVariant};
pub use extraction::LegalFeatures;
pub use retrieval::{RankedList, Tokenizer};
