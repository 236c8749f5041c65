//! Embedding backends: a hashed bag-of-words mock, a JSONL file store, an HTTP
//! client for a remote encoder service, and a content-addressed cache.

mod cache;
pub mod contract;
mod file;
mod mock;
pub(crate) mod remote;

use serde::{Deserialize, Serialize};

pub use cache::{cache_get_or_embed, cache_key, CachedBackend, CountingBackend, EmbeddingCache};
pub use file::FileBackend;
pub use mock::{mock_embed, mock_tokens, truncate_budget, MockBackend, SEGMENT_MARKER};
pub use remote::{RemoteBackend, RemoteConfig, RetryPolicy, ENV_EMBED_TIMEOUT_MS, ENV_EMBED_URL};

/// Text handed to an encoder: one segment for dual encoding, two for cross
/// encoding. Special tokens are added by the backend, never here.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncoderInput {
    pub segments: Vec<String>,
}

impl EncoderInput {
    pub fn single(text: impl Into<String>) -> Self {
        EncoderInput {
            segments: vec![text.into()],
        }
    }

    pub fn pair(first: impl Into<String>, second: impl Into<String>) -> Self {
        EncoderInput {
            segments: vec![first.into(), second.into()],
        }
    }

    pub fn is_cross(&self) -> bool {
        self.segments.len() == 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub name: String,
    pub version: String,
    pub dim: usize,
    pub max_tokens: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("empty input batch")]
    EmptyBatch,
    #[error("input {index} has {segments} segments; expected 1 or 2")]
    InvalidInput { index: usize, segments: usize },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("transport failure after {attempts} attempts for inputs {failed:?}: {message}")]
    Transport {
        failed: Vec<usize>,
        attempts: usize,
        message: String,
    },
    #[error("request rejected with status {status}: {message}")]
    Rejected { status: u16, message: String },
    #[error("no stored vector for inputs {0:?}")]
    Missing(Vec<usize>),
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

/// A source of fixed-dimension sentence vectors.
///
/// Implementations must be deterministic for a fixed descriptor version and
/// safe to call from several threads at once.
pub trait EmbeddingBackend: Send + Sync {
    fn descriptor(&self) -> &BackendDescriptor;

    /// Raw embedding call. Callers should go through [`embed_batch`], which
    /// checks the response against the descriptor.
    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError>;
}

impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for &B {
    fn descriptor(&self) -> &BackendDescriptor {
        (**self).descriptor()
    }

    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        (**self).embed(inputs)
    }
}

impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for Box<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        (**self).descriptor()
    }

    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        (**self).embed(inputs)
    }
}

impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for std::sync::Arc<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        (**self).descriptor()
    }

    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        (**self).embed(inputs)
    }
}

pub(crate) fn check_inputs(inputs: &[EncoderInput]) -> Result<(), BackendError> {
    if inputs.is_empty() {
        return Err(BackendError::EmptyBatch);
    }
    for (index, input) in inputs.iter().enumerate() {
        if !(1..=2).contains(&input.segments.len()) {
            return Err(BackendError::InvalidInput {
                index,
                segments: input.segments.len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn check_vectors(
    descriptor: &BackendDescriptor,
    expected: usize,
    vectors: &[Vec<f32>],
) -> Result<(), BackendError> {
    if vectors.len() != expected {
        return Err(BackendError::Malformed(format!(
            "count mismatch ({} vectors for {expected} inputs)",
            vectors.len()
        )));
    }
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != descriptor.dim {
            return Err(BackendError::Malformed(format!(
                "vector {i} has dim {}, descriptor declares {}",
                v.len(),
                descriptor.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(BackendError::Malformed(format!("vector {i} has non-finite components")));
        }
    }
    Ok(())
}

/// Embeds `inputs`, returning one vector per input in order.
pub fn embed_batch<B: EmbeddingBackend + ?Sized>(
    backend: &B,
    inputs: &[EncoderInput],
) -> Result<Vec<Vec<f32>>, BackendError> {
    check_inputs(inputs)?;
    let vectors = backend.embed(inputs)?;
    check_vectors(backend.descriptor(), inputs.len(), &vectors)?;
    Ok(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Short(BackendDescriptor);

    impl EmbeddingBackend for Short {
        fn descriptor(&self) -> &BackendDescriptor {
            &self.0
        }

        fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
            Ok(vec![vec![0.0; self.0.dim]; inputs.len() - 1])
        }
    }

    fn short() -> Short {
        Short(BackendDescriptor {
            name: "short".into(),
            version: "0".into(),
            dim: 2,
            max_tokens: 16,
        })
    }

    #[test]
    fn count_mismatch_is_malformed() {
        let inputs = vec![EncoderInput::single("x"); 4];
        let err = embed_batch(&short(), &inputs).unwrap_err();
        assert!(err.to_string().starts_with("malformed response: count mismatch"), "{err}");
    }

    #[test]
    fn empty_batch_rejected() {
        assert!(matches!(embed_batch(&short(), &[]), Err(BackendError::EmptyBatch)));
    }

    #[test]
    fn segment_count_checked() {
        let bad = EncoderInput {
            segments: vec!["a".into(), "b".into(), "c".into()],
        };
        assert!(matches!(
            embed_batch(&short(), &[bad]),
            Err(BackendError::InvalidInput { index: 0, segments: 3 })
        ));
    }
}
