use std::sync::atomic::{AtomicUsize, Ordering};

use super::{BackendDescriptor, BackendError, EmbeddingBackend, EncoderInput};
use crate::hash::seeded_hash;
use crate::text::is_cjk;

/// Token placed between the two segments of a cross input.
pub const SEGMENT_MARKER: &str = "[SEP]";

/// Whitespace tokens, with every CJK character split out as its own token.
pub fn mock_tokens(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut start = 0;
        for (i, c) in word.char_indices() {
            if is_cjk(c) {
                if start < i {
                    out.push(&word[start..i]);
                }
                let end = i + c.len_utf8();
                out.push(&word[i..end]);
                start = end;
            }
        }
        if start < word.len() {
            out.push(&word[start..]);
        }
    }
    out
}

fn embed_tokens(segments: &[Vec<&str>], dim: usize, seed: u64) -> Vec<f32> {
    let mut acc = vec![0f64; dim];
    let mut count = 0usize;
    for (i, seg) in segments.iter().enumerate() {
        if i > 0 {
            acc[(seeded_hash(SEGMENT_MARKER, seed) % dim as u64) as usize] += 1.0;
            count += 1;
        }
        for t in seg {
            acc[(seeded_hash(t, seed) % dim as u64) as usize] += 1.0;
            count += 1;
        }
    }
    let scale = 1.0 / ((1 + count) as f64).sqrt();
    acc.into_iter().map(|x| (x * scale) as f32).collect()
}

/// Deterministic hashed bag-of-words vector, without truncation.
///
/// Each token adds one at `seeded_hash(token, seed) % dim`; the result is
/// scaled by `1/sqrt(1 + n)` where `n` counts tokens plus the segment marker.
pub fn mock_embed(input: &EncoderInput, dim: usize, seed: u64) -> Vec<f32> {
    assert!(dim >= 1, "dim must be positive");
    let segments: Vec<Vec<&str>> = input.segments.iter().map(|s| mock_tokens(s)).collect();
    embed_tokens(&segments, dim, seed)
}

/// Splits a cross-input budget between two segments of `a` and `b` tokens.
///
/// Half the budget goes to each side; whatever one side leaves unused is
/// handed to the other.
pub fn truncate_budget(a: usize, b: usize, budget: usize) -> (usize, usize) {
    if a + b <= budget {
        return (a, b);
    }
    let half = budget / 2;
    if a <= half {
        (a, budget - a)
    } else if b <= half {
        (budget - b, b)
    } else {
        (budget - half, half)
    }
}

/// Offline backend built on [`mock_embed`]. Truncates to `max_tokens` the way
/// a BERT-style encoder would: two special slots for single inputs, three for
/// pairs.
#[derive(Debug)]
pub struct MockBackend {
    descriptor: BackendDescriptor,
    seed: u64,
    calls: AtomicUsize,
    embedded: AtomicUsize,
}

impl MockBackend {
    pub const NAME: &'static str = "mock";

    pub fn new(dim: usize, seed: u64) -> Self {
        Self::with_max_tokens(dim, seed, 512)
    }

    pub fn with_max_tokens(dim: usize, seed: u64, max_tokens: usize) -> Self {
        assert!(dim >= 1, "dim must be positive");
        assert!(max_tokens >= 3, "max_tokens must leave room for special tokens");
        MockBackend {
            descriptor: BackendDescriptor {
                name: Self::NAME.to_string(),
                version: format!("fnv-bow-1 dim={dim} seed={seed}"),
                dim,
                max_tokens,
            },
            seed,
            calls: AtomicUsize::new(0),
            embedded: AtomicUsize::new(0),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of `embed` calls so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    /// Number of inputs embedded so far.
    pub fn inputs_embedded(&self) -> usize {
        self.embedded.load(Ordering::Relaxed)
    }

    fn embed_one(&self, input: &EncoderInput) -> Vec<f32> {
        let max = self.descriptor.max_tokens;
        let mut segments: Vec<Vec<&str>> = input.segments.iter().map(|s| mock_tokens(s)).collect();
        if let [only] = segments.as_mut_slice() {
            only.truncate(max - 2);
        } else if let [a, b] = segments.as_mut_slice() {
            let (ka, kb) = truncate_budget(a.len(), b.len(), max - 3);
            a.truncate(ka);
            b.truncate(kb);
        }
        embed_tokens(&segments, self.descriptor.dim, self.seed)
    }
}

impl EmbeddingBackend for MockBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        super::check_inputs(inputs)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.embedded.fetch_add(inputs.len(), Ordering::Relaxed);
        Ok(inputs.iter().map(|i| self.embed_one(i)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::embed_batch;

    #[test]
    fn repeated_token_bucket() {
        let v = mock_embed(&EncoderInput::single("a a"), 8, 0);
        let expected = (2.0f64 / 3f64.sqrt()) as f32;
        assert_eq!(v[4], expected);
        assert_eq!(v[4], 1.154_700_5_f32);
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 1);
        let v7 = mock_embed(&EncoderInput::single("a a"), 8, 7);
        assert_eq!(v7[1], expected);
    }

    #[test]
    fn empty_text_is_zero() {
        assert!(mock_embed(&EncoderInput::single(""), 16, 0).iter().all(|x| *x == 0.0));
        assert!(mock_embed(&EncoderInput::single("  \n "), 16, 0).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn segment_boundary_matters() {
        let joined = mock_embed(&EncoderInput::single("a b"), 64, 0);
        let split = mock_embed(&EncoderInput::pair("a", "b"), 64, 0);
        assert_ne!(joined, split);
    }

    #[test]
    fn empty_pair_is_marker_only() {
        let v = mock_embed(&EncoderInput::pair("", ""), 8, 0);
        let nonzero: Vec<f32> = v.into_iter().filter(|x| *x != 0.0).collect();
        assert_eq!(nonzero, [(1.0 / 2f64.sqrt()) as f32]);
    }

    #[test]
    fn cjk_characters_are_tokens() {
        assert_eq!(mock_tokens("本院认为 ok"), ["本", "院", "认", "为", "ok"]);
        assert_eq!(mock_tokens("ab本cd"), ["ab", "本", "cd"]);
    }

    #[test]
    fn determinism_across_positions() {
        let b = MockBackend::new(32, 3);
        let a = EncoderInput::single("alpha beta");
        let out = embed_batch(&b, &[a.clone(), EncoderInput::single("gamma"), a]).unwrap();
        assert_eq!(out[0], out[2]);
        assert_eq!(b.calls(), 1);
        assert_eq!(b.inputs_embedded(), 3);
    }

    #[test]
    fn budget_split() {
        assert_eq!(truncate_budget(3, 4, 10), (3, 4));
        assert_eq!(truncate_budget(2, 100, 10), (2, 8));
        assert_eq!(truncate_budget(100, 3, 10), (7, 3));
        assert_eq!(truncate_budget(100, 100, 10), (5, 5));
        assert_eq!(truncate_budget(100, 100, 9), (5, 4));
    }

    #[test]
    fn truncation_applies() {
        let b = MockBackend::with_max_tokens(64, 0, 5);
        let long = EncoderInput::single("a b c d e f g");
        let short = EncoderInput::single("a b c");
        let out = embed_batch(&b, &[long, short]).unwrap();
        assert_eq!(out[0], out[1]);
        let pair = EncoderInput::pair("a b c", "x y z");
        let cut = EncoderInput::pair("a", "x");
        let out = embed_batch(&b, &[pair, cut]).unwrap();
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn disjoint_inputs_are_orthogonal() {
        // dim large enough that these six tokens land in distinct buckets
        let dim = 4096;
        let a = mock_embed(&EncoderInput::single("alpha beta gamma"), dim, 0);
        let b = mock_embed(&EncoderInput::single("delta epsilon zeta"), dim, 0);
        let buckets: std::collections::BTreeSet<usize> = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
            .iter()
            .map(|t| (seeded_hash(t, 0) % dim as u64) as usize)
            .collect();
        assert_eq!(buckets.len(), 6);
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
        assert_eq!(dot, 0.0);
    }
}
