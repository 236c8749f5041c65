//! Behavioural checks any [`EmbeddingBackend`] must pass. Run them against a
//! live service to validate it before use.

use super::{embed_batch, BackendError, EmbeddingBackend, EncoderInput};

#[derive(Debug, thiserror::Error)]
pub enum ContractViolation {
    #[error("{check}: {source}")]
    Backend {
        check: &'static str,
        #[source]
        source: BackendError,
    },
    #[error("{check}: {message}")]
    Failed { check: &'static str, message: String },
}

/// Names of the checks run by [`check_contract`], in order.
pub const CHECKS: [&str; 5] = [
    "count_alignment",
    "fixed_dim",
    "determinism",
    "truncation_safety",
    "empty_segments",
];

const LONG_INPUT_CHARS: usize = 100_000;

fn call<B: EmbeddingBackend + ?Sized>(
    backend: &B,
    check: &'static str,
    inputs: &[EncoderInput],
) -> Result<Vec<Vec<f32>>, ContractViolation> {
    embed_batch(backend, inputs).map_err(|source| ContractViolation::Backend { check, source })
}

/// Runs every check; stops at the first violation.
pub fn check_contract<B: EmbeddingBackend + ?Sized>(backend: &B) -> Result<(), ContractViolation> {
    let dim = backend.descriptor().dim;
    let batch = vec![
        EncoderInput::single("the appellant sought judicial review"),
        EncoderInput::pair("Legal facts: a contract was breached", "Legal issues: damages"),
        EncoderInput::single("经审理查明：被告人盗窃财物。"),
    ];

    let first = call(backend, CHECKS[0], &batch)?;
    if first.len() != batch.len() {
        return Err(ContractViolation::Failed {
            check: CHECKS[0],
            message: format!("{} vectors for {} inputs", first.len(), batch.len()),
        });
    }

    let single = call(backend, CHECKS[1], &batch[..1])?;
    if single[0].len() != dim || first.iter().any(|v| v.len() != dim) {
        return Err(ContractViolation::Failed {
            check: CHECKS[1],
            message: format!("expected dim {dim} throughout"),
        });
    }

    let again = call(backend, CHECKS[2], &batch)?;
    let same = again
        .iter()
        .zip(&first)
        .all(|(a, b)| a.iter().map(|x| x.to_bits()).eq(b.iter().map(|x| x.to_bits())));
    if !same || single[0].iter().map(|x| x.to_bits()).ne(first[0].iter().map(|x| x.to_bits())) {
        return Err(ContractViolation::Failed {
            check: CHECKS[2],
            message: "repeated inputs produced different vectors".into(),
        });
    }

    let long_text = "word ".repeat(LONG_INPUT_CHARS / 5);
    call(
        backend,
        CHECKS[3],
        &[
            EncoderInput::single(long_text.clone()),
            EncoderInput::pair(long_text.clone(), long_text),
        ],
    )?;

    call(backend, CHECKS[4], &[EncoderInput::pair("", "")])?;
    Ok(())
}
