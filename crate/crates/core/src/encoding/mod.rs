//! Prompt-prefixed dual and cross encoding of legal features.

mod representation;
mod sampler;
pub mod store;
mod template;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use representation::{dot, similarity, CaseRepresentation, Layout, RepresentationError, RepresentationSet};
pub use sampler::IssueSampler;
pub use template::{
    join_prompt, merged_prefix, Prompt, PromptCategory, PromptTemplate, TemplateError, ISSUE_SLOT, PRESETS,
};

use crate::backend::{embed_batch, BackendError, EmbeddingBackend, EncoderInput};
use crate::corpus::CaseDocument;
use crate::extraction::LegalFeatures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    WholeText,
    FactOnly,
    IssueOnly,
    FactAndIssue,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 4] = [
        FeatureMode::WholeText,
        FeatureMode::FactOnly,
        FeatureMode::IssueOnly,
        FeatureMode::FactAndIssue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::WholeText => "whole_text",
            FeatureMode::FactOnly => "fact_only",
            FeatureMode::IssueOnly => "issue_only",
            FeatureMode::FactAndIssue => "fact_and_issue",
        }
    }

    pub fn layout(self) -> Layout {
        match self {
            FeatureMode::FactAndIssue => Layout::FactIssueCross,
            _ => Layout::Single,
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown feature mode {s:?} (expected whole_text, fact_only, issue_only or fact_and_issue)"))
    }
}

/// Which text is encoded and whether prompts are prefixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct ReformulationVariant {
    pub feature_mode: FeatureMode,
    pub use_prompt: bool,
}

impl Default for ReformulationVariant {
    fn default() -> Self {
        ReformulationVariant {
            feature_mode: FeatureMode::FactAndIssue,
            use_prompt: true,
        }
    }
}

impl fmt::Display for ReformulationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.feature_mode, if self.use_prompt { "+prompt" } else { "" })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EncodingError {
    #[error("encoding case {case_id}: {source}")]
    Backend {
        case_id: String,
        #[source]
        source: BackendError,
    },
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// `[prefix ⊕ fact]` and `[prefix ⊕ issue]`.
pub fn build_dual_inputs(features: &LegalFeatures, prompt: &Prompt) -> (EncoderInput, EncoderInput) {
    (
        EncoderInput::single(prompt.fact(&features.fact_text)),
        EncoderInput::single(prompt.issue(&features.issue_text)),
    )
}

/// `[prefix ⊕ fact, prefix ⊕ issue]`, rendered by the backend as
/// `[CLS] seg1 [SEP] seg2 [SEP]`.
pub fn build_cross_input(features: &LegalFeatures, prompt: &Prompt) -> EncoderInput {
    EncoderInput::pair(prompt.fact(&features.fact_text), prompt.issue(&features.issue_text))
}

/// Encoder inputs for one case under `variant`. With prompts off the prompt's
/// prefixes are ignored.
pub fn case_inputs(
    doc: &CaseDocument,
    features: &LegalFeatures,
    prompt: &Prompt,
    variant: ReformulationVariant,
) -> Vec<EncoderInput> {
    let none = Prompt::none(prompt.language);
    let prompt = if variant.use_prompt { prompt } else { &none };
    match variant.feature_mode {
        FeatureMode::FactAndIssue => {
            let (fact, issue) = build_dual_inputs(features, prompt);
            vec![fact, issue, build_cross_input(features, prompt)]
        }
        FeatureMode::FactOnly => vec![EncoderInput::single(prompt.fact(&features.fact_text))],
        FeatureMode::IssueOnly => vec![EncoderInput::single(prompt.issue(&features.issue_text))],
        FeatureMode::WholeText => {
            let prefix = if variant.use_prompt {
                merged_prefix(prompt.language)
            } else {
                ""
            };
            vec![EncoderInput::single(join_prompt(prompt.language, prefix, &doc.raw_text))]
        }
    }
}

fn assemble(case_id: &str, mode: FeatureMode, vectors: &[Vec<f32>]) -> Result<CaseRepresentation, RepresentationError> {
    match mode {
        FeatureMode::FactAndIssue => CaseRepresentation::fact_issue_cross(case_id, &vectors[0], &vectors[1], &vectors[2]),
        _ => CaseRepresentation::single(case_id, vectors[0].clone()),
    }
}

/// Resolves `template` for one case, drawing the issue slot from `sampler`.
pub fn prompt_for(template: &PromptTemplate, sampler: Option<&IssueSampler>, features: &LegalFeatures) -> Prompt {
    let issue = if template.needs_issue() {
        sampler.and_then(|s| s.sample(features))
    } else {
        None
    };
    template.resolve(issue)
}

pub fn encode_case<B: EmbeddingBackend + ?Sized>(
    doc: &CaseDocument,
    features: &LegalFeatures,
    prompt: &Prompt,
    variant: ReformulationVariant,
    backend: &B,
) -> Result<CaseRepresentation, EncodingError> {
    let inputs = case_inputs(doc, features, prompt, variant);
    let vectors = embed_batch(backend, &inputs).map_err(|source| EncodingError::Backend {
        case_id: doc.id.clone(),
        source,
    })?;
    Ok(assemble(&doc.id, variant.feature_mode, &vectors)?)
}

/// One case to encode.
#[derive(Debug, Clone, Copy)]
pub struct EncodeItem<'a> {
    pub doc: &'a CaseDocument,
    pub features: &'a LegalFeatures,
}

/// Encodes many cases, `cases_per_call` cases per backend call, chunks in
/// parallel. Output does not depend on chunking or thread count.
pub fn encode_cases<B: EmbeddingBackend + ?Sized>(
    items: &[EncodeItem<'_>],
    template: &PromptTemplate,
    sampler: Option<&IssueSampler>,
    variant: ReformulationVariant,
    backend: &B,
    cases_per_call: usize,
) -> Result<RepresentationSet, EncodingError> {
    let chunks: Vec<Vec<CaseRepresentation>> = items
        .par_chunks(cases_per_call.max(1))
        .map(|chunk| {
            let mut inputs = Vec::new();
            let mut owners = Vec::new();
            for item in chunk {
                let prompt = prompt_for(template, sampler, item.features);
                let case = case_inputs(item.doc, item.features, &prompt, variant);
                owners.extend(std::iter::repeat_n(item.doc.id.as_str(), case.len()));
                inputs.extend(case);
            }
            let vectors = embed_batch(backend, &inputs).map_err(|source| {
                let first = match &source {
                    BackendError::Transport { failed, .. } | BackendError::Missing(failed) => failed.first().copied(),
                    _ => None,
                };
                EncodingError::Backend {
                    case_id: owners[first.unwrap_or(0)].to_string(),
                    source,
                }
            })?;
            let per_case = variant.feature_mode.layout().parts();
            chunk
                .iter()
                .zip(vectors.chunks(per_case))
                .map(|(item, v)| assemble(&item.doc.id, variant.feature_mode, v).map_err(EncodingError::from))
                .collect()
        })
        .collect::<Result<_, EncodingError>>()?;
    let mut set = RepresentationSet::new();
    for rep in chunks.into_iter().flatten() {
        set.insert(rep)?;
    }
    Ok(set)
}
