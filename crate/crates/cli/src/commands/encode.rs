use promptcase::backend::{CachedBackend, EmbeddingBackend, EmbeddingCache};
use promptcase::encoding::store::{sidecar_path, store_bytes};
use promptcase::encoding::{encode_cases, EncodeItem, PromptTemplate, ReformulationVariant, RepresentationSet};
use promptcase::corpus::Corpus;
use promptcase::LegalFeatures;

use std::collections::BTreeMap;

use super::{load_corpus, load_features, sampler, CORPUS_FILE, FEATURES_FILE, STORE_FILE};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

/// Encodes every case with the configured backend, through the embedding
/// cache when one is configured.
pub fn cmd_encode(config: &RunConfig) -> CliResult<RepresentationSet> {
    let backend = config.backend.open()?;
    match &config.cache_dir {
        Some(dir) => {
            let cache = EmbeddingCache::open(dir)?;
            let cached = CachedBackend::new(backend, cache);
            let set = encode_with(config, &cached)?;
            let c = cached.cache();
            log::info!("embedding cache: {} hits, {} misses", c.hits(), c.misses());
            if c.corrupt_records() > 0 {
                log::warn!("embedding cache: skipped {} corrupt records", c.corrupt_records());
            }
            Ok(set)
        }
        None => encode_with(config, &backend),
    }
}

/// Cases that have features, in id order.
pub(crate) fn encode_items<'a>(
    corpus: &'a Corpus,
    features: &'a BTreeMap<String, LegalFeatures>,
) -> Vec<EncodeItem<'a>> {
    let mut items = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        match features.get(&doc.id) {
            Some(f) => items.push(EncodeItem { doc, features: f }),
            None => log::warn!("{}: no extracted features; not encoded", doc.id),
        }
    }
    items
}

pub(crate) fn encode_variant(
    config: &RunConfig,
    corpus: &Corpus,
    features: &BTreeMap<String, LegalFeatures>,
    template: &PromptTemplate,
    variant: ReformulationVariant,
    backend: &dyn EmbeddingBackend,
) -> CliResult<RepresentationSet> {
    let items = encode_items(corpus, features);
    if items.is_empty() {
        return Err(CliError::runtime("no case has extracted features"));
    }
    let sampler = sampler(config, corpus, features);
    Ok(encode_cases(&items, template, sampler.as_ref(), variant, backend, config.batch_cases)?)
}

/// [`cmd_encode`] with a caller-supplied backend.
pub fn encode_with(config: &RunConfig, backend: &dyn EmbeddingBackend) -> CliResult<RepresentationSet> {
    let corpus = load_corpus(config)?;
    let features = load_features(config)?;
    let language = corpus.language().ok_or_else(|| CliError::runtime("empty corpus"))?;
    let template = config.template_for(language)?;
    let set = encode_variant(config, &corpus, &features, &template, config.variant, backend)?;

    let mut manifest = Manifest::new("encode", config);
    manifest.input(&config.path(CORPUS_FILE))?;
    manifest.input(&config.path(FEATURES_FILE))?;
    manifest.backend = Some(backend.descriptor().clone());
    let (bytes, sidecar) = store_bytes(&set)?;
    let path = config.path(STORE_FILE);
    manifest.output(&path, &bytes)?;
    manifest.output(&sidecar_path(&path), sidecar.as_bytes())?;
    manifest.summary = serde_json::json!({
        "cases": set.len(),
        "dim": set.dim(),
        "variant": config.variant.to_string(),
        "template": config.template,
    });
    manifest.write(&config.out)?;
    log::info!("encoded {} cases ({}, dim {:?})", set.len(), config.variant, set.dim());
    Ok(set)
}
