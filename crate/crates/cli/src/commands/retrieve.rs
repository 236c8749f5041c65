use std::collections::BTreeMap;

use rayon::prelude::*;

use promptcase::corpus::Corpus;
use promptcase::encoding::{prompt_for, CaseRepresentation, IssueSampler, Prompt, PromptTemplate, RepresentationSet};
use promptcase::retrieval::{
    bm25_promptcase_text, dense_retrieve, trec, two_stage_retrieve, Bm25Index, TwoStageDepths,
};
use promptcase::{LegalFeatures, RankedList};

use super::{load_corpus, load_features, load_store, sampler, CORPUS_FILE, FEATURES_FILE, RUN_FILE, STORE_FILE};
use crate::config::{Pipeline, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

/// BM25 over the candidate documents of `corpus`, with texts from `text_of`.
pub(crate) fn build_index(
    config: &RunConfig,
    corpus: &Corpus,
    text_of: impl Fn(&str) -> String,
) -> CliResult<Bm25Index> {
    let language = corpus.language().ok_or_else(|| CliError::runtime("empty corpus"))?;
    let docs: Vec<(String, String)> = corpus
        .candidate_ids()
        .into_iter()
        .map(|id| (id.to_string(), text_of(id)))
        .collect();
    Ok(Bm25Index::build(docs, config.tokenizer_for(language), config.bm25)?)
}

fn raw_text(corpus: &Corpus, id: &str) -> String {
    corpus.get(id).map(|d| d.raw_text.clone()).unwrap_or_default()
}

/// Ranked lists of every query under `pipeline`, ordered by query id.
/// Queries without a representation are skipped with a warning in the dense
/// modes.
pub(crate) fn run_pipeline(
    config: &RunConfig,
    pipeline: Pipeline,
    corpus: &Corpus,
    index: &Bm25Index,
    reps: Option<&RepresentationSet>,
    query_text: &(dyn Fn(&str) -> String + Sync),
) -> CliResult<Vec<RankedList>> {
    let queries: Vec<&str> = corpus.query_ids().collect();
    let topk = config.stage.topk;
    let results: Vec<CliResult<Option<RankedList>>> = queries
        .par_iter()
        .map(|&q| {
            let pool = corpus.resolve_pool(q).unwrap_or_default();
            if pool.is_empty() {
                log::warn!("query {q}: empty candidate pool");
                return Ok(None);
            }
            let list = match pipeline {
                Pipeline::Bm25 | Pipeline::Bm25Promptcase => index.retrieve(q, &query_text(q), &pool, topk)?,
                Pipeline::Dense => {
                    let reps = reps.expect("dense needs representations");
                    let Some(query) = reps.get(q) else {
                        log::warn!("query {q}: no representation; skipped");
                        return Ok(None);
                    };
                    let candidates: Vec<&CaseRepresentation> = pool.iter().filter_map(|id| reps.get(id)).collect();
                    if candidates.len() < pool.len() {
                        log::warn!("query {q}: {} candidates have no representation", pool.len() - candidates.len());
                    }
                    dense_retrieve(query, &candidates, topk)?
                }
                Pipeline::TwoStage => {
                    let reps = reps.expect("two-stage needs representations");
                    if reps.get(q).is_none() {
                        log::warn!("query {q}: no representation; skipped");
                        return Ok(None);
                    }
                    let depths = TwoStageDepths {
                        k_first: config.stage.stage1_depth,
                        k_final: topk,
                    };
                    two_stage_retrieve(index, q, &query_text(q), &pool, reps, depths)?
                }
            };
            Ok(Some(list))
        })
        .collect();
    let mut lists = Vec::with_capacity(results.len());
    for r in results {
        lists.extend(r?);
    }
    Ok(lists)
}

/// Texts for lexical retrieval over reformulated input: raw text followed by
/// the prompted facts and issues.
pub(crate) fn promptcase_texts(
    corpus: &Corpus,
    features: &BTreeMap<String, LegalFeatures>,
    template: &PromptTemplate,
    sampler: Option<&IssueSampler>,
    use_prompt: bool,
) -> BTreeMap<String, String> {
    corpus
        .documents()
        .map(|doc| {
            let text = match features.get(&doc.id) {
                Some(f) => {
                    let prompt = if use_prompt {
                        prompt_for(template, sampler, f)
                    } else {
                        Prompt::none(doc.language)
                    };
                    bm25_promptcase_text(&doc.raw_text, f, &prompt)
                }
                None => doc.raw_text.clone(),
            };
            (doc.id.clone(), text)
        })
        .collect()
}

/// Ranked lists for the configured pipeline, computed from the files of
/// earlier stages.
pub fn retrieve_lists(config: &RunConfig, manifest: Option<&mut Manifest>) -> CliResult<Vec<RankedList>> {
    let corpus = load_corpus(config)?;
    let pipeline = config.stage.pipeline;
    let mut inputs = vec![config.path(CORPUS_FILE)];
    let lists = match pipeline {
        Pipeline::Bm25 => {
            let index = build_index(config, &corpus, |id| raw_text(&corpus, id))?;
            run_pipeline(config, pipeline, &corpus, &index, None, &|q| raw_text(&corpus, q))?
        }
        Pipeline::Bm25Promptcase => {
            let features = load_features(config)?;
            inputs.push(config.path(FEATURES_FILE));
            let language = corpus.language().ok_or_else(|| CliError::runtime("empty corpus"))?;
            let template = config.template_for(language)?;
            let sampler = sampler(config, &corpus, &features);
            let texts = promptcase_texts(&corpus, &features, &template, sampler.as_ref(), config.variant.use_prompt);
            let text = |id: &str| texts.get(id).cloned().unwrap_or_default();
            let index = build_index(config, &corpus, text)?;
            run_pipeline(config, pipeline, &corpus, &index, None, &text)?
        }
        Pipeline::Dense | Pipeline::TwoStage => {
            let reps = load_store(config)?;
            inputs.push(config.path(STORE_FILE));
            let index = build_index(config, &corpus, |id| raw_text(&corpus, id))?;
            run_pipeline(config, pipeline, &corpus, &index, Some(&reps), &|q| raw_text(&corpus, q))?
        }
    };
    if let Some(m) = manifest {
        for path in inputs {
            m.input(&path)?;
        }
    }
    Ok(lists)
}

/// Writes the TREC run file of the configured pipeline.
pub fn cmd_retrieve(config: &RunConfig) -> CliResult<Vec<RankedList>> {
    let mut manifest = Manifest::new("retrieve", config);
    let lists = retrieve_lists(config, Some(&mut manifest))?;
    manifest.output(&config.path(RUN_FILE), trec::write_run(&lists).as_bytes())?;
    manifest.summary = serde_json::json!({
        "pipeline": config.stage.pipeline.name(),
        "queries": lists.len(),
        "rows": lists.iter().map(RankedList::len).sum::<usize>(),
    });
    manifest.write(&config.out)?;
    log::info!("retrieved {} queries with {}", lists.len(), config.stage.pipeline.name());
    Ok(lists)
}
