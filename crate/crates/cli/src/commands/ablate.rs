use std::collections::BTreeMap;

use serde::Serialize;

use promptcase::backend::{CachedBackend, EmbeddingBackend, EmbeddingCache};
use promptcase::corpus::Corpus;
use promptcase::encoding::{
    case_inputs, prompt_for, FeatureMode, IssueSampler, PromptTemplate, ReformulationVariant, PRESETS,
};
use promptcase::eval::{evaluate_run, Aggregate, ResultTable};
use promptcase::retrieval::{trec, Bm25Index};
use promptcase::{LegalFeatures, RelevanceJudgments};

use super::encode::{encode_items, encode_variant};
use super::retrieve::{build_index, run_pipeline};
use super::{load_corpus, load_features, load_judgments, sampler, ABLATION_CSV, ABLATION_JSON, ABLATION_TXT};
use crate::config::{template_named, Pipeline, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowGroup {
    /// Prompt on/off crossed with the encoded text.
    Variant,
    /// One preset template, with facts and issues encoded.
    Template,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub label: String,
    pub group: RowGroup,
    pub variant: ReformulationVariant,
    pub template: String,
    pub aggregate: Option<Aggregate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub pipeline: Pipeline,
    pub k: usize,
    pub seed: u64,
    pub rows: Vec<AblationRow>,
    /// Template NA with prompts on builds exactly the encoder inputs of the
    /// prompt-off facts-and-issues cell, for every case.
    pub na_matches_prompt_off: bool,
    /// The configured template changes at least one encoder input.
    pub template_changes_inputs: bool,
}

struct Cell {
    label: String,
    group: RowGroup,
    variant: ReformulationVariant,
    template: String,
}

fn grid(config: &RunConfig) -> Vec<Cell> {
    let mut modes = vec![FeatureMode::WholeText, FeatureMode::FactAndIssue];
    if config.feature_arms {
        modes.insert(1, FeatureMode::FactOnly);
        modes.insert(2, FeatureMode::IssueOnly);
    }
    let mut cells = Vec::new();
    for mode in modes {
        for use_prompt in [false, true] {
            let variant = ReformulationVariant {
                feature_mode: mode,
                use_prompt,
            };
            cells.push(Cell {
                label: variant.to_string(),
                group: RowGroup::Variant,
                variant,
                template: config.template.clone(),
            });
        }
    }
    for name in PRESETS {
        cells.push(Cell {
            label: format!("template {name}"),
            group: RowGroup::Template,
            variant: ReformulationVariant::default(),
            template: name.to_string(),
        });
    }
    cells
}

struct Shared<'a> {
    config: &'a RunConfig,
    corpus: &'a Corpus,
    features: &'a BTreeMap<String, LegalFeatures>,
    judgments: &'a RelevanceJudgments,
    index: &'a Bm25Index,
    backend: &'a dyn EmbeddingBackend,
}

fn run_cell(shared: &Shared<'_>, cell: &Cell) -> CliResult<(Aggregate, String)> {
    let Shared {
        config,
        corpus,
        features,
        judgments,
        index,
        backend,
    } = *shared;
    let language = corpus.language().ok_or_else(|| CliError::runtime("empty corpus"))?;
    let template = template_named(&cell.template, language)?;
    let reps = encode_variant(config, corpus, features, &template, cell.variant, backend)?;
    let raw = |id: &str| corpus.get(id).map(|d| d.raw_text.clone()).unwrap_or_default();
    let lists = run_pipeline(config, config.stage.pipeline, corpus, index, Some(&reps), &raw)?;
    let report = evaluate_run(&lists, judgments, config.eval_k)?;
    Ok((report.aggregate, trec::write_run(&lists)))
}

/// Checks, case by case, that `a` under `va` and `b` under `vb` give
/// identical encoder inputs.
fn same_inputs(
    corpus: &Corpus,
    features: &BTreeMap<String, LegalFeatures>,
    sampler: Option<&IssueSampler>,
    (a, va): (&PromptTemplate, ReformulationVariant),
    (b, vb): (&PromptTemplate, ReformulationVariant),
) -> bool {
    encode_items(corpus, features).iter().all(|item| {
        let left = case_inputs(item.doc, item.features, &prompt_for(a, sampler, item.features), va);
        let right = case_inputs(item.doc, item.features, &prompt_for(b, sampler, item.features), vb);
        left == right
    })
}

fn slug(label: &str) -> String {
    label.replace(['+', ' '], "_")
}

/// Runs the ablation grid: the four prompt × text variants (six with the
/// fact-only and issue-only arms) and the seven preset templates. A failing
/// cell is reported as FAILED and the grid continues.
pub fn cmd_ablate(config: &RunConfig) -> CliResult<AblationReport> {
    if !config.stage.pipeline.needs_store() {
        return Err(CliError::usage(format!(
            "ablation encodes cases and needs the dense or two_stage pipeline, not {}",
            config.stage.pipeline.name()
        )));
    }
    let corpus = load_corpus(config)?;
    let features = load_features(config)?;
    let judgments = load_judgments(config)?;
    let language = corpus.language().ok_or_else(|| CliError::runtime("empty corpus"))?;
    let configured = config.template_for(language)?;
    let index = build_index(config, &corpus, |id| corpus.get(id).map(|d| d.raw_text.clone()).unwrap_or_default())?;

    let sampler = sampler(config, &corpus, &features);
    let prompt_off = ReformulationVariant {
        feature_mode: FeatureMode::FactAndIssue,
        use_prompt: false,
    };
    let na = PromptTemplate::preset("NA", language)?;
    let na_matches_prompt_off = same_inputs(
        &corpus,
        &features,
        sampler.as_ref(),
        (&na, ReformulationVariant::default()),
        (&configured, prompt_off),
    );
    let template_changes_inputs = !same_inputs(
        &corpus,
        &features,
        sampler.as_ref(),
        (&configured, ReformulationVariant::default()),
        (&na, ReformulationVariant::default()),
    );
    if !na_matches_prompt_off {
        return Err(CliError::runtime("template NA does not reproduce the prompt-off inputs"));
    }

    let backend = config.backend.open()?;
    let cached;
    let backend: &dyn EmbeddingBackend = match &config.cache_dir {
        Some(dir) => {
            cached = CachedBackend::new(backend, EmbeddingCache::open(dir)?);
            &cached
        }
        None => &backend,
    };
    let shared = Shared {
        config,
        corpus: &corpus,
        features: &features,
        judgments: &judgments,
        index: &index,
        backend,
    };

    let mut manifest = Manifest::new("ablate", config);
    for name in [super::CORPUS_FILE, super::FEATURES_FILE, super::JUDGMENTS_FILE] {
        manifest.input(&config.path(name))?;
    }
    manifest.backend = Some(backend.descriptor().clone());
    let run_dir = config.path("ablation");
    let mut rows = Vec::new();
    let mut table = ResultTable::new(config.eval_k);
    for cell in grid(config) {
        let (aggregate, error) = match run_cell(&shared, &cell) {
            Ok((aggregate, run)) => {
                manifest.output(&run_dir.join(format!("{}.trec", slug(&cell.label))), run.as_bytes())?;
                (Some(aggregate), None)
            }
            Err(e) => {
                log::error!("ablation cell {}: {e}", cell.label);
                (None, Some(e.to_string()))
            }
        };
        table.push(cell.label.clone(), aggregate);
        rows.push(AblationRow {
            label: cell.label,
            group: cell.group,
            variant: cell.variant,
            template: cell.template,
            aggregate,
            error,
        });
    }

    let report = AblationReport {
        pipeline: config.stage.pipeline,
        k: config.eval_k,
        seed: config.seed,
        rows,
        na_matches_prompt_off,
        template_changes_inputs,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    manifest.output(&config.path(ABLATION_JSON), json.as_bytes())?;
    manifest.output(&config.path(ABLATION_CSV), table.to_csv().as_bytes())?;
    manifest.output(&config.path(ABLATION_TXT), table.to_text().as_bytes())?;
    manifest.summary = serde_json::json!({
        "rows": report.rows.len(),
        "failed": report.rows.iter().filter(|r| r.aggregate.is_none()).count(),
    });
    manifest.write(&config.out)?;
    print!("{}", table.to_text());
    Ok(report)
}
