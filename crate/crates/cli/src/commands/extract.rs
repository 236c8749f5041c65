use std::collections::BTreeMap;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use promptcase::corpus::Corpus;
use promptcase::extraction::{
    extract_features, ChargeLexicon, ExtractionDeps, FactProvenance, IssueProvenance, RemoteSummarizer, Summarizer,
};
use promptcase::LegalFeatures;

use super::{CORPUS_FILE, EXTRACT_ERRORS_FILE, FEATURES_FILE};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

/// More failed documents than this fraction fails the command.
pub const MAX_FAILURE_RATIO: f64 = 0.10;

#[derive(Debug, Clone, Serialize)]
struct ErrorLine {
    source: String,
    error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ExtractSummary {
    pub records: usize,
    pub errors: usize,
    pub fact_provenance: BTreeMap<String, usize>,
    pub issue_provenance: BTreeMap<String, usize>,
}

fn provenance_name<T: Serialize>(p: T) -> String {
    serde_json::to_value(p)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Extracts facts and issues for every case. Documents that fail are listed
/// in the error file; the command fails when more than a tenth of them do.
pub fn cmd_extract(config: &RunConfig) -> CliResult<ExtractSummary> {
    let corpus_path = config.path(CORPUS_FILE);
    if !corpus_path.exists() {
        return Err(CliError::usage(format!(
            "{} not found; run `promptcase ingest` first",
            corpus_path.display()
        )));
    }
    let (corpus, bad_lines) = Corpus::read_jsonl_lenient(&corpus_path)?;
    let lexicon = match &config.extraction.lexicon {
        Some(path) => ChargeLexicon::load(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?,
        None => ChargeLexicon::builtin(),
    };
    let summarizer = config.extraction.summarizer_url.as_ref().map(|url| {
        RemoteSummarizer::new(url.clone(), Duration::from_millis(config.extraction.summarizer_timeout_ms))
    });
    let deps = ExtractionDeps {
        summarizer: summarizer.as_ref().map(|s| s as &dyn Summarizer),
        lexicon: &lexicon,
        placeholders: &config.extraction.placeholders,
    };

    let docs: Vec<_> = corpus.documents().collect();
    let results: Vec<_> = docs.par_iter().map(|doc| (doc.id.clone(), extract_features(doc, &deps))).collect();

    let mut features: Vec<LegalFeatures> = Vec::new();
    let mut errors: Vec<ErrorLine> = bad_lines
        .iter()
        .map(|i| ErrorLine {
            source: i.source.clone(),
            error: i.message.clone(),
        })
        .collect();
    let mut fallbacks = 0;
    for (id, result) in results {
        match result {
            Ok(extraction) => {
                for w in &extraction.warnings {
                    log::debug!("{w}");
                }
                if extraction.features.fact_provenance == FactProvenance::LeadFallback && !extraction.warnings.is_empty() {
                    fallbacks += 1;
                }
                features.push(extraction.features);
            }
            Err(e) => {
                log::error!("{id}: {e}");
                errors.push(ErrorLine {
                    source: id,
                    error: e.to_string(),
                });
            }
        }
    }
    if fallbacks > 0 {
        log::warn!("{fallbacks} cases used the lead-text fallback for their facts");
    }

    let mut summary = ExtractSummary {
        records: features.len(),
        errors: errors.len(),
        ..Default::default()
    };
    for f in &features {
        *summary.fact_provenance.entry(provenance_name(f.fact_provenance)).or_default() += 1;
        *summary.issue_provenance.entry(provenance_name(f.issue_provenance)).or_default() += 1;
    }
    if features.iter().all(|f| f.issue_provenance == IssueProvenance::Empty) && !features.is_empty() {
        log::warn!("no case yielded legal issues");
    }

    let mut manifest = Manifest::new("extract", config);
    manifest.input(&corpus_path)?;
    manifest.lexicon = Some(lexicon.version().to_string());
    manifest.summarizer = summarizer.as_ref().map(|s| s.version());
    let jsonl = promptcase::io::to_jsonl(&features).expect("features serialize");
    manifest.output(&config.path(FEATURES_FILE), jsonl.as_bytes())?;
    let jsonl = promptcase::io::to_jsonl(&errors).expect("errors serialize");
    manifest.output(&config.path(EXTRACT_ERRORS_FILE), jsonl.as_bytes())?;
    manifest.summary = serde_json::to_value(&summary).expect("summary serializes");
    manifest.write(&config.out)?;

    log::info!("extracted {} cases, {} errors", summary.records, summary.errors);
    let total = summary.records + summary.errors;
    if total > 0 && summary.errors as f64 / total as f64 > MAX_FAILURE_RATIO {
        return Err(CliError::runtime(format!(
            "{} of {total} documents failed extraction (see {EXTRACT_ERRORS_FILE})",
            summary.errors
        )));
    }
    Ok(summary)
}
