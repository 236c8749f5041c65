use promptcase::corpus::{corpus_stats, load_coliee_corpus, load_judgments, load_lecard_corpus, Severity};

use super::{CORPUS_FILE, JUDGMENTS_FILE, STATS_JSON, STATS_TXT};
use crate::config::{DatasetConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

/// Loads the dataset, writes the normalized corpus, judgments and a
/// statistics table.
pub fn cmd_ingest(config: &RunConfig) -> CliResult<()> {
    let dataset = config
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::usage("no dataset configured (set `dataset` or pass --dataset)"))?;
    let mut manifest = Manifest::new("ingest", config);
    let (loaded, name) = match dataset {
        DatasetConfig::Coliee { root, labels } => {
            let mut loaded = load_coliee_corpus(root)?;
            if let Some(labels) = labels {
                let (judgments, issues) = load_judgments(labels, &loaded.corpus)?;
                loaded.judgments = Some(judgments);
                loaded.issues.extend(issues);
                manifest.input(labels)?;
            }
            (loaded, "COLIEE-style")
        }
        DatasetConfig::Lecard {
            queries,
            candidates,
            labels,
        } => {
            manifest.input(queries)?;
            manifest.input(labels)?;
            (load_lecard_corpus(queries, candidates, labels)?, "LeCaRD-style")
        }
    };

    let mut errors = 0;
    for issue in &loaded.issues {
        match issue.severity {
            Severity::Warning => log::warn!("{}: {}", issue.source, issue.message),
            Severity::Error => {
                errors += 1;
                log::error!("{}: {}", issue.source, issue.message);
            }
        }
    }

    let corpus = &loaded.corpus;
    let language = corpus.language().ok_or_else(|| CliError::runtime("empty corpus"))?;
    let stats = corpus_stats(corpus, loaded.judgments.as_ref(), &config.tokenizer_for(language))?;

    manifest.output(&config.path(CORPUS_FILE), corpus.to_jsonl().as_bytes())?;
    if let Some(judgments) = &loaded.judgments {
        let path = config.path(JUDGMENTS_FILE);
        let mut text = serde_json::to_string_pretty(judgments).expect("judgments serialize");
        text.push('\n');
        manifest.output(&path, text.as_bytes())?;
    }
    let mut stats_json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    stats_json.push('\n');
    manifest.output(&config.path(STATS_JSON), stats_json.as_bytes())?;
    let table = stats.render_table(name);
    manifest.output(&config.path(STATS_TXT), table.as_bytes())?;

    manifest.summary = serde_json::json!({
        "documents": corpus.len(),
        "queries": stats.num_queries,
        "judged_queries": loaded.judgments.as_ref().map(|j| j.len()),
        "load_errors": errors,
        "load_warnings": loaded.issues.len() - errors,
    });
    manifest.write(&config.out)?;
    log::info!("ingested {} documents, {} queries", corpus.len(), stats.num_queries);
    print!("{table}");
    Ok(())
}
