//! Pipeline stages. Each reads the previous stage's files from the output
//! directory and writes its own plus a manifest.

mod ablate;
mod encode;
mod evaluate;
mod extract;
mod ingest;
mod retrieve;

use std::collections::BTreeMap;
use std::path::Path;

use promptcase::corpus::Corpus;
use promptcase::encoding::store::read_store;
use promptcase::encoding::{IssueSampler, RepresentationSet};
use promptcase::{LegalFeatures, RelevanceJudgments};

pub use ablate::{cmd_ablate, AblationReport, AblationRow, RowGroup};
pub use encode::{cmd_encode, encode_with};
pub use evaluate::cmd_evaluate;
pub use extract::{cmd_extract, ExtractSummary};
pub use ingest::cmd_ingest;
pub use retrieve::{cmd_retrieve, retrieve_lists};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const JUDGMENTS_FILE: &str = "judgments.json";
pub const STATS_JSON: &str = "stats.json";
pub const STATS_TXT: &str = "stats.txt";
pub const FEATURES_FILE: &str = "features.jsonl";
pub const EXTRACT_ERRORS_FILE: &str = "extract_errors.jsonl";
pub const STORE_FILE: &str = "representations.pcrs";
pub const RUN_FILE: &str = "run.trec";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const PER_QUERY_CSV: &str = "per_query.csv";
pub const ABLATION_JSON: &str = "ablation.json";
pub const ABLATION_CSV: &str = "ablation.csv";
pub const ABLATION_TXT: &str = "ablation.txt";

fn require(path: &Path, stage: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{} not found; run `promptcase {stage}` first", path.display())))
    }
}

pub(crate) fn load_corpus(config: &RunConfig) -> CliResult<Corpus> {
    let path = config.path(CORPUS_FILE);
    require(&path, "ingest")?;
    Ok(Corpus::read_jsonl(&path)?)
}

pub(crate) fn load_features(config: &RunConfig) -> CliResult<BTreeMap<String, LegalFeatures>> {
    let path = config.path(FEATURES_FILE);
    require(&path, "extract")?;
    let records: Vec<LegalFeatures> = promptcase::io::read_jsonl(&path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    Ok(records.into_iter().map(|f| (f.case_id.clone(), f)).collect())
}

pub(crate) fn load_judgments(config: &RunConfig) -> CliResult<RelevanceJudgments> {
    let path = config.path(JUDGMENTS_FILE);
    if !path.exists() {
        return Err(CliError::usage(format!(
            "{} not found; the dataset needs relevance labels for evaluation",
            path.display()
        )));
    }
    Ok(RelevanceJudgments::read_json(&path)?)
}

pub(crate) fn load_store(config: &RunConfig) -> CliResult<RepresentationSet> {
    let path = config.path(STORE_FILE);
    require(&path, "encode")?;
    Ok(read_store(&path)?)
}

pub(crate) fn sampler(
    config: &RunConfig,
    corpus: &Corpus,
    features: &BTreeMap<String, LegalFeatures>,
) -> Option<IssueSampler> {
    corpus
        .language()
        .map(|lang| IssueSampler::from_features(features.values(), lang, config.seed))
}
