use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, RelevanceJudgments};
use crate::retrieval::Tokenizer;

/// Size statistics in the shape of a dataset overview table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub num_docs: usize,
    pub num_queries: usize,
    pub avg_length: f64,
    pub max_length: usize,
    pub avg_relevant_per_query: Option<f64>,
}

pub fn corpus_stats(
    corpus: &Corpus,
    judgments: Option<&RelevanceJudgments>,
    tokenizer: &Tokenizer,
) -> Result<CorpusStats, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let lengths: Vec<usize> = corpus
        .documents()
        .map(|d| tokenizer.tokenize(&d.raw_text).len())
        .collect();
    let total: usize = lengths.iter().sum();
    Ok(CorpusStats {
        num_docs: lengths.len(),
        num_queries: corpus.query_ids().count(),
        avg_length: total as f64 / lengths.len() as f64,
        max_length: lengths.iter().copied().max().unwrap_or(0),
        avg_relevant_per_query: judgments.and_then(RelevanceJudgments::avg_relevant_per_query),
    })
}

impl CorpusStats {
    pub fn render_table(&self, name: &str) -> String {
        let rows = [
            ("Dataset", name.to_string()),
            ("# Cases", self.num_docs.to_string()),
            ("# Queries", self.num_queries.to_string()),
            ("Avg. length/case", format!("{:.0}", self.avg_length)),
            ("Largest length of cases", self.max_length.to_string()),
            (
                "Avg. relevant cases/query",
                self.avg_relevant_per_query
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.2}")),
            ),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}
