//! TREC run files: `qid Q0 docid rank score tag`, one line per result.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{RankedList, RetrievalError, Stage};

const DEFAULT_TAG: &str = "run";

/// Formats a score with six decimals, printing negative zero as zero.
pub fn format_score(score: f64) -> String {
    let s = format!("{score:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Serializes lists in the order given. Ranks start at 1.
pub fn write_run<'a>(lists: impl IntoIterator<Item = &'a RankedList>) -> String {
    let mut out = String::new();
    for list in lists {
        let tag = list.stage.map_or(DEFAULT_TAG, Stage::name);
        for (rank, (doc, score)) in list.entries().iter().enumerate() {
            let _ = writeln!(out, "{} Q0 {} {} {} {}", list.query_id, doc, rank + 1, format_score(*score), tag);
        }
    }
    out
}

/// Tag and `(rank, docid, score)` rows of one query, as read.
type QueryRows = (Option<Stage>, Vec<(u64, String, f64)>);

/// Parses a run, ordering each query's entries by rank. Queries come back in
/// ascending id order.
pub fn parse_run(text: &str) -> Result<Vec<RankedList>, RetrievalError> {
    let mut queries: BTreeMap<String, QueryRows> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |message: &str| RetrievalError::RunFormat {
            line: line_no,
            message: message.to_string(),
        };
        if fields.len() != 6 {
            return Err(bad("expected 6 fields: qid Q0 docid rank score tag"));
        }
        let rank: u64 = fields[3].parse().map_err(|_| bad("rank is not an integer"))?;
        let score: f64 = fields[4].parse().map_err(|_| bad("score is not a number"))?;
        if !score.is_finite() {
            return Err(bad("score is not finite"));
        }
        let entry = queries.entry(fields[0].to_string()).or_insert_with(|| (fields[5].parse().ok(), Vec::new()));
        entry.1.push((rank, fields[2].to_string(), score));
    }
    queries
        .into_iter()
        .map(|(qid, (stage, mut rows))| {
            rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.2.total_cmp(&a.2)).then_with(|| a.1.cmp(&b.1)));
            RankedList::from_ordered(qid, stage, rows.into_iter().map(|(_, d, s)| (d, s)).collect())
        })
        .collect()
}
