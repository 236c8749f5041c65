//! Evaluation of ranked runs against binary judgments.

pub mod metrics;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use metrics::{
    average_precision, micro_macro_f1, ndcg_at_k, precision_at_k, recall_at_k, reciprocal_rank, Counts,
};

use crate::corpus::RelevanceJudgments;
use crate::retrieval::RankedList;

pub const DEFAULT_CUTOFF: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("cutoff k must be at least 1")]
    ZeroCutoff,
    #[error("relevant set is empty")]
    EmptyRelevant,
    #[error("run query {0} has no judgments")]
    UnjudgedQuery(String),
    #[error("query {0} appears twice in the run")]
    DuplicateQuery(String),
    #[error("no judged queries to evaluate")]
    NothingToEvaluate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub query_id: String,
    pub counts: Counts,
    pub p_at_k: f64,
    pub r_at_k: f64,
    pub f1: f64,
    pub rr: f64,
    pub ap: f64,
    pub ndcg: f64,
}

/// Aggregates: P is the mean of P@k, R the pooled recall
/// `ΣTP / Σ|relevant|`, MiF1 from pooled counts, MaF1/MRR/MAP/NDCG means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub p: f64,
    pub r: f64,
    pub mi_f1: f64,
    pub ma_f1: f64,
    pub mrr: f64,
    pub map: f64,
    pub ndcg: f64,
}

impl Aggregate {
    pub fn values(&self) -> [f64; 7] {
        [self.p, self.r, self.mi_f1, self.ma_f1, self.mrr, self.map, self.ndcg]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub k: usize,
    pub num_queries: usize,
    pub per_query: Vec<QueryMetrics>,
    pub aggregate: Aggregate,
    /// Judged queries that had no results in the run; scored as empty lists.
    pub missing_from_run: Vec<String>,
    pub avg_relevant_per_query: f64,
    /// `k / avg_relevant_per_query`: no system can report a higher R.
    pub recall_bound: f64,
}

/// Column headers of the result tables.
pub fn column_names(k: usize) -> [String; 7] {
    [
        format!("P@{k}"),
        format!("R@{k}"),
        "Mi-F1".to_string(),
        "Ma-F1".to_string(),
        format!("MRR@{k}"),
        "MAP".to_string(),
        format!("NDCG@{k}"),
    ]
}

pub fn percent(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

pub fn score_query(
    query_id: &str,
    ranked: &[&str],
    relevant: &std::collections::BTreeSet<String>,
    k: usize,
) -> Result<QueryMetrics, EvalError> {
    let counts = Counts::at(ranked, relevant, k)?;
    Ok(QueryMetrics {
        query_id: query_id.to_string(),
        counts,
        p_at_k: precision_at_k(ranked, relevant, k)?,
        r_at_k: recall_at_k(ranked, relevant, k)?,
        f1: counts.f1(),
        rr: reciprocal_rank(ranked, relevant, k)?,
        ap: average_precision(ranked, relevant)?,
        ndcg: ndcg_at_k(ranked, relevant, k)?,
    })
}

/// Scores every judged query. Queries in the run without judgments are an
/// error; judged queries absent from the run count as empty rankings.
pub fn evaluate_run(run: &[RankedList], judgments: &RelevanceJudgments, k: usize) -> Result<MetricsReport, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroCutoff);
    }
    let mut by_query: BTreeMap<&str, &RankedList> = BTreeMap::new();
    for list in run {
        if judgments.get(&list.query_id).is_none() {
            return Err(EvalError::UnjudgedQuery(list.query_id.clone()));
        }
        if by_query.insert(&list.query_id, list).is_some() {
            return Err(EvalError::DuplicateQuery(list.query_id.clone()));
        }
    }
    if judgments.is_empty() {
        return Err(EvalError::NothingToEvaluate);
    }
    let mut per_query = Vec::with_capacity(judgments.len());
    let mut missing = Vec::new();
    for (qid, relevant) in judgments.iter() {
        let ranked: Vec<&str> = match by_query.get(qid) {
            Some(list) => list.ids().collect(),
            None => {
                missing.push(qid.to_string());
                Vec::new()
            }
        };
        per_query.push(score_query(qid, &ranked, relevant, k)?);
    }
    let n = per_query.len() as f64;
    let mean = |f: fn(&QueryMetrics) -> f64| per_query.iter().map(f).sum::<f64>() / n;
    let counts: Vec<Counts> = per_query.iter().map(|q| q.counts).collect();
    let (mi_f1, ma_f1) = micro_macro_f1(&counts);
    let tp: usize = counts.iter().map(|c| c.tp).sum();
    let relevant: usize = counts.iter().map(|c| c.tp + c.fn_).sum();
    let avg_rel = relevant as f64 / n;
    Ok(MetricsReport {
        k,
        num_queries: per_query.len(),
        aggregate: Aggregate {
            p: mean(|q| q.p_at_k),
            r: tp as f64 / relevant as f64,
            mi_f1,
            ma_f1,
            mrr: mean(|q| q.rr),
            map: mean(|q| q.ap),
            ndcg: mean(|q| q.ndcg),
        },
        per_query,
        missing_from_run: missing,
        avg_relevant_per_query: avg_rel,
        recall_bound: k as f64 / avg_rel,
    })
}

/// Rows of labelled aggregates rendered as CSV and aligned text.
#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    k: usize,
    rows: Vec<(String, Option<Aggregate>)>,
}

impl ResultTable {
    pub fn new(k: usize) -> Self {
        ResultTable { k, rows: Vec::new() }
    }

    /// `None` renders as a FAILED row.
    pub fn push(&mut self, label: impl Into<String>, aggregate: Option<Aggregate>) {
        self.rows.push((label.into(), aggregate));
    }

    fn cells(aggregate: &Option<Aggregate>) -> Vec<String> {
        match aggregate {
            Some(a) => a.values().iter().map(|v| percent(*v)).collect(),
            None => vec!["FAILED".to_string(); 7],
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("run");
        for c in column_names(self.k) {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
        for (label, agg) in &self.rows {
            let label = if label.contains([',', '"']) {
                format!("\"{}\"", label.replace('"', "\"\""))
            } else {
                label.clone()
            };
            let _ = writeln!(out, "{label},{}", Self::cells(agg).join(","));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let header: Vec<String> = std::iter::once("Run".to_string()).chain(column_names(self.k)).collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|(label, agg)| std::iter::once(label.clone()).chain(Self::cells(agg)).collect())
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| {
                std::iter::once(&header)
                    .chain(&body)
                    .map(|r| r[i].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for row in std::iter::once(&header).chain(&body) {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (cell, w))| {
                    let pad = w - cell.chars().count();
                    if i == 0 {
                        format!("{cell}{}", " ".repeat(pad))
                    } else {
                        format!("{}{cell}", " ".repeat(pad))
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

impl MetricsReport {
    pub fn table(&self, label: &str) -> ResultTable {
        let mut t = ResultTable::new(self.k);
        t.push(label, Some(self.aggregate));
        t
    }

    /// Per-query CSV with the same columns as the summary table.
    pub fn per_query_csv(&self) -> String {
        let mut out = String::from("query_id,tp,fp,fn,p_at_k,r_at_k,f1,rr,ap,ndcg\n");
        for q in &self.per_query {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                q.query_id, q.counts.tp, q.counts.fp, q.counts.fn_, q.p_at_k, q.r_at_k, q.f1, q.rr, q.ap, q.ndcg
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::Stage;
    use std::collections::BTreeSet;

    fn judgments(rows: &[(&str, &str)]) -> RelevanceJudgments {
        rows.iter()
            .map(|(q, rel)| (q.to_string(), rel.chars().map(|c| c.to_string()).collect::<BTreeSet<_>>()))
            .collect()
    }

    fn run(rows: &[(&str, &str)]) -> Vec<RankedList> {
        rows.iter()
            .map(|(q, ranking)| {
                let n = ranking.len();
                let entries = ranking.chars().enumerate().map(|(i, c)| (c.to_string(), (n - i) as f64)).collect();
                RankedList::from_ordered(*q, Some(Stage::Dense), entries).unwrap()
            })
            .collect()
    }

    #[test]
    fn perfect_system() {
        let j = judgments(&[("q1", "abcdef"), ("q2", "ghijklm")]);
        let r = run(&[("q1", "abcde"), ("q2", "ghijk")]);
        let rep = evaluate_run(&r, &j, 5).unwrap();
        assert_eq!((rep.aggregate.p, rep.aggregate.mrr, rep.aggregate.ndcg), (1.0, 1.0, 1.0));
        assert!(rep.aggregate.r <= rep.recall_bound + 1e-12);
    }

    #[test]
    fn unjudged_run_query_is_error() {
        let j = judgments(&[("q1", "a")]);
        let err = evaluate_run(&run(&[("q9", "a")]), &j, 5).unwrap_err();
        assert!(err.to_string().contains("q9"));
    }

    #[test]
    fn order_independent() {
        let j = judgments(&[("q1", "ab"), ("q2", "c")]);
        let a = evaluate_run(&run(&[("q1", "xab"), ("q2", "cy")]), &j, 5).unwrap();
        let b = evaluate_run(&run(&[("q2", "cy"), ("q1", "xab")]), &j, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_queries_count_as_empty() {
        let j = judgments(&[("q1", "a"), ("q2", "b")]);
        let rep = evaluate_run(&run(&[("q1", "a")]), &j, 5).unwrap();
        assert_eq!(rep.missing_from_run, ["q2"]);
        assert_eq!(rep.aggregate.mrr, 0.5);
    }

    #[test]
    fn tables() {
        let j = judgments(&[("q1", "a")]);
        let rep = evaluate_run(&run(&[("q1", "xa")]), &j, 5).unwrap();
        let mut t = rep.table("dense");
        t.push("broken", None);
        let csv = t.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "run,P@5,R@5,Mi-F1,Ma-F1,MRR@5,MAP,NDCG@5");
        assert_eq!(csv.lines().nth(1).unwrap(), "dense,20.0,100.0,33.3,33.3,50.0,50.0,63.1");
        assert!(csv.lines().nth(2).unwrap().starts_with("broken,FAILED"));
        let text = t.to_text();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().starts_with("Run"));
    }

    #[test]
    fn ten_query_fixture() {
        let j = judgments(&[
            ("q01", "abc"), ("q02", "d"), ("q03", "ef"), ("q04", "abcdefg"), ("q05", "ab"),
            ("q06", "c"), ("q07", "abc"), ("q08", "abcd"), ("q09", "z"), ("q10", "mn"),
        ]);
        let r = run(&[
            ("q01", "axbyzc"), ("q02", "xydz"), ("q03", "xyzwve"), ("q04", "abcde"), ("q05", "ab"),
            ("q06", "xc"), ("q07", "xya"), ("q08", "bxdyac"), ("q09", "abcdefz"),
        ]);
        let rep = evaluate_run(&r, &j, 5).unwrap();
        let a = rep.aggregate;
        let close = |x: f64, y: f64| assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        close(a.p, 0.3);
        close(a.r, 15.0 / 26.0);
        close(a.mi_f1, 15.0 / 38.0);
        close(a.ma_f1, 293.0 / 840.0);
        close(a.mrr, 31.0 / 60.0);
        close(a.map, 1823.0 / 4200.0);
        close(a.ndcg, 0.48060768988329283);
        close(rep.recall_bound, 1.923076923076923);
        assert_eq!(rep.missing_from_run, ["q10"]);
        let q08 = &rep.per_query[7];
        assert_eq!((q08.counts.tp, q08.counts.fp, q08.counts.fn_), (3, 2, 1));
        close(q08.ap, 11.0 / 15.0);
        close(q08.ndcg, 0.7365896932159578);
    }
}
