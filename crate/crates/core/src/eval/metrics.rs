//! Binary-relevance ranking metrics. `ranked` is a best-first list of ids.

use std::collections::BTreeSet;

use super::EvalError;

fn check(k: usize, relevant: &BTreeSet<String>) -> Result<(), EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroCutoff);
    }
    if relevant.is_empty() {
        return Err(EvalError::EmptyRelevant);
    }
    Ok(())
}

fn hits_at(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> usize {
    ranked.iter().take(k).filter(|d| relevant.contains(**d)).count()
}

/// True positives, false positives and false negatives in the top `k`.
/// Empty slots below `k` count as false positives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn at(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<Self, EvalError> {
        check(k, relevant)?;
        let tp = hits_at(ranked, relevant, k);
        Ok(Counts {
            tp,
            fp: k - tp,
            fn_: relevant.len() - tp,
        })
    }

    /// `2TP / (2TP + FP + FN)`, zero when the denominator is zero.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

/// `|top-k ∩ relevant| / k`.
pub fn precision_at_k(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64, EvalError> {
    check(k, relevant)?;
    Ok(hits_at(ranked, relevant, k) as f64 / k as f64)
}

/// `|top-k ∩ relevant| / |relevant|`.
pub fn recall_at_k(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64, EvalError> {
    check(k, relevant)?;
    Ok(hits_at(ranked, relevant, k) as f64 / relevant.len() as f64)
}

/// Reciprocal rank of the first relevant id in the top `k`, else 0.
pub fn reciprocal_rank(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64, EvalError> {
    check(k, relevant)?;
    Ok(ranked
        .iter()
        .take(k)
        .position(|d| relevant.contains(*d))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64))
}

/// Average precision over the whole list; unretrieved relevant ids add 0.
pub fn average_precision(ranked: &[&str], relevant: &BTreeSet<String>) -> Result<f64, EvalError> {
    check(1, relevant)?;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, d) in ranked.iter().enumerate() {
        if relevant.contains(*d) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / relevant.len() as f64)
}

/// NDCG with binary gains and `1 / log2(i + 1)` discounts.
pub fn ndcg_at_k(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64, EvalError> {
    check(k, relevant)?;
    let discount = |i: usize| 1.0 / ((i + 1) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, d)| relevant.contains(**d))
        .map(|(i, _)| discount(i + 1))
        .sum();
    let ideal: f64 = (1..=k.min(relevant.len())).map(discount).sum();
    Ok(dcg / ideal)
}

/// `(MiF1, MaF1)`: F1 of the pooled counts, and the mean per-query F1.
pub fn micro_macro_f1(counts: &[Counts]) -> (f64, f64) {
    if counts.is_empty() {
        return (0.0, 0.0);
    }
    let pooled = counts.iter().fold(Counts { tp: 0, fp: 0, fn_: 0 }, |acc, c| Counts {
        tp: acc.tp + c.tp,
        fp: acc.fp + c.fp,
        fn_: acc.fn_ + c.fn_,
    });
    let macro_f1 = counts.iter().map(Counts::f1).sum::<f64>() / counts.len() as f64;
    (pooled.f1(), macro_f1)
}
