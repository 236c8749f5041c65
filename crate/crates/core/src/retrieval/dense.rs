use super::{Bm25Index, RankedList, RetrievalError, Stage};
use crate::encoding::{similarity, CaseRepresentation, RepresentationSet};

/// Top `k` candidates by dot product with `query`.
pub fn dense_retrieve(
    query: &CaseRepresentation,
    candidates: &[&CaseRepresentation],
    k: usize,
) -> Result<RankedList, RetrievalError> {
    let scores = candidates
        .iter()
        .map(|c| Ok((c.case_id.clone(), similarity(query, c)?)))
        .collect::<Result<Vec<_>, RetrievalError>>()?;
    RankedList::from_scores(query.case_id.clone(), Stage::Dense, scores, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoStageDepths {
    pub k_first: usize,
    pub k_final: usize,
}

impl Default for TwoStageDepths {
    fn default() -> Self {
        TwoStageDepths { k_first: 10, k_final: 10 }
    }
}

/// BM25 top `k_first`, reranked by dot product, cut to `k_final`.
///
/// Stage-one survivors without a representation follow the scored ones in
/// BM25 order. Their scores are placeholders strictly below every dense score
/// so that sorting by score keeps that order.
pub fn two_stage_retrieve(
    index: &Bm25Index,
    query_id: &str,
    query_text: &str,
    pool: &[&str],
    reps: &RepresentationSet,
    depths: TwoStageDepths,
) -> Result<RankedList, RetrievalError> {
    let TwoStageDepths { k_first, k_final } = depths;
    if k_first == 0 || k_final == 0 || k_final > k_first {
        return Err(RetrievalError::Depths { k_first, k_final });
    }
    let query = reps
        .get(query_id)
        .ok_or_else(|| RetrievalError::MissingRepresentation(query_id.to_string()))?;
    let stage1 = index.retrieve(query_id, query_text, pool, k_first)?;
    let mut scored = Vec::new();
    let mut unscored = Vec::new();
    for id in stage1.ids() {
        match reps.get(id) {
            Some(rep) => scored.push(rep),
            None => unscored.push(id.to_string()),
        }
    }
    if !unscored.is_empty() {
        log::warn!("query {query_id}: {} stage-one candidates have no representation", unscored.len());
    }
    let dense = dense_retrieve(query, &scored, scored.len())?;
    let floor = dense.entries().last().map_or(0.0, |e| e.1);
    let mut entries: Vec<(String, f64)> = dense.entries().to_vec();
    entries.extend(
        unscored
            .into_iter()
            .enumerate()
            .map(|(i, id)| (id, floor - 1.0 - i as f64)),
    );
    entries.truncate(k_final);
    RankedList::from_ordered(query_id, Some(Stage::TwoStage), entries)
}
