use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RetrievalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Bm25,
    Dense,
    TwoStage,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Bm25 => "bm25",
            Stage::Dense => "dense",
            Stage::TwoStage => "two_stage",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bm25" => Ok(Stage::Bm25),
            "dense" => Ok(Stage::Dense),
            "two_stage" => Ok(Stage::TwoStage),
            other => Err(format!("unknown stage {other:?}")),
        }
    }
}

/// Score descending, then id ascending.
pub fn rank_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Ranked candidates for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    /// `None` for runs read from files with a foreign tag.
    pub stage: Option<Stage>,
    entries: Vec<(String, f64)>,
}

impl RankedList {
    /// Sorts `scores` by the ranking order and keeps the first `k`.
    pub fn from_scores(
        query_id: impl Into<String>,
        stage: Stage,
        mut scores: Vec<(String, f64)>,
        k: usize,
    ) -> Result<Self, RetrievalError> {
        let query_id = query_id.into();
        check_unique(&query_id, &scores)?;
        if let Some((id, _)) = scores.iter().find(|(_, s)| !s.is_finite()) {
            return Err(RetrievalError::NonFiniteScore {
                query: query_id,
                candidate: id.clone(),
            });
        }
        scores.sort_by(rank_order);
        scores.truncate(k);
        Ok(RankedList {
            query_id,
            stage: Some(stage),
            entries: scores,
        })
    }

    /// Keeps `entries` in the given order; ids must be unique.
    pub fn from_ordered(
        query_id: impl Into<String>,
        stage: Option<Stage>,
        entries: Vec<(String, f64)>,
    ) -> Result<Self, RetrievalError> {
        let query_id = query_id.into();
        check_unique(&query_id, &entries)?;
        Ok(RankedList {
            query_id,
            stage,
            entries,
        })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_unique(query: &str, entries: &[(String, f64)]) -> Result<(), RetrievalError> {
    let mut seen = HashSet::with_capacity(entries.len());
    for (id, _) in entries {
        if !seen.insert(id.as_str()) {
            return Err(RetrievalError::DuplicateCandidate {
                query: query.to_string(),
                candidate: id.clone(),
            });
        }
    }
    Ok(())
}
