//! Case corpora: documents, candidate pools and relevance judgments.

mod french;
mod loader;
mod sections;
mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use french::{is_french_paragraph, remove_french, FRENCH_RATIO_THRESHOLD};
pub use loader::{load_coliee_corpus, load_judgments, load_lecard_corpus, LoadedCorpus, COLIEE_MANIFEST};
pub use sections::detect_sections;
pub use stats::{corpus_stats, CorpusStats};

use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Jurisdiction {
    CommonLaw,
    CivilLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    En,
    Zh,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::En => "en",
            Language::Zh => "zh",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Name,
    Background,
    Analysis,
    Order,
}

/// Half-open byte range into a document's normalized text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl From<[usize; 2]> for Span {
    fn from([start, end]: [usize; 2]) -> Self {
        Span { start, end }
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no case files found in {0}")]
    NoCaseFiles(PathBuf),
    #[error("query manifest not found: {0}")]
    MissingManifest(PathBuf),
    #[error("labels for query {query} reference missing candidate {candidate}")]
    MissingCandidate { query: String, candidate: String },
    #[error("duplicate case id {0}")]
    DuplicateId(String),
    #[error("empty document {0}")]
    EmptyDocument(String),
    #[error("document {id}: invalid section span {start}..{end}")]
    InvalidSpan { id: String, start: usize, end: usize },
    #[error("pool of query {query} references unknown document {candidate}")]
    UnknownPoolMember { query: String, candidate: String },
    #[error("query {0} is not a document in the corpus")]
    UnknownQuery(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One legal case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseDocument {
    pub id: String,
    pub jurisdiction: Jurisdiction,
    pub language: Language,
    pub raw_text: String,
    pub sections: BTreeMap<SectionKind, Span>,
}

impl CaseDocument {
    /// Normalizes `raw` and detects sections. French paragraphs are not
    /// touched here; loaders decide whether to filter them.
    pub fn new(
        id: impl Into<String>,
        jurisdiction: Jurisdiction,
        language: Language,
        raw: &str,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let raw_text = text::normalize(raw);
        if raw_text.is_empty() {
            return Err(CorpusError::EmptyDocument(id));
        }
        let sections = detect_sections(&raw_text, jurisdiction);
        Ok(CaseDocument {
            id,
            jurisdiction,
            language,
            raw_text,
            sections,
        })
    }

    /// Builds a document from already-normalized parts, checking invariants.
    pub fn from_parts(
        id: String,
        jurisdiction: Jurisdiction,
        language: Language,
        raw_text: String,
        sections: BTreeMap<SectionKind, Span>,
    ) -> Result<Self, CorpusError> {
        let doc = CaseDocument {
            id,
            jurisdiction,
            language,
            raw_text,
            sections,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.raw_text.trim().is_empty() {
            return Err(CorpusError::EmptyDocument(self.id.clone()));
        }
        let mut spans: Vec<Span> = self.sections.values().copied().collect();
        spans.sort_by_key(|s| s.start);
        let mut prev_end = 0;
        for s in spans {
            let ok = s.start <= s.end
                && s.end <= self.raw_text.len()
                && s.start >= prev_end
                && self.raw_text.is_char_boundary(s.start)
                && self.raw_text.is_char_boundary(s.end);
            if !ok {
                return Err(CorpusError::InvalidSpan {
                    id: self.id.clone(),
                    start: s.start,
                    end: s.end,
                });
            }
            prev_end = s.end;
        }
        Ok(())
    }

    pub fn section(&self, kind: SectionKind) -> Option<Span> {
        self.sections.get(&kind).copied()
    }

    pub fn section_text(&self, kind: SectionKind) -> Option<&str> {
        self.section(kind).map(|s| &self.raw_text[s.start..s.end])
    }
}

/// Candidates a query is ranked against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidatePool {
    /// Every document in the corpus except the query itself.
    EntireCorpus,
    Listed(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum PoolRecord {
    Sentinel(String),
    Listed(Vec<String>),
}

const ENTIRE_CORPUS: &str = "*";

impl From<&CandidatePool> for PoolRecord {
    fn from(p: &CandidatePool) -> Self {
        match p {
            CandidatePool::EntireCorpus => PoolRecord::Sentinel(ENTIRE_CORPUS.to_string()),
            CandidatePool::Listed(ids) => PoolRecord::Listed(ids.clone()),
        }
    }
}

/// One line of the normalized corpus JSONL.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub jurisdiction: Jurisdiction,
    pub language: Language,
    pub text: String,
    #[serde(default)]
    pub sections: BTreeMap<SectionKind, Span>,
    /// Present only on query records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pool: Option<PoolRecord>,
}

/// A non-fatal problem found while loading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadIssue {
    pub severity: Severity,
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

impl LoadIssue {
    pub fn warning(source: impl Into<String>, message: impl Into<String>) -> Self {
        LoadIssue {
            severity: Severity::Warning,
            source: source.into(),
            message: message.into(),
        }
    }

    pub fn error(source: impl Into<String>, message: impl Into<String>) -> Self {
        LoadIssue {
            severity: Severity::Error,
            source: source.into(),
            message: message.into(),
        }
    }
}

/// Immutable collection of cases plus per-query candidate pools.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    documents: BTreeMap<String, CaseDocument>,
    pools: BTreeMap<String, CandidatePool>,
}

impl Corpus {
    pub fn new(
        documents: Vec<CaseDocument>,
        pools: BTreeMap<String, CandidatePool>,
    ) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        for doc in documents {
            if map.contains_key(&doc.id) {
                return Err(CorpusError::DuplicateId(doc.id));
            }
            map.insert(doc.id.clone(), doc);
        }
        for (query, pool) in &pools {
            if !map.contains_key(query) {
                return Err(CorpusError::UnknownQuery(query.clone()));
            }
            if let CandidatePool::Listed(ids) = pool {
                if let Some(missing) = ids.iter().find(|id| !map.contains_key(*id)) {
                    return Err(CorpusError::UnknownPoolMember {
                        query: query.clone(),
                        candidate: missing.clone(),
                    });
                }
            }
        }
        Ok(Corpus {
            documents: map,
            pools,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CaseDocument> {
        self.documents.get(id)
    }

    /// Documents in ascending id order.
    pub fn documents(&self) -> impl Iterator<Item = &CaseDocument> {
        self.documents.values()
    }

    /// Query ids in ascending order.
    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.pools.keys().map(String::as_str)
    }

    pub fn is_query(&self, id: &str) -> bool {
        self.pools.contains_key(id)
    }

    pub fn pool(&self, query: &str) -> Option<&CandidatePool> {
        self.pools.get(query)
    }

    /// Candidate ids for `query`, ascending. The sentinel pool expands to
    /// every other document.
    pub fn resolve_pool(&self, query: &str) -> Option<Vec<&str>> {
        match self.pools.get(query)? {
            CandidatePool::EntireCorpus => Some(
                self.documents
                    .keys()
                    .map(String::as_str)
                    .filter(|id| *id != query)
                    .collect(),
            ),
            CandidatePool::Listed(ids) => {
                let mut v: Vec<&str> = ids.iter().map(String::as_str).collect();
                v.sort_unstable();
                Some(v)
            }
        }
    }

    /// Every document that appears in at least one candidate pool.
    pub fn candidate_ids(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for (query, pool) in &self.pools {
            match pool {
                CandidatePool::EntireCorpus => {
                    out.extend(
                        self.documents
                            .keys()
                            .map(String::as_str)
                            .filter(|id| *id != query),
                    );
                }
                CandidatePool::Listed(ids) => out.extend(ids.iter().map(String::as_str)),
            }
        }
        out
    }

    /// Language of the corpus, taken from its first document.
    pub fn language(&self) -> Option<Language> {
        self.documents.values().next().map(|d| d.language)
    }

    pub fn records(&self) -> impl Iterator<Item = CaseRecord> + '_ {
        self.documents.values().map(|d| CaseRecord {
            id: d.id.clone(),
            jurisdiction: d.jurisdiction,
            language: d.language,
            text: d.raw_text.clone(),
            sections: d.sections.clone(),
            pool: self.pools.get(&d.id).map(PoolRecord::from),
        })
    }

    pub fn to_jsonl(&self) -> String {
        crate::io::to_jsonl(self.records()).expect("corpus records always serialize")
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), CorpusError> {
        crate::io::write_atomic(path, self.to_jsonl().as_bytes()).map_err(|e| CorpusError::io(path, e))
    }

    /// Reads a normalized corpus, failing on any bad record.
    pub fn read_jsonl(path: &Path) -> Result<Self, CorpusError> {
        let (corpus, issues) = Self::read_jsonl_lenient(path)?;
        if let Some(issue) = issues.into_iter().next() {
            return Err(CorpusError::Parse {
                path: path.to_path_buf(),
                message: format!("{}: {}", issue.source, issue.message),
            });
        }
        Ok(corpus)
    }

    /// Reads a normalized corpus, turning malformed lines, invalid documents
    /// and dangling pool members into issues.
    pub fn read_jsonl_lenient(path: &Path) -> Result<(Self, Vec<LoadIssue>), CorpusError> {
        let (records, line_errors) =
            crate::io::read_jsonl_lenient::<CaseRecord>(path).map_err(|e| CorpusError::io(path, e))?;
        let mut issues: Vec<LoadIssue> = line_errors
            .into_iter()
            .map(|e| LoadIssue::error(format!("line {}", e.line), e.message))
            .collect();
        let mut docs = Vec::new();
        let mut pools = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for rec in records {
            if !seen.insert(rec.id.clone()) {
                issues.push(LoadIssue::error(&rec.id, "duplicate case id"));
                continue;
            }
            let pool = rec.pool.clone();
            match CaseDocument::from_parts(rec.id, rec.jurisdiction, rec.language, rec.text, rec.sections) {
                Ok(doc) => {
                    if let Some(p) = pool {
                        let pool = match p {
                            PoolRecord::Sentinel(s) if s == ENTIRE_CORPUS => CandidatePool::EntireCorpus,
                            PoolRecord::Sentinel(s) => {
                                issues.push(LoadIssue::error(&doc.id, format!("unknown pool sentinel {s:?}")));
                                docs.push(doc);
                                continue;
                            }
                            PoolRecord::Listed(ids) => CandidatePool::Listed(ids),
                        };
                        pools.insert(doc.id.clone(), pool);
                    }
                    docs.push(doc);
                }
                Err(e) => issues.push(LoadIssue::error(e_source(&e), e.to_string())),
            }
        }
        let valid: BTreeSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        for (query, pool) in pools.iter_mut() {
            if let CandidatePool::Listed(ids) = pool {
                ids.retain(|id| {
                    let known = valid.contains(id.as_str());
                    if !known {
                        issues.push(LoadIssue::warning(
                            query.as_str(),
                            format!("pool member {id} dropped: no such document"),
                        ));
                    }
                    known
                });
            }
        }
        let corpus = Corpus::new(docs, pools)?;
        Ok((corpus, issues))
    }
}

fn e_source(e: &CorpusError) -> String {
    match e {
        CorpusError::EmptyDocument(id) | CorpusError::InvalidSpan { id, .. } => id.clone(),
        _ => String::new(),
    }
}

/// Binary relevance judgments: query id to the set of relevant case ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelevanceJudgments {
    judgments: BTreeMap<String, BTreeSet<String>>,
}

impl RelevanceJudgments {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the judgments for one query. Empty sets are ignored and
    /// reported back as `false`.
    pub fn insert(&mut self, query: impl Into<String>, relevant: BTreeSet<String>) -> bool {
        if relevant.is_empty() {
            return false;
        }
        self.judgments.insert(query.into(), relevant);
        true
    }

    pub fn get(&self, query: &str) -> Option<&BTreeSet<String>> {
        self.judgments.get(query)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.judgments.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    pub fn avg_relevant_per_query(&self) -> Option<f64> {
        if self.judgments.is_empty() {
            return None;
        }
        let total: usize = self.judgments.values().map(BTreeSet::len).sum();
        Some(total as f64 / self.judgments.len() as f64)
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        crate::io::write_json_pretty(path, self)
    }

    /// Reads `{qid: [docid, ...]}` without checking it against a corpus.
    /// Queries with empty lists are dropped.
    pub fn read_json(path: &Path) -> Result<Self, CorpusError> {
        let raw = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        let map: BTreeMap<String, Vec<String>> =
            serde_json::from_str(&raw).map_err(|e| CorpusError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        let mut out = RelevanceJudgments::new();
        for (q, ids) in map {
            out.insert(q, ids.into_iter().collect());
        }
        Ok(out)
    }
}

impl FromIterator<(String, BTreeSet<String>)> for RelevanceJudgments {
    fn from_iter<T: IntoIterator<Item = (String, BTreeSet<String>)>>(iter: T) -> Self {
        let mut out = RelevanceJudgments::new();
        for (q, rel) in iter {
            out.insert(q, rel);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str) -> CaseDocument {
        CaseDocument::new(id, Jurisdiction::CommonLaw, Language::En, text).unwrap()
    }

    #[test]
    fn empty_document_rejected() {
        let err = CaseDocument::new("x", Jurisdiction::CommonLaw, Language::En, " \n\n ").unwrap_err();
        assert!(matches!(err, CorpusError::EmptyDocument(id) if id == "x"));
    }

    #[test]
    fn overlapping_spans_rejected() {
        let mut sections = BTreeMap::new();
        sections.insert(SectionKind::Name, Span { start: 0, end: 5 });
        sections.insert(SectionKind::Background, Span { start: 3, end: 8 });
        let err = CaseDocument::from_parts(
            "x".into(),
            Jurisdiction::CommonLaw,
            Language::En,
            "0123456789".into(),
            sections,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::InvalidSpan { .. }));
    }

    #[test]
    fn out_of_bounds_span_rejected() {
        let mut sections = BTreeMap::new();
        sections.insert(SectionKind::Name, Span { start: 0, end: 50 });
        assert!(CaseDocument::from_parts(
            "x".into(),
            Jurisdiction::CommonLaw,
            Language::En,
            "short".into(),
            sections,
        )
        .is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Corpus::new(vec![doc("a", "x"), doc("a", "y")], BTreeMap::new()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId(_)));
    }

    #[test]
    fn pools_must_resolve() {
        let mut pools = BTreeMap::new();
        pools.insert("a".to_string(), CandidatePool::Listed(vec!["zz".into()]));
        let err = Corpus::new(vec![doc("a", "x")], pools).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownPoolMember { candidate, .. } if candidate == "zz"));
    }

    #[test]
    fn entire_corpus_excludes_query() {
        let mut pools = BTreeMap::new();
        pools.insert("b".to_string(), CandidatePool::EntireCorpus);
        let c = Corpus::new(vec![doc("c", "x"), doc("a", "y"), doc("b", "z")], pools).unwrap();
        assert_eq!(c.resolve_pool("b").unwrap(), ["a", "c"]);
        assert_eq!(c.candidate_ids().into_iter().collect::<Vec<_>>(), ["a", "c"]);
        assert!(c.resolve_pool("a").is_none());
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut pools = BTreeMap::new();
        pools.insert("q".to_string(), CandidatePool::Listed(vec!["d2".into(), "d1".into()]));
        pools.insert("d1".to_string(), CandidatePool::EntireCorpus);
        let c = Corpus::new(
            vec![
                doc("q", "Background\n\nSome facts here.\n\nAnalysis\n\nThe law."),
                doc("d1", "first"),
                doc("d2", "second\n\npara"),
            ],
            pools,
        )
        .unwrap();
        let path = dir.path().join("corpus.jsonl");
        c.write_jsonl(&path).unwrap();
        let back = Corpus::read_jsonl(&path).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_jsonl(), c.to_jsonl());
    }

    #[test]
    fn lenient_reader_skips_bad_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let good = r#"{"id":"a","jurisdiction":"common_law","language":"en","text":"hello"}"#;
        let empty = r#"{"id":"b","jurisdiction":"common_law","language":"en","text":""}"#;
        std::fs::write(&path, format!("{good}\n{empty}\n{{broken\n")).unwrap();
        let (c, issues) = Corpus::read_jsonl_lenient(&path).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(issues.len(), 2);
        assert!(Corpus::read_jsonl(&path).is_err());
    }

    #[test]
    fn judgments_average() {
        let j: RelevanceJudgments = [
            ("q1".to_string(), ["a", "b"].iter().map(|s| s.to_string()).collect()),
            ("q2".to_string(), ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect()),
        ]
        .into_iter()
        .collect();
        assert_eq!(j.avg_relevant_per_query(), Some(3.0));
        let mut j2 = RelevanceJudgments::new();
        assert!(!j2.insert("q", BTreeSet::new()));
        assert!(j2.is_empty());
    }
}
