//! Dataset loaders.
//!
//! COLIEE layout: `<root>/*.txt`, one case per file, plus
//! `<root>/queries.manifest` listing query ids one per line. Every query is
//! ranked against the entire corpus.
//!
//! LeCaRD layout: a JSONL query file (`{"id", "text"}` per line), candidates
//! as `<root>/<query-id>/<candidate-id>.txt`, and a labels JSON
//! `{query-id: [candidate-id, ...]}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use super::{
    remove_french, CandidatePool, CaseDocument, Corpus, CorpusError, Jurisdiction, Language,
    LoadIssue, RelevanceJudgments,
};

pub const COLIEE_MANIFEST: &str = "queries.manifest";
const LECARD_POOL_SIZE: usize = 100;

/// A loaded corpus with whatever went wrong along the way.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub judgments: Option<RelevanceJudgments>,
    pub issues: Vec<LoadIssue>,
}

fn strip_txt(id: &str) -> &str {
    id.strip_suffix(".txt").unwrap_or(id)
}

fn txt_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CorpusError::io(dir, e))? {
        let entry = entry.map_err(|e| CorpusError::io(dir, e))?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "txt") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn file_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_case(
    path: &Path,
    jurisdiction: Jurisdiction,
    language: Language,
) -> Result<CaseDocument, LoadIssue> {
    let source = path.display().to_string();
    let bytes = fs::read(path).map_err(|e| LoadIssue::error(&source, e.to_string()))?;
    let raw = String::from_utf8(bytes).map_err(|e| LoadIssue::error(&source, e.to_string()))?;
    case_from_text(file_id(path), &raw, jurisdiction, language).map_err(|e| LoadIssue::error(&source, e.to_string()))
}

fn case_from_text(
    id: String,
    raw: &str,
    jurisdiction: Jurisdiction,
    language: Language,
) -> Result<CaseDocument, CorpusError> {
    let mut text = crate::text::normalize(raw);
    if language == Language::En {
        text = remove_french(&text);
    }
    CaseDocument::new(id, jurisdiction, language, &text)
}

/// Loads a COLIEE-style directory. Unreadable or empty files become error
/// issues and are skipped; an empty directory or a missing manifest is fatal.
pub fn load_coliee_corpus(root: &Path) -> Result<LoadedCorpus, CorpusError> {
    let files = txt_files(root)?;
    if files.is_empty() {
        return Err(CorpusError::NoCaseFiles(root.to_path_buf()));
    }
    let manifest_path = root.join(COLIEE_MANIFEST);
    if !manifest_path.is_file() {
        return Err(CorpusError::MissingManifest(manifest_path));
    }
    let manifest = fs::read_to_string(&manifest_path).map_err(|e| CorpusError::io(&manifest_path, e))?;

    let results: Vec<Result<CaseDocument, LoadIssue>> = files
        .par_iter()
        .map(|p| read_case(p, Jurisdiction::CommonLaw, Language::En))
        .collect();
    let mut issues = Vec::new();
    let mut docs = Vec::new();
    for r in results {
        match r {
            Ok(d) => docs.push(d),
            Err(issue) => issues.push(issue),
        }
    }
    if docs.is_empty() {
        return Err(CorpusError::NoCaseFiles(root.to_path_buf()));
    }
    let known: BTreeSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    let mut pools = BTreeMap::new();
    for line in manifest.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let id = strip_txt(line);
        if known.contains(id) {
            pools.insert(id.to_string(), CandidatePool::EntireCorpus);
        } else {
            issues.push(LoadIssue::warning(
                manifest_path.display().to_string(),
                format!("query {id} has no loaded case file; dropped"),
            ));
        }
    }
    let corpus = Corpus::new(docs, pools)?;
    Ok(LoadedCorpus {
        corpus,
        judgments: None,
        issues,
    })
}

#[derive(Deserialize)]
struct QueryLine {
    id: serde_json::Value,
    text: String,
}

fn json_id(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Loads a LeCaRD-style layout together with its golden labels.
pub fn load_lecard_corpus(
    query_file: &Path,
    candidates_root: &Path,
    labels_file: &Path,
) -> Result<LoadedCorpus, CorpusError> {
    let raw = fs::read_to_string(query_file).map_err(|e| CorpusError::io(query_file, e))?;
    let mut issues = Vec::new();
    let mut queries = Vec::new();
    for (n, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let source = format!("{}:{}", query_file.display(), n + 1);
        let parsed: QueryLine = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            path: query_file.to_path_buf(),
            message: format!("line {}: {e}", n + 1),
        })?;
        let Some(id) = json_id(&parsed.id) else {
            issues.push(LoadIssue::error(source, "query id must be a string or number"));
            continue;
        };
        match case_from_text(id, &parsed.text, Jurisdiction::CivilLaw, Language::Zh) {
            Ok(doc) => queries.push(doc),
            Err(e) => issues.push(LoadIssue::error(source, e.to_string())),
        }
    }

    let mut docs: BTreeMap<String, CaseDocument> = BTreeMap::new();
    let mut pools = BTreeMap::new();
    for q in &queries {
        let dir = candidates_root.join(&q.id);
        if !dir.is_dir() {
            issues.push(LoadIssue::warning(dir.display().to_string(), "no candidate directory; query dropped"));
            continue;
        }
        let files = txt_files(&dir)?;
        let loaded: Vec<Result<CaseDocument, LoadIssue>> = files
            .par_iter()
            .map(|p| read_case(p, Jurisdiction::CivilLaw, Language::Zh))
            .collect();
        let mut pool = Vec::new();
        for r in loaded {
            match r {
                Ok(d) => {
                    pool.push(d.id.clone());
                    match docs.get(&d.id) {
                        Some(existing) if existing.raw_text != d.raw_text => {
                            issues.push(LoadIssue::warning(
                                dir.display().to_string(),
                                format!("candidate {} differs from an earlier copy; keeping the first", d.id),
                            ));
                        }
                        Some(_) => {}
                        None => {
                            docs.insert(d.id.clone(), d);
                        }
                    }
                }
                Err(issue) => issues.push(issue),
            }
        }
        if pool.is_empty() {
            issues.push(LoadIssue::warning(dir.display().to_string(), "empty candidate pool; query dropped"));
            continue;
        }
        if pool.len() != LECARD_POOL_SIZE {
            issues.push(LoadIssue::warning(
                dir.display().to_string(),
                format!("pool of query {} has {} candidates, expected {LECARD_POOL_SIZE}", q.id, pool.len()),
            ));
        }
        pools.insert(q.id.clone(), CandidatePool::Listed(pool));
    }
    for q in queries {
        if let Some(existing) = docs.get(&q.id) {
            if existing.raw_text != q.raw_text {
                return Err(CorpusError::DuplicateId(q.id));
            }
            continue;
        }
        docs.insert(q.id.clone(), q);
    }
    let corpus = Corpus::new(docs.into_values().collect(), pools)?;
    let (judgments, label_issues) = load_judgments(labels_file, &corpus)?;
    issues.extend(label_issues);
    Ok(LoadedCorpus {
        corpus,
        judgments: Some(judgments),
        issues,
    })
}

/// Reads `{query-id: [case-id, ...]}` and checks it against `corpus`.
///
/// A label naming a case outside the query's pool is fatal. Queries that are
/// unknown or have no relevant cases are dropped with a warning. A `.txt`
/// suffix on ids is ignored.
pub fn load_judgments(
    path: &Path,
    corpus: &Corpus,
) -> Result<(RelevanceJudgments, Vec<LoadIssue>), CorpusError> {
    let raw = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    let value: BTreeMap<String, Vec<serde_json::Value>> =
        serde_json::from_str(&raw).map_err(|e| CorpusError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let source = path.display().to_string();
    let mut issues = Vec::new();
    let mut judgments = RelevanceJudgments::new();
    for (qid, ids) in value {
        let qid = strip_txt(&qid).to_string();
        let Some(pool) = corpus.resolve_pool(&qid) else {
            issues.push(LoadIssue::warning(&source, format!("labels for unknown query {qid} ignored")));
            continue;
        };
        let pool: BTreeSet<&str> = pool.into_iter().collect();
        let mut relevant = BTreeSet::new();
        for v in &ids {
            let Some(id) = json_id(v) else {
                return Err(CorpusError::Parse {
                    path: path.to_path_buf(),
                    message: format!("query {qid}: label ids must be strings or numbers"),
                });
            };
            let id = strip_txt(&id).to_string();
            if !pool.contains(id.as_str()) {
                return Err(CorpusError::MissingCandidate {
                    query: qid,
                    candidate: id,
                });
            }
            relevant.insert(id);
        }
        if !judgments.insert(qid.clone(), relevant) {
            issues.push(LoadIssue::warning(&source, format!("query {qid} has no relevant cases; rejected")));
        }
    }
    Ok((judgments, issues))
}
