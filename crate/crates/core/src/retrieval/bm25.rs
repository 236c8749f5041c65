//! Okapi BM25 with the Lucene-style non-negative IDF
//! `ln((N - df + 0.5) / (df + 0.5) + 1)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{RankedList, RetrievalError, Stage, Tokenizer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// Inverted index over a fixed document collection. Documents are numbered
/// in ascending id order; postings hold `(doc, tf)` sorted by doc.
#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Index {
    params: Bm25Params,
    tokenizer: Tokenizer,
    doc_ids: Vec<String>,
    doc_len: Vec<u32>,
    avgdl: f64,
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

pub fn idf(n: usize, df: usize) -> f64 {
    let (n, df) = (n as f64, df as f64);
    ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
}

/// Term frequencies of `terms`, sorted by term.
pub fn term_counts<S: AsRef<str>>(terms: &[S]) -> BTreeMap<&str, u32> {
    let mut out = BTreeMap::new();
    for t in terms {
        *out.entry(t.as_ref()).or_insert(0) += 1;
    }
    out
}

impl Bm25Index {
    /// Indexes `(id, text)` pairs with `tokenizer`.
    pub fn build<I, S, T>(docs: I, tokenizer: Tokenizer, params: Bm25Params) -> Result<Self, RetrievalError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let docs: Vec<(String, Vec<String>)> = docs
            .into_iter()
            .map(|(id, text)| (id.into(), tokenizer.tokenize(text.as_ref())))
            .collect();
        Self::from_terms(docs, tokenizer, params)
    }

    /// Indexes pre-tokenized documents.
    pub fn from_terms(
        mut docs: Vec<(String, Vec<String>)>,
        tokenizer: Tokenizer,
        params: Bm25Params,
    ) -> Result<Self, RetrievalError> {
        if docs.is_empty() {
            return Err(RetrievalError::EmptyCollection);
        }
        docs.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = docs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(RetrievalError::DuplicateDocument(w[0].0.clone()));
        }
        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        let mut doc_ids = Vec::with_capacity(docs.len());
        let mut doc_len = Vec::with_capacity(docs.len());
        for (i, (id, terms)) in docs.into_iter().enumerate() {
            doc_len.push(terms.len() as u32);
            for (term, tf) in term_counts(&terms) {
                postings.entry(term.to_string()).or_default().push((i as u32, tf));
            }
            doc_ids.push(id);
        }
        let total: u64 = doc_len.iter().map(|&l| u64::from(l)).sum();
        Ok(Bm25Index {
            params,
            tokenizer,
            avgdl: total as f64 / doc_ids.len() as f64,
            doc_ids,
            doc_len,
            postings,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn tokenizer(&self) -> Tokenizer {
        self.tokenizer
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    fn doc_index(&self, id: &str) -> Option<usize> {
        self.doc_ids.binary_search_by(|d| d.as_str().cmp(id)).ok()
    }

    pub fn doc_len(&self, id: &str) -> Option<u32> {
        self.doc_index(id).map(|i| self.doc_len[i])
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn tf(&self, term: &str, id: &str) -> u32 {
        let Some(doc) = self.doc_index(id) else { return 0 };
        self.postings
            .get(term)
            .and_then(|p| p.binary_search_by_key(&(doc as u32), |e| e.0).ok().map(|i| p[i].1))
            .unwrap_or(0)
    }

    fn term_weight(&self, tf: u32, dl: u32) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = f64::from(tf);
        let norm = if self.avgdl > 0.0 {
            1.0 - b + b * f64::from(dl) / self.avgdl
        } else {
            1.0
        };
        tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 of one candidate. Repeated query terms count once per occurrence.
    pub fn score<S: AsRef<str>>(&self, query_terms: &[S], candidate: &str) -> Result<f64, RetrievalError> {
        let doc = self
            .doc_index(candidate)
            .ok_or_else(|| RetrievalError::UnknownDocument(candidate.to_string()))?;
        let dl = self.doc_len[doc];
        let n = self.num_docs();
        let mut total = 0.0;
        for (term, qtf) in term_counts(query_terms) {
            let Some(p) = self.postings.get(term) else { continue };
            if let Ok(i) = p.binary_search_by_key(&(doc as u32), |e| e.0) {
                total += f64::from(qtf) * idf(n, p.len()) * self.term_weight(p[i].1, dl);
            }
        }
        Ok(total)
    }

    /// Scores of every pool member, in pool order.
    pub fn score_pool<S: AsRef<str>>(&self, query_terms: &[S], pool: &[&str]) -> Result<Vec<(String, f64)>, RetrievalError> {
        let mut slot = vec![usize::MAX; self.num_docs()];
        for (j, id) in pool.iter().enumerate() {
            let doc = self
                .doc_index(id)
                .ok_or_else(|| RetrievalError::UnknownDocument(id.to_string()))?;
            slot[doc] = j;
        }
        let mut scores = vec![0.0f64; pool.len()];
        let n = self.num_docs();
        for (term, qtf) in term_counts(query_terms) {
            let Some(p) = self.postings.get(term) else { continue };
            let w = f64::from(qtf) * idf(n, p.len());
            for &(doc, tf) in p {
                let j = slot[doc as usize];
                if j != usize::MAX {
                    scores[j] += w * self.term_weight(tf, self.doc_len[doc as usize]);
                }
            }
        }
        Ok(pool.iter().map(|id| id.to_string()).zip(scores).collect())
    }

    /// Top `k` of `pool` for `query_text`.
    pub fn retrieve(&self, query_id: &str, query_text: &str, pool: &[&str], k: usize) -> Result<RankedList, RetrievalError> {
        let terms = self.tokenizer.tokenize(query_text);
        self.retrieve_terms(query_id, &terms, pool, k)
    }

    pub fn retrieve_terms<S: AsRef<str>>(
        &self,
        query_id: &str,
        terms: &[S],
        pool: &[&str],
        k: usize,
    ) -> Result<RankedList, RetrievalError> {
        if pool.is_empty() {
            return Err(RetrievalError::EmptyPool(query_id.to_string()));
        }
        let scores = self.score_pool(terms, pool)?;
        RankedList::from_scores(query_id, Stage::Bm25, scores, k)
    }

    /// Versioned binary snapshot. Identical indexes give identical bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"PCBM");
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&self.params.k1.to_le_bytes());
        out.extend_from_slice(&self.params.b.to_le_bytes());
        put_str(&mut out, self.tokenizer.name());
        out.extend_from_slice(&(self.doc_ids.len() as u64).to_le_bytes());
        for (id, len) in self.doc_ids.iter().zip(&self.doc_len) {
            put_str(&mut out, id);
            out.extend_from_slice(&len.to_le_bytes());
        }
        out.extend_from_slice(&(self.postings.len() as u64).to_le_bytes());
        for (term, p) in &self.postings {
            put_str(&mut out, term);
            out.extend_from_slice(&(p.len() as u32).to_le_bytes());
            for (doc, tf) in p {
                out.extend_from_slice(&doc.to_le_bytes());
                out.extend_from_slice(&tf.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RetrievalError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != b"PCBM" {
            return Err(RetrievalError::Snapshot("bad magic".into()));
        }
        let version = r.u32()?;
        if version != 1 {
            return Err(RetrievalError::Snapshot(format!("unsupported version {version}")));
        }
        let params = Bm25Params {
            k1: f64::from_le_bytes(r.take(8)?.try_into().unwrap()),
            b: f64::from_le_bytes(r.take(8)?.try_into().unwrap()),
        };
        let tokenizer: Tokenizer = r.string()?.parse().map_err(RetrievalError::Snapshot)?;
        let n = r.u64()? as usize;
        let mut docs = Vec::new();
        for _ in 0..n {
            let id = r.string()?;
            let len = r.u32()?;
            docs.push((id, len));
        }
        let terms = r.u64()? as usize;
        let mut postings = BTreeMap::new();
        for _ in 0..terms {
            let term = r.string()?;
            let count = r.u32()? as usize;
            let mut p = Vec::new();
            for _ in 0..count {
                let doc = r.u32()?;
                let tf = r.u32()?;
                if doc as usize >= n {
                    return Err(RetrievalError::Snapshot(format!("posting refers to document {doc}")));
                }
                p.push((doc, tf));
            }
            postings.insert(term, p);
        }
        if r.pos != bytes.len() {
            return Err(RetrievalError::Snapshot("trailing bytes".into()));
        }
        if n == 0 {
            return Err(RetrievalError::EmptyCollection);
        }
        let (doc_ids, doc_len): (Vec<String>, Vec<u32>) = docs.into_iter().unzip();
        let total: u64 = doc_len.iter().map(|&l| u64::from(l)).sum();
        Ok(Bm25Index {
            params,
            tokenizer,
            avgdl: total as f64 / n as f64,
            doc_ids,
            doc_len,
            postings,
        })
    }

    /// Human-readable dump for debugging.
    pub fn debug_json(&self) -> serde_json::Value {
        let docs: BTreeMap<&str, u32> = self.doc_ids.iter().map(String::as_str).zip(self.doc_len.iter().copied()).collect();
        let terms: BTreeMap<&str, BTreeMap<&str, u32>> = self
            .postings
            .iter()
            .map(|(t, p)| {
                (
                    t.as_str(),
                    p.iter().map(|(d, tf)| (self.doc_ids[*d as usize].as_str(), *tf)).collect(),
                )
            })
            .collect();
        serde_json::json!({
            "params": self.params,
            "tokenizer": self.tokenizer,
            "num_docs": self.num_docs(),
            "avgdl": self.avgdl,
            "doc_len": docs,
            "postings": terms,
        })
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], RetrievalError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| RetrievalError::Snapshot("truncated snapshot".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, RetrievalError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, RetrievalError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, RetrievalError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| RetrievalError::Snapshot(e.to_string()))
    }
}
