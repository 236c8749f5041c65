//! Legal fact and legal issue extraction.
//!
//! Common law: facts are a summary of the background section (or of the whole
//! case), issues are the sentences that contain a suppressed-citation
//! placeholder. Civil law: facts are the section opened by 经审理查明, issues
//! are the charge names found in the text.

mod lexicon;
mod segment;
mod summarizer;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use lexicon::{ChargeLexicon, ChargeMatch, LexiconError, CHARGE_SEPARATOR};
pub use segment::{sentence_spans, sentences};
pub use summarizer::{RemoteSummarizer, Summarizer, SummarizerError};

use crate::corpus::{CaseDocument, Jurisdiction, Language, SectionKind};

pub const SUMMARY_INSTRUCTION: &str = "Summarise in 50 words: ";
pub const DEFAULT_PLACEHOLDER: &str = "FRAGMENT_SUPPRESSED";
pub const LEAD_WORDS: usize = 50;
pub const LEAD_CHARS: usize = 100;
pub const FACT_MARKER: &str = "经审理查明";
pub const FACT_END_MARKERS: [&str; 3] = ["本院认为", "上述事实", "综上"];
const MARKER_PUNCTUATION: [char; 4] = ['：', ':', '，', ','];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactProvenance {
    Summarizer,
    MarkerSection,
    LeadFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueProvenance {
    PlaceholderSentences,
    ChargeMatch,
    Empty,
}

/// Extracted legal facts and legal issues of one case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalFeatures {
    pub case_id: String,
    pub fact_text: String,
    pub issue_text: String,
    pub fact_provenance: FactProvenance,
    pub issue_provenance: IssueProvenance,
}

#[derive(Debug, thiserror::Error)]
pub enum ExtractionError {
    #[error("empty document {0}")]
    EmptyDocument(String),
    #[error("charge lexicon is empty")]
    EmptyLexicon,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactResult {
    pub text: String,
    pub provenance: FactProvenance,
    /// Set when the summarizer failed and the lead fallback was used.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssueResult {
    pub text: String,
    pub provenance: IssueProvenance,
}

fn ensure_non_empty(doc: &CaseDocument) -> Result<(), ExtractionError> {
    if doc.raw_text.trim().is_empty() {
        return Err(ExtractionError::EmptyDocument(doc.id.clone()));
    }
    Ok(())
}

/// First `n` whitespace tokens joined by single spaces.
pub fn lead_words(text: &str, n: usize) -> String {
    text.split_whitespace().take(n).collect::<Vec<_>>().join(" ")
}

/// First `n` characters.
pub fn lead_chars(text: &str, n: usize) -> String {
    text.chars().take(n).collect()
}

/// Background section body without its heading paragraph, else the whole text.
fn background_or_whole(doc: &CaseDocument) -> &str {
    doc.section_text(SectionKind::Background)
        .map(|t| match t.find(crate::text::PARAGRAPH_BREAK) {
            Some(i) => t[i..].trim(),
            None => "",
        })
        .filter(|t| !t.is_empty())
        .unwrap_or(&doc.raw_text)
}

pub fn extract_facts_common_law(
    doc: &CaseDocument,
    summarizer: Option<&dyn Summarizer>,
) -> Result<FactResult, ExtractionError> {
    ensure_non_empty(doc)?;
    let source = background_or_whole(doc);
    let failure = match summarizer {
        None => "no summarizer configured".to_string(),
        Some(s) => match s.summarize(source, SUMMARY_INSTRUCTION) {
            Ok(summary) if !summary.trim().is_empty() => {
                return Ok(FactResult {
                    text: summary.trim().to_string(),
                    provenance: FactProvenance::Summarizer,
                    warning: None,
                })
            }
            Ok(_) => "summarizer returned an empty summary".to_string(),
            Err(e) => e.to_string(),
        },
    };
    Ok(FactResult {
        text: lead_words(source, LEAD_WORDS),
        provenance: FactProvenance::LeadFallback,
        warning: Some(format!("{}: {failure}; using the first {LEAD_WORDS} words", doc.id)),
    })
}

pub fn extract_facts_civil_law(doc: &CaseDocument) -> Result<FactResult, ExtractionError> {
    ensure_non_empty(doc)?;
    let text = &doc.raw_text;
    let section = text.find(FACT_MARKER).and_then(|at| {
        let mut start = at + FACT_MARKER.len();
        if let Some(c) = text[start..].chars().next().filter(|c| MARKER_PUNCTUATION.contains(c)) {
            start += c.len_utf8();
        }
        let end = FACT_END_MARKERS
            .iter()
            .filter_map(|m| text[start..].find(m).map(|i| start + i))
            .min()
            .or_else(|| {
                doc.section(SectionKind::Background)
                    .map(|s| s.end)
                    .filter(|&e| e > start)
            })
            .unwrap_or(text.len());
        let slice = text[start..end].trim();
        (!slice.is_empty()).then(|| slice.to_string())
    });
    Ok(match section {
        Some(text) => FactResult {
            text,
            provenance: FactProvenance::MarkerSection,
            warning: None,
        },
        None => FactResult {
            text: lead_chars(text, LEAD_CHARS),
            provenance: FactProvenance::LeadFallback,
            warning: None,
        },
    })
}

/// Sentences containing any placeholder, in order, exact duplicates dropped,
/// joined by single spaces.
pub fn extract_issues_common_law(doc: &CaseDocument, placeholders: &[String]) -> IssueResult {
    let mut seen = HashSet::new();
    let picked: Vec<&str> = sentences(&doc.raw_text, doc.language)
        .into_iter()
        .filter(|s| placeholders.iter().any(|p| !p.is_empty() && s.contains(p.as_str())))
        .filter(|s| seen.insert(*s))
        .collect();
    if picked.is_empty() {
        return IssueResult {
            text: String::new(),
            provenance: IssueProvenance::Empty,
        };
    }
    IssueResult {
        text: picked.join(" "),
        provenance: IssueProvenance::PlaceholderSentences,
    }
}

pub fn extract_issues_civil_law(
    doc: &CaseDocument,
    lexicon: &ChargeLexicon,
) -> Result<IssueResult, ExtractionError> {
    if lexicon.is_empty() {
        return Err(ExtractionError::EmptyLexicon);
    }
    let found = lexicon.find(&doc.raw_text);
    if found.is_empty() {
        return Ok(IssueResult {
            text: String::new(),
            provenance: IssueProvenance::Empty,
        });
    }
    Ok(IssueResult {
        text: found.join(CHARGE_SEPARATOR),
        provenance: IssueProvenance::ChargeMatch,
    })
}

/// What extraction needs besides the document.
#[derive(Clone, Copy)]
pub struct ExtractionDeps<'a> {
    pub summarizer: Option<&'a dyn Summarizer>,
    pub lexicon: &'a ChargeLexicon,
    pub placeholders: &'a [String],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub features: LegalFeatures,
    pub warnings: Vec<String>,
}

pub fn extract_features(doc: &CaseDocument, deps: &ExtractionDeps<'_>) -> Result<Extraction, ExtractionError> {
    ensure_non_empty(doc)?;
    let (fact, issue) = match doc.jurisdiction {
        Jurisdiction::CommonLaw => (
            extract_facts_common_law(doc, deps.summarizer)?,
            extract_issues_common_law(doc, deps.placeholders),
        ),
        Jurisdiction::CivilLaw => (extract_facts_civil_law(doc)?, extract_issues_civil_law(doc, deps.lexicon)?),
    };
    Ok(Extraction {
        warnings: fact.warning.into_iter().collect(),
        features: LegalFeatures {
            case_id: doc.id.clone(),
            fact_text: fact.text,
            issue_text: issue.text,
            fact_provenance: fact.provenance,
            issue_provenance: issue.provenance,
        },
    })
}

/// Splits an issue text back into the units it was built from: charges for
/// Chinese, sentences for English.
pub fn issue_units(issue_text: &str, language: Language) -> Vec<String> {
    match language {
        Language::Zh => issue_text
            .split(CHARGE_SEPARATOR)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect(),
        Language::En => sentences(issue_text, language).into_iter().map(str::to_string).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FirstSentence;

    impl Summarizer for FirstSentence {
        fn version(&self) -> String {
            "first-sentence".into()
        }

        fn summarize(&self, text: &str, instruction: &str) -> Result<String, SummarizerError> {
            assert_eq!(instruction, SUMMARY_INSTRUCTION);
            Ok(sentences(text, Language::En)[0].to_string())
        }
    }

    struct Offline;

    impl Summarizer for Offline {
        fn version(&self) -> String {
            "offline".into()
        }

        fn summarize(&self, _: &str, _: &str) -> Result<String, SummarizerError> {
            Err(SummarizerError::Unavailable("connection refused".into()))
        }
    }

    fn en(text: &str) -> CaseDocument {
        CaseDocument::new("c", Jurisdiction::CommonLaw, Language::En, text).unwrap()
    }

    fn zh(text: &str) -> CaseDocument {
        CaseDocument::new("z", Jurisdiction::CivilLaw, Language::Zh, text).unwrap()
    }

    fn placeholders() -> Vec<String> {
        vec![DEFAULT_PLACEHOLDER.to_string()]
    }

    #[test]
    fn summarizer_used_on_background() {
        let doc = en("Smith v. Jones\n\nBackground\n\nA sued B. The claim was long.\n\nAnalysis\n\nWe agree.");
        let r = extract_facts_common_law(&doc, Some(&FirstSentence)).unwrap();
        assert_eq!(r.text, "A sued B.");
        assert_eq!(r.provenance, FactProvenance::Summarizer);
    }

    #[test]
    fn offline_summarizer_falls_back() {
        let words: Vec<String> = (1..=60).map(|i| format!("w{i}")).collect();
        let doc = en(&words.join(" "));
        let r = extract_facts_common_law(&doc, Some(&Offline)).unwrap();
        assert_eq!(r.provenance, FactProvenance::LeadFallback);
        assert_eq!(r.text, words[..50].join(" "));
        assert!(r.warning.unwrap().contains("connection refused"));
    }

    #[test]
    fn placeholder_sentences() {
        let doc = en("One. Two FRAGMENT_SUPPRESSED here. Three. FRAGMENT_SUPPRESSED four.");
        let r = extract_issues_common_law(&doc, &placeholders());
        assert_eq!(r.text, "Two FRAGMENT_SUPPRESSED here. FRAGMENT_SUPPRESSED four.");
        assert_eq!(r.provenance, IssueProvenance::PlaceholderSentences);
    }

    #[test]
    fn placeholder_dedup_and_empty() {
        let doc = en("See FRAGMENT_SUPPRESSED. Then. See FRAGMENT_SUPPRESSED.");
        assert_eq!(extract_issues_common_law(&doc, &placeholders()).text, "See FRAGMENT_SUPPRESSED.");
        let none = extract_issues_common_law(&en("Nothing here."), &placeholders());
        assert_eq!((none.text.as_str(), none.provenance), ("", IssueProvenance::Empty));
    }

    #[test]
    fn civil_marker_slice() {
        let doc = zh("某某法院刑事判决书。经审理查明：2019年被告人王某盗窃财物。本院认为，被告人构成盗窃罪。");
        let r = extract_facts_civil_law(&doc).unwrap();
        assert_eq!(r.text, "2019年被告人王某盗窃财物。");
        assert_eq!(r.provenance, FactProvenance::MarkerSection);
    }

    #[test]
    fn civil_first_marker_only() {
        let doc = zh("经审理查明：甲事实。经审理查明：乙事实。综上，判决。");
        assert_eq!(extract_facts_civil_law(&doc).unwrap().text, "甲事实。经审理查明：乙事实。");
    }

    #[test]
    fn civil_fallback() {
        let text: String = "字".repeat(300);
        let r = extract_facts_civil_law(&zh(&text)).unwrap();
        assert_eq!(r.text.chars().count(), 100);
        assert_eq!(r.provenance, FactProvenance::LeadFallback);
    }

    #[test]
    fn civil_charges() {
        let lex = ChargeLexicon::from_charges(["盗窃", "抢劫", "诈骗"]).unwrap();
        let r = extract_issues_civil_law(&zh("被告人先抢劫后盗窃。"), &lex).unwrap();
        assert_eq!(r.text, "抢劫、盗窃");
        assert_eq!(r.provenance, IssueProvenance::ChargeMatch);
    }

    #[test]
    fn civil_both_fallbacks() {
        let lex = ChargeLexicon::builtin();
        let deps = ExtractionDeps {
            summarizer: None,
            lexicon: &lex,
            placeholders: &[],
        };
        let out = extract_features(&zh("本案无关内容。"), &deps).unwrap().features;
        assert_eq!(out.fact_provenance, FactProvenance::LeadFallback);
        assert_eq!(out.issue_provenance, IssueProvenance::Empty);
        assert_eq!(out.fact_text, "本案无关内容。");
    }

    #[test]
    fn units() {
        assert_eq!(issue_units("抢劫罪、盗窃罪", Language::Zh), ["抢劫罪", "盗窃罪"]);
        assert_eq!(issue_units("A x. B y.", Language::En), ["A x.", "B y."]);
        assert!(issue_units("", Language::Zh).is_empty());
    }
}
