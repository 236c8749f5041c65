//! Heuristic section detection.
//!
//! English judgments: a short paragraph whose text, after dropping an
//! enumerator ("I.", "2.", "(a)") and a trailing colon, is a known heading
//! opens a section. Chinese judgments: fixed phrases open the background
//! (公诉机关指控 / 经审理查明), analysis (本院认为) and order (判决如下)
//! sections. Text before the first detected section is the name section.
//! Only the first occurrence of each kind counts; a section runs until the
//! next detected section or the end of the document.

use std::collections::BTreeMap;

use super::{Jurisdiction, SectionKind, Span};
use crate::text;

const BACKGROUND_HEADINGS: &[&str] = &[
    "background",
    "facts",
    "the facts",
    "factual background",
    "background facts",
    "statement of facts",
];
const ANALYSIS_HEADINGS: &[&str] = &[
    "analysis",
    "discussion",
    "issues",
    "the issues",
    "issue",
    "issues and analysis",
    "analysis and decision",
];
const ORDER_HEADINGS: &[&str] = &[
    "order",
    "judgment",
    "judgement",
    "conclusion",
    "disposition",
    "decision",
];

const ZH_BACKGROUND: &[&str] = &["公诉机关指控", "检察院指控", "经审理查明"];
const ZH_ANALYSIS: &[&str] = &["本院认为"];
const ZH_ORDER: &[&str] = &["判决如下"];

pub fn detect_sections(text: &str, jurisdiction: Jurisdiction) -> BTreeMap<SectionKind, Span> {
    let starts = match jurisdiction {
        Jurisdiction::CommonLaw => english_markers(text),
        Jurisdiction::CivilLaw => chinese_markers(text),
    };
    spans_from_markers(text.len(), starts)
}

fn spans_from_markers(
    len: usize,
    mut markers: Vec<(usize, SectionKind)>,
) -> BTreeMap<SectionKind, Span> {
    markers.sort();
    let mut out = BTreeMap::new();
    if markers.is_empty() {
        return out;
    }
    if markers[0].0 > 0 {
        out.insert(SectionKind::Name, Span { start: 0, end: markers[0].0 });
    }
    for (i, &(start, kind)) in markers.iter().enumerate() {
        let end = markers.get(i + 1).map_or(len, |m| m.0);
        out.insert(kind, Span { start, end });
    }
    out
}

fn heading_kind(paragraph: &str) -> Option<SectionKind> {
    if paragraph.split_whitespace().count() > 6 {
        return None;
    }
    let lower = paragraph.to_lowercase();
    let mut words: Vec<&str> = lower.split_whitespace().collect();
    if words.len() > 1 && is_enumerator(words[0]) {
        words.remove(0);
    }
    let joined = words.join(" ");
    let key = joined.trim_end_matches([':', '.']).trim();
    if BACKGROUND_HEADINGS.contains(&key) {
        Some(SectionKind::Background)
    } else if ANALYSIS_HEADINGS.contains(&key) {
        Some(SectionKind::Analysis)
    } else if ORDER_HEADINGS.contains(&key) {
        Some(SectionKind::Order)
    } else {
        None
    }
}

/// "iv.", "2)", "(a)", "[3]", "b." and similar list markers.
fn is_enumerator(word: &str) -> bool {
    let inner = word.trim_start_matches(['(', '[']);
    let inner = inner.trim_end_matches(['.', ')', ']']);
    if inner.is_empty() || inner.len() == word.len() {
        return false;
    }
    inner.chars().all(|c| c.is_ascii_digit())
        || inner.chars().all(|c| "ivxlc".contains(c))
        || (inner.len() == 1 && inner.chars().all(|c| c.is_ascii_lowercase()))
}

fn english_markers(text: &str) -> Vec<(usize, SectionKind)> {
    let mut seen = BTreeMap::new();
    for (start, end) in text::paragraph_spans(text) {
        if let Some(kind) = heading_kind(&text[start..end]) {
            seen.entry(kind).or_insert(start);
        }
    }
    seen.into_iter().map(|(k, s)| (s, k)).collect()
}

fn chinese_markers(text: &str) -> Vec<(usize, SectionKind)> {
    let first = |phrases: &[&str]| phrases.iter().filter_map(|p| text.find(p)).min();
    let mut out = Vec::new();
    let background = first(ZH_BACKGROUND);
    if let Some(b) = background {
        out.push((b, SectionKind::Background));
    }
    let after = background.unwrap_or(0);
    let find_after = |phrases: &[&str]| {
        phrases
            .iter()
            .filter_map(|p| text[after..].find(p).map(|i| i + after))
            .min()
    };
    if let Some(a) = find_after(ZH_ANALYSIS) {
        out.push((a, SectionKind::Analysis));
    }
    if let Some(o) = find_after(ZH_ORDER) {
        out.push((o, SectionKind::Order));
    }
    // Distinct kinds could in principle share a start; keep the first.
    out.sort();
    out.dedup_by_key(|m| m.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_headings() {
        let t = text::normalize(
            "Smith v. Jones\n\nI. Background\n\nThe parties met.\n\nII. Analysis:\n\nThe law says.\n\nORDER\n\nDismissed.",
        );
        let s = detect_sections(&t, Jurisdiction::CommonLaw);
        let get = |k| &t[s[&k].start..s[&k].end];
        assert_eq!(get(SectionKind::Name), "Smith v. Jones\n\n");
        assert_eq!(get(SectionKind::Background), "I. Background\n\nThe parties met.\n\n");
        assert_eq!(get(SectionKind::Analysis), "II. Analysis:\n\nThe law says.\n\n");
        assert_eq!(get(SectionKind::Order), "ORDER\n\nDismissed.");
    }

    #[test]
    fn long_paragraph_is_not_heading() {
        let t = "The background of this matter is long and winding indeed.";
        assert!(detect_sections(t, Jurisdiction::CommonLaw).is_empty());
    }

    #[test]
    fn chinese_markers_found() {
        let t = "某某盗窃案刑事判决书公诉机关指控被告人盗窃。经审理查明：被告人盗窃财物。本院认为被告人构成盗窃罪。判决如下：有期徒刑一年。";
        let s = detect_sections(t, Jurisdiction::CivilLaw);
        assert_eq!(&t[s[&SectionKind::Name].start..s[&SectionKind::Name].end], "某某盗窃案刑事判决书");
        assert!(t[s[&SectionKind::Background].start..].starts_with("公诉机关指控"));
        assert!(t[s[&SectionKind::Analysis].start..].starts_with("本院认为"));
        assert!(t[s[&SectionKind::Order].start..].starts_with("判决如下"));
        assert_eq!(s[&SectionKind::Background].end, s[&SectionKind::Analysis].start);
    }

    #[test]
    fn enumerators() {
        assert!(is_enumerator("iv."));
        assert!(is_enumerator("(a)"));
        assert!(is_enumerator("[3]"));
        assert!(!is_enumerator("facts"));
        assert!(!is_enumerator("the"));
    }
}
