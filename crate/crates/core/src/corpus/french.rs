//! Paragraph-level French detection for the bilingual COLIEE judgments.
//!
//! A paragraph counts as French when at least 18% of its word tokens are in
//! the French stopword list below and the English stopword ratio is lower.

use crate::text::{self, PARAGRAPH_BREAK};

pub const FRENCH_RATIO_THRESHOLD: f64 = 0.18;

const FRENCH_STOPWORDS: [&str; 50] = [
    "le", "la", "les", "de", "des", "du", "un", "une", "et", "est", //
    "en", "que", "qui", "dans", "pour", "pas", "au", "aux", "ce", "ces", //
    "il", "elle", "ils", "sur", "par", "avec", "sont", "se", "sa", "son", //
    "ses", "ne", "mais", "ou", "nous", "vous", "leur", "été", "être", "a", //
    "cette", "comme", "plus", "fait", "tout", "aussi", "y", "d", "l", "qu",
];

const ENGLISH_STOPWORDS: [&str; 50] = [
    "the", "of", "and", "to", "in", "a", "is", "that", "for", "it", //
    "as", "was", "with", "be", "by", "on", "not", "he", "i", "this", //
    "are", "or", "his", "from", "at", "which", "but", "have", "an", "had", //
    "they", "you", "were", "their", "one", "all", "we", "can", "her", "has", //
    "there", "been", "if", "more", "when", "will", "would", "who", "so", "no",
];

/// Lowercased alphabetic runs; apostrophes and digits split tokens, so
/// "l'appelant" yields "l" and "appelant".
fn word_tokens(paragraph: &str) -> impl Iterator<Item = String> + '_ {
    paragraph
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

pub fn is_french_paragraph(paragraph: &str) -> bool {
    let mut total = 0usize;
    let mut french = 0usize;
    let mut english = 0usize;
    for tok in word_tokens(paragraph) {
        total += 1;
        if FRENCH_STOPWORDS.contains(&tok.as_str()) {
            french += 1;
        }
        if ENGLISH_STOPWORDS.contains(&tok.as_str()) {
            english += 1;
        }
    }
    if total == 0 {
        return false;
    }
    let fr = french as f64 / total as f64;
    let en = english as f64 / total as f64;
    fr >= FRENCH_RATIO_THRESHOLD && en < fr
}

/// Drops French paragraphs from normalized text.
pub fn remove_french(normalized: &str) -> String {
    text::paragraph_spans(normalized)
        .into_iter()
        .map(|(s, e)| &normalized[s..e])
        .filter(|p| !is_french_paragraph(p))
        .collect::<Vec<_>>()
        .join(PARAGRAPH_BREAK)
}
