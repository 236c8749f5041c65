//! Text normalization shared by every loader.
//!
//! Normalized text is NFC, has every run of whitespace inside a paragraph
//! collapsed to one ASCII space, and separates paragraphs with exactly one
//! blank line (`"\n\n"`). Section spans and sentence offsets are byte offsets
//! into this form.

use unicode_normalization::UnicodeNormalization;

pub const PARAGRAPH_BREAK: &str = "\n\n";

/// Splits raw text into paragraphs on blank lines, then normalizes each one.
/// Empty paragraphs are dropped.
pub fn normalized_paragraphs(raw: &str) -> Vec<String> {
    let nfc: String = raw.nfc().collect();
    let mut paragraphs = Vec::new();
    let mut current = String::new();
    for line in nfc.lines() {
        if line.trim().is_empty() {
            flush(&mut current, &mut paragraphs);
            continue;
        }
        for word in line.split_whitespace() {
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(word);
        }
    }
    flush(&mut current, &mut paragraphs);
    paragraphs
}

fn flush(current: &mut String, out: &mut Vec<String>) {
    if !current.is_empty() {
        out.push(std::mem::take(current));
    }
}

pub fn normalize(raw: &str) -> String {
    normalized_paragraphs(raw).join(PARAGRAPH_BREAK)
}

/// Byte ranges of the paragraphs of already-normalized text.
pub fn paragraph_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    while start <= text.len() {
        let end = text[start..]
            .find(PARAGRAPH_BREAK)
            .map_or(text.len(), |p| start + p);
        if end > start {
            spans.push((start, end));
        }
        start = end + PARAGRAPH_BREAK.len();
    }
    spans
}

/// CJK ideographs (unified, extension A-F, compatibility).
pub fn is_cjk(c: char) -> bool {
    matches!(c,
        '\u{4E00}'..='\u{9FFF}'
        | '\u{3400}'..='\u{4DBF}'
        | '\u{F900}'..='\u{FAFF}'
        | '\u{20000}'..='\u{2EBEF}'
        | '\u{30000}'..='\u{3134F}')
}
