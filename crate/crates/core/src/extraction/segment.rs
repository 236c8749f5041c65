//! Rule-based sentence segmentation.
//!
//! English: a sentence ends at `.`, `!` or `?` (plus any closing quotes or
//! brackets) when followed by the end of the paragraph, or by whitespace and
//! an uppercase letter, optionally behind an opening quote or bracket. A
//! period ending a known abbreviation never ends a sentence. Chinese: a
//! sentence ends after `。！？；` and any closers. Paragraph breaks always end
//! a sentence.

use crate::corpus::Language;
use crate::text::paragraph_spans;

const ABBREVIATIONS: &[&str] = &[
    "v.", "vs.", "No.", "Nos.", "Mr.", "Mrs.", "Ms.", "Dr.", "Inc.", "U.S.", "Ltd.", "Co.", "Corp.", "Jr.",
    "Sr.", "St.", "para.", "paras.", "e.g.", "i.e.", "cf.", "Art.", "etc.",
];

const CLOSERS: &[char] = &['"', '\'', '”', '’', ')', ']', '」', '』', '）', '》'];
const OPENERS: &[char] = &['"', '\'', '“', '‘', '(', '['];
const ZH_TERMINATORS: &[char] = &['。', '！', '？', '；'];

/// Byte spans of the sentences of `text`, trimmed, in order.
pub fn sentence_spans(text: &str, language: Language) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (start, end) in paragraph_spans(text) {
        let para = &text[start..end];
        let cuts = match language {
            Language::En => english_cuts(para),
            Language::Zh => chinese_cuts(para),
        };
        let mut prev = 0;
        for cut in cuts.into_iter().chain(std::iter::once(para.len())) {
            push_trimmed(para, prev, cut, start, &mut out);
            prev = cut;
        }
    }
    out
}

/// The sentences of `text` as slices.
pub fn sentences(text: &str, language: Language) -> Vec<&str> {
    sentence_spans(text, language)
        .into_iter()
        .map(|(s, e)| &text[s..e])
        .collect()
}

fn push_trimmed(para: &str, from: usize, to: usize, offset: usize, out: &mut Vec<(usize, usize)>) {
    let piece = &para[from..to];
    let lead = piece.len() - piece.trim_start().len();
    let trimmed = piece.trim();
    if !trimmed.is_empty() {
        let s = offset + from + lead;
        out.push((s, s + trimmed.len()));
    }
}

fn skip_closers(s: &str, mut pos: usize) -> usize {
    while let Some(c) = s[pos..].chars().next() {
        if !CLOSERS.contains(&c) {
            break;
        }
        pos += c.len_utf8();
    }
    pos
}

fn is_abbreviation(para: &str, period: usize) -> bool {
    let word_start = para[..period]
        .rfind(char::is_whitespace)
        .map_or(0, |i| i + para[i..].chars().next().unwrap().len_utf8());
    let word = para[word_start..=period].trim_start_matches(OPENERS);
    ABBREVIATIONS.contains(&word)
}

fn english_cuts(para: &str) -> Vec<usize> {
    let mut cuts = Vec::new();
    for (i, c) in para.char_indices() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let end = skip_closers(para, i + 1);
        let rest = &para[end..];
        let boundary = if rest.is_empty() {
            true
        } else if rest.starts_with(char::is_whitespace) {
            let next = rest.trim_start().trim_start_matches(OPENERS);
            next.chars().next().is_some_and(char::is_uppercase)
        } else {
            false
        };
        if boundary && !(c == '.' && is_abbreviation(para, i)) && cuts.last() != Some(&end) {
            cuts.push(end);
        }
    }
    cuts
}

fn chinese_cuts(para: &str) -> Vec<usize> {
    let mut cuts = Vec::new();
    for (i, c) in para.char_indices() {
        if ZH_TERMINATORS.contains(&c) {
            let end = skip_closers(para, i + c.len_utf8());
            if cuts.last() != Some(&end) {
                cuts.push(end);
            }
        }
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_basic() {
        let t = "The appeal was heard. It failed! Why? Because.";
        assert_eq!(sentences(t, Language::En), ["The appeal was heard.", "It failed!", "Why?", "Because."]);
    }

    #[test]
    fn english_abbreviations() {
        let t = "See Smith v. Jones at para. 12. The U.S. Court agreed. Mr. Brown did not.";
        assert_eq!(
            sentences(t, Language::En),
            ["See Smith v. Jones at para. 12.", "The U.S. Court agreed.", "Mr. Brown did not."]
        );
    }

    #[test]
    fn english_lowercase_continuation() {
        let t = "The sum was 3.5 million. the court noted it.";
        assert_eq!(sentences(t, Language::En), ["The sum was 3.5 million. the court noted it."]);
    }

    #[test]
    fn english_quotes() {
        let t = "He said \"stop.\" \"Then what?\" she asked. (It ended.) Next.";
        assert_eq!(
            sentences(t, Language::En),
            ["He said \"stop.\"", "\"Then what?\" she asked.", "(It ended.)", "Next."]
        );
    }

    #[test]
    fn paragraphs_always_split() {
        let t = "First line without stop\n\nsecond paragraph";
        assert_eq!(sentences(t, Language::En), ["First line without stop", "second paragraph"]);
    }

    #[test]
    fn chinese() {
        let t = "被告人王某盗窃。本院认为：罪名成立；判决如下！";
        assert_eq!(sentences(t, Language::Zh), ["被告人王某盗窃。", "本院认为：罪名成立；", "判决如下！"]);
        let q = "他说：“好。”然后离开。";
        assert_eq!(sentences(q, Language::Zh), ["他说：“好。”", "然后离开。"]);
    }

    #[test]
    fn spans_index_original() {
        let t = "A b.  C d.\n\nE f.";
        for (s, e) in sentence_spans(t, Language::En) {
            assert!(t.is_char_boundary(s) && t.is_char_boundary(e));
            assert_eq!(t[s..e].trim(), &t[s..e]);
        }
        assert!(sentences("", Language::En).is_empty());
    }
}
