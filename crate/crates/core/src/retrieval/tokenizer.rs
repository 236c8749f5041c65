use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::text::is_cjk;

/// Term extraction for lexical scoring and length statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Lowercase, split on anything that is not alphanumeric.
    EnglishSimple,
    /// Overlapping character bigrams over CJK runs; other runs as `EnglishSimple`.
    ChineseBigram,
}

impl Tokenizer {
    pub fn for_language(language: Language) -> Self {
        match language {
            Language::En => Tokenizer::EnglishSimple,
            Language::Zh => Tokenizer::ChineseBigram,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tokenizer::EnglishSimple => "english_simple",
            Tokenizer::ChineseBigram => "chinese_bigram",
        }
    }

    pub fn tokenize(self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Tokenizer::EnglishSimple => english_into(text, &mut out),
            Tokenizer::ChineseBigram => {
                let mut rest = text;
                while !rest.is_empty() {
                    let first = rest.chars().next().unwrap();
                    let cjk = is_cjk(first);
                    let end = rest
                        .char_indices()
                        .find(|&(_, c)| is_cjk(c) != cjk)
                        .map_or(rest.len(), |(i, _)| i);
                    let (run, tail) = rest.split_at(end);
                    if cjk {
                        bigrams_into(run, &mut out);
                    } else {
                        english_into(run, &mut out);
                    }
                    rest = tail;
                }
            }
        }
        out
    }
}

fn english_into(text: &str, out: &mut Vec<String>) {
    for piece in text.split(|c: char| !c.is_alphanumeric()) {
        if !piece.is_empty() {
            out.push(piece.to_lowercase());
        }
    }
}

fn bigrams_into(run: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = run.chars().collect();
    if chars.len() == 1 {
        out.push(chars[0].to_string());
        return;
    }
    for w in chars.windows(2) {
        out.push(w.iter().collect());
    }
}

impl fmt::Display for Tokenizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tokenizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "english_simple" => Ok(Tokenizer::EnglishSimple),
            "chinese_bigram" => Ok(Tokenizer::ChineseBigram),
            other => Err(format!("unknown tokenizer {other:?} (expected english_simple or chinese_bigram)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english() {
        let t = Tokenizer::EnglishSimple;
        assert_eq!(t.tokenize("The Court's ruling, in 2001!"), ["the", "court", "s", "ruling", "in", "2001"]);
        assert!(t.tokenize("").is_empty());
        assert!(t.tokenize(" ,.; ").is_empty());
    }

    #[test]
    fn chinese_bigrams() {
        let t = Tokenizer::ChineseBigram;
        assert_eq!(t.tokenize("盗窃罪"), ["盗窃", "窃罪"]);
        assert_eq!(t.tokenize("王某2019年盗窃"), ["王某", "2019", "年盗", "盗窃"]);
        assert_eq!(t.tokenize("甲，乙丙"), ["甲", "乙丙"]);
        assert!(t.tokenize("").is_empty());
    }

    #[test]
    fn parse_round_trip() {
        for t in [Tokenizer::EnglishSimple, Tokenizer::ChineseBigram] {
            assert_eq!(t.name().parse::<Tokenizer>().unwrap(), t);
        }
        assert!("whitespace".parse::<Tokenizer>().is_err());
    }
}
