use std::collections::HashSet;
use std::path::Path;

use aho_corasick::AhoCorasick;

use crate::hash::fnv1a64;

const BUILTIN: &str = include_str!("../../assets/charges.txt");

/// Separator used to join matched charges.
pub const CHARGE_SEPARATOR: &str = "、";

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: duplicate charge {charge}")]
    Duplicate { line: usize, charge: String },
    #[error("line {line}: charge {charge} contains the separator {CHARGE_SEPARATOR}")]
    Separator { line: usize, charge: String },
    #[error("charge lexicon is empty")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Charge names matched against civil-law judgments.
#[derive(Debug, Clone)]
pub struct ChargeLexicon {
    charges: Vec<String>,
    matcher: AhoCorasick,
    version: String,
}

/// One occurrence of a charge in a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChargeMatch {
    pub charge: usize,
    pub start: usize,
    pub end: usize,
}

impl ChargeLexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled charge list is valid")
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// One charge per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut charges = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.contains(CHARGE_SEPARATOR) {
                return Err(LexiconError::Separator {
                    line: n + 1,
                    charge: line.to_string(),
                });
            }
            if !seen.insert(line.to_string()) {
                return Err(LexiconError::Duplicate {
                    line: n + 1,
                    charge: line.to_string(),
                });
            }
            charges.push(line.to_string());
        }
        Self::from_charges(charges)
    }

    pub fn from_charges<S: Into<String>>(charges: impl IntoIterator<Item = S>) -> Result<Self, LexiconError> {
        let charges: Vec<String> = charges.into_iter().map(Into::into).collect();
        if charges.is_empty() {
            return Err(LexiconError::Empty);
        }
        let mut seen = HashSet::new();
        for (i, c) in charges.iter().enumerate() {
            if !seen.insert(c.as_str()) {
                return Err(LexiconError::Duplicate {
                    line: i + 1,
                    charge: c.clone(),
                });
            }
        }
        let matcher = AhoCorasick::new(&charges).expect("charge patterns build");
        let version = format!("{:016x}", fnv1a64(charges.join("\n").as_bytes()));
        Ok(ChargeLexicon {
            charges,
            matcher,
            version,
        })
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn charges(&self) -> &[String] {
        &self.charges
    }

    /// Content hash of the charge list.
    pub fn version(&self) -> &str {
        &self.version
    }

    /// Every occurrence of every charge, overlapping ones included.
    pub fn occurrences(&self, text: &str) -> Vec<ChargeMatch> {
        let mut out: Vec<ChargeMatch> = self
            .matcher
            .find_overlapping_iter(text)
            .map(|m| ChargeMatch {
                charge: m.pattern().as_usize(),
                start: m.start(),
                end: m.end(),
            })
            .collect();
        out.sort_by_key(|m| (m.start, m.end, m.charge));
        out
    }

    /// Charges found in `text`, longest match winning: an occurrence lying
    /// inside an occurrence of a longer charge is ignored. Each charge is
    /// returned once, ordered by its first surviving occurrence.
    pub fn find(&self, text: &str) -> Vec<&str> {
        let occ = self.occurrences(text);
        let shadowed = |m: &ChargeMatch| {
            occ.iter().any(|o| {
                o.end - o.start > m.end - m.start && o.start <= m.start && m.end <= o.end
            })
        };
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for m in &occ {
            if !shadowed(m) && seen.insert(m.charge) {
                out.push(self.charges[m.charge].as_str());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_is_valid() {
        let lex = ChargeLexicon::builtin();
        assert!(lex.len() > 400);
        assert!(lex.charges().iter().all(|c| c.ends_with('罪')));
        assert!(lex.charges().iter().any(|c| c == "盗窃罪"));
    }

    #[test]
    fn position_order() {
        let lex = ChargeLexicon::from_charges(["盗窃", "抢劫", "诈骗"]).unwrap();
        assert_eq!(lex.find("先抢劫，后盗窃，再抢劫"), ["抢劫", "盗窃"]);
    }

    #[test]
    fn longest_match_wins() {
        let lex = ChargeLexicon::from_charges(["盗窃", "盗窃罪"]).unwrap();
        assert_eq!(lex.find("犯盗窃罪"), ["盗窃罪"]);
        assert_eq!(lex.find("盗窃财物，构成盗窃罪"), ["盗窃", "盗窃罪"]);
    }

    #[test]
    fn builtin_prefers_specific_charge() {
        let lex = ChargeLexicon::builtin();
        assert_eq!(lex.find("被告人犯非国家工作人员受贿罪"), ["非国家工作人员受贿罪"]);
        assert_eq!(lex.find("以盗窃枪支罪追究"), ["盗窃枪支罪"]);
    }

    #[test]
    fn parse_rules() {
        let lex = ChargeLexicon::parse("# header\n\n盗窃罪\n  抢劫罪  \n").unwrap();
        assert_eq!(lex.charges(), ["盗窃罪", "抢劫罪"]);
        assert!(matches!(ChargeLexicon::parse("a\nb\na\n"), Err(LexiconError::Duplicate { line: 3, .. })));
        assert!(matches!(ChargeLexicon::parse("# only\n"), Err(LexiconError::Empty)));
        assert!(matches!(ChargeLexicon::parse("甲、乙罪\n"), Err(LexiconError::Separator { .. })));
    }

    #[test]
    fn no_match() {
        let lex = ChargeLexicon::builtin();
        assert!(lex.find("本案事实清楚。").is_empty());
    }
}
