use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Language;

/// Placeholder replaced by a sampled issue in misleading templates.
pub const ISSUE_SLOT: &str = "{issue}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptCategory {
    None,
    Instructive,
    Misleading,
    Irrelevant,
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("unknown template preset {0:?} (expected A-G or NA)")]
    UnknownPreset(String),
    #[error("template with category {0:?} must have non-empty prefixes")]
    EmptyPrefix(PromptCategory),
    #[error("template language {template} does not match corpus language {corpus}")]
    LanguageMismatch { template: Language, corpus: Language },
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

/// Prompt prefixes for the fact and issue inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub category: PromptCategory,
    pub language: Language,
    pub fact_prefix: String,
    pub issue_prefix: String,
}

/// Names of the shipped presets, in table order.
pub const PRESETS: [&str; 7] = ["A", "B", "C", "D", "E", "F", "G"];

/// Prefix used when the whole text is encoded with a prompt.
pub fn merged_prefix(language: Language) -> &'static str {
    match language {
        Language::En => "Legal facts and legal issues:",
        Language::Zh => "法律事实和法律纠纷：",
    }
}

/// Joins a prompt and a text: one space in English, nothing in Chinese. An
/// empty side is dropped.
pub fn join_prompt(language: Language, prefix: &str, text: &str) -> String {
    match (prefix.is_empty(), text.is_empty()) {
        (true, _) => text.to_string(),
        (false, true) => prefix.to_string(),
        (false, false) => match language {
            Language::En => format!("{prefix} {text}"),
            Language::Zh => format!("{prefix}{text}"),
        },
    }
}

impl PromptTemplate {
    pub fn new(
        category: PromptCategory,
        language: Language,
        fact_prefix: impl Into<String>,
        issue_prefix: impl Into<String>,
    ) -> Result<Self, TemplateError> {
        let t = PromptTemplate {
            category,
            language,
            fact_prefix: fact_prefix.into(),
            issue_prefix: issue_prefix.into(),
        };
        t.validate()?;
        Ok(t)
    }

    /// The no-prompt template.
    pub fn none(language: Language) -> Self {
        PromptTemplate {
            category: PromptCategory::None,
            language,
            fact_prefix: String::new(),
            issue_prefix: String::new(),
        }
    }

    /// Shipped preset `A`-`G`, or `NA` for no prompt.
    pub fn preset(name: &str, language: Language) -> Result<Self, TemplateError> {
        use PromptCategory::*;
        let (category, en, zh): (PromptCategory, (&str, &str), (&str, &str)) = match name {
            "A" => (Instructive, ("Legal facts:", "Legal issues:"), ("法律事实：", "法律纠纷：")),
            "B" => (
                Instructive,
                ("The following is legal facts:", "The following is legal issues:"),
                ("以下是法律事实：", "以下是法律纠纷："),
            ),
            "C" => (Instructive, ("The judge think:", "The judge think:"), ("法官认为：", "法官认为：")),
            "D" => (
                Misleading,
                ("This case is related to {issue}:", "This case is related to {issue}:"),
                ("本案与{issue}有关：", "本案与{issue}有关："),
            ),
            "E" => (
                Misleading,
                ("Legal facts of this case is {issue}:", "Legal issues of this case is {issue}:"),
                ("本案的法律事实是{issue}：", "本案的法律纠纷是{issue}："),
            ),
            "F" => (Irrelevant, ("Let's look:", "Let's look:"), ("让我们看看：", "让我们看看：")),
            "G" => (
                Irrelevant,
                ("ADC is a database conference:", "ADC is a database conference:"),
                ("ADC是一个数据库会议：", "ADC是一个数据库会议："),
            ),
            "NA" => return Ok(Self::none(language)),
            other => return Err(TemplateError::UnknownPreset(other.to_string())),
        };
        let (fact, issue) = match language {
            Language::En => en,
            Language::Zh => zh,
        };
        Ok(PromptTemplate {
            category,
            language,
            fact_prefix: fact.to_string(),
            issue_prefix: issue.to_string(),
        })
    }

    /// Reads a JSON template file `{"category","language","fact_prefix","issue_prefix"}`.
    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        let err = |message: String| TemplateError::File {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let t: PromptTemplate = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TemplateError> {
        if self.category != PromptCategory::None && (self.fact_prefix.is_empty() || self.issue_prefix.is_empty()) {
            return Err(TemplateError::EmptyPrefix(self.category));
        }
        Ok(())
    }

    pub fn check_language(&self, corpus: Language) -> Result<(), TemplateError> {
        if self.language != corpus {
            return Err(TemplateError::LanguageMismatch {
                template: self.language,
                corpus,
            });
        }
        Ok(())
    }

    /// Whether the prefixes need a sampled issue.
    pub fn needs_issue(&self) -> bool {
        self.fact_prefix.contains(ISSUE_SLOT) || self.issue_prefix.contains(ISSUE_SLOT)
    }

    /// Fills the issue slot. The same sample is used in both prefixes.
    pub fn resolve(&self, issue: Option<&str>) -> Prompt {
        let fill = |p: &str| p.replace(ISSUE_SLOT, issue.unwrap_or(""));
        Prompt {
            language: self.language,
            fact_prefix: fill(&self.fact_prefix),
            issue_prefix: fill(&self.issue_prefix),
        }
    }
}

/// A template with its slots filled, ready to prefix one case's features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub language: Language,
    pub fact_prefix: String,
    pub issue_prefix: String,
}

impl Prompt {
    pub fn none(language: Language) -> Self {
        Prompt {
            language,
            fact_prefix: String::new(),
            issue_prefix: String::new(),
        }
    }

    pub fn fact(&self, text: &str) -> String {
        join_prompt(self.language, &self.fact_prefix, text)
    }

    pub fn issue(&self, text: &str) -> String {
        join_prompt(self.language, &self.issue_prefix, text)
    }
}

impl fmt::Display for PromptCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptCategory::None => "none",
            PromptCategory::Instructive => "instructive",
            PromptCategory::Misleading => "misleading",
            PromptCategory::Irrelevant => "irrelevant",
        })
    }
}

impl FromStr for PromptCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PromptCategory::None),
            "instructive" => Ok(PromptCategory::Instructive),
            "misleading" => Ok(PromptCategory::Misleading),
            "irrelevant" => Ok(PromptCategory::Irrelevant),
            other => Err(format!("unknown prompt category {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_a() {
        let t = PromptTemplate::preset("A", Language::En).unwrap();
        assert_eq!((t.fact_prefix.as_str(), t.issue_prefix.as_str()), ("Legal facts:", "Legal issues:"));
        let p = t.resolve(None);
        assert_eq!(p.fact("A stole B's car."), "Legal facts: A stole B's car.");
        assert_eq!(p.issue(""), "Legal issues:");
        assert_eq!(Prompt::none(Language::En).fact("A stole B's car."), "A stole B's car.");
    }

    #[test]
    fn chinese_join_has_no_space() {
        let p = PromptTemplate::preset("A", Language::Zh).unwrap().resolve(None);
        assert_eq!(p.fact("王某盗窃。"), "法律事实：王某盗窃。");
    }

    #[test]
    fn misleading_slot() {
        let t = PromptTemplate::preset("E", Language::En).unwrap();
        assert!(t.needs_issue());
        let p = t.resolve(Some("theft"));
        assert_eq!(p.fact_prefix, "Legal facts of this case is theft:");
        assert_eq!(p.issue_prefix, "Legal issues of this case is theft:");
        assert!(!PromptTemplate::preset("A", Language::En).unwrap().needs_issue());
    }

    #[test]
    fn all_presets_valid() {
        for lang in [Language::En, Language::Zh] {
            for name in PRESETS {
                PromptTemplate::preset(name, lang).unwrap().validate().unwrap();
            }
            assert_eq!(PromptTemplate::preset("NA", lang).unwrap(), PromptTemplate::none(lang));
        }
        assert!(PromptTemplate::preset("H", Language::En).is_err());
    }

    #[test]
    fn empty_prefix_only_for_none() {
        assert!(PromptTemplate::new(PromptCategory::Instructive, Language::En, "", "x").is_err());
        assert!(PromptTemplate::new(PromptCategory::None, Language::En, "", "").is_ok());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let t = PromptTemplate::preset("B", Language::Zh).unwrap();
        std::fs::write(&path, serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(PromptTemplate::load(&path).unwrap(), t);
    }
}
