use crate::corpus::Language;
use crate::encoding::Prompt;
use crate::extraction::LegalFeatures;

/// `raw ⊕ fact_prefix ⊕ fact ⊕ issue_prefix ⊕ issue`, joined by single spaces
/// in English and directly in Chinese. Empty parts are skipped.
pub fn bm25_promptcase_text(raw_text: &str, features: &LegalFeatures, prompt: &Prompt) -> String {
    let parts = [
        raw_text,
        &prompt.fact_prefix,
        &features.fact_text,
        &prompt.issue_prefix,
        &features.issue_text,
    ];
    let sep = match prompt.language {
        Language::En => " ",
        Language::Zh => "",
    };
    parts.iter().filter(|p| !p.is_empty()).copied().collect::<Vec<_>>().join(sep)
}

/// Text fed to BM25, tagged with whether features were already appended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexicalText {
    Raw(String),
    Reformulated(String),
}

impl LexicalText {
    pub fn as_str(&self) -> &str {
        match self {
            LexicalText::Raw(s) | LexicalText::Reformulated(s) => s,
        }
    }

    /// Appends prompts and features. Returns `None` if this text has already
    /// been reformulated.
    pub fn reformulate(&self, features: &LegalFeatures, prompt: &Prompt) -> Option<LexicalText> {
        match self {
            LexicalText::Raw(raw) => Some(LexicalText::Reformulated(bm25_promptcase_text(raw, features, prompt))),
            LexicalText::Reformulated(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::PromptTemplate;
    use crate::extraction::{FactProvenance, IssueProvenance};

    fn f(fact: &str, issue: &str) -> LegalFeatures {
        LegalFeatures {
            case_id: "c".into(),
            fact_text: fact.into(),
            issue_text: issue.into(),
            fact_provenance: FactProvenance::Summarizer,
            issue_provenance: IssueProvenance::Empty,
        }
    }

    #[test]
    fn composition() {
        let p = PromptTemplate::preset("A", Language::En).unwrap().resolve(None);
        assert_eq!(bm25_promptcase_text("R", &f("F", "I"), &p), "R Legal facts: F Legal issues: I");
        assert_eq!(bm25_promptcase_text("R", &f("F", ""), &Prompt::none(Language::En)), "R F");
        let zh = PromptTemplate::preset("A", Language::Zh).unwrap().resolve(None);
        assert_eq!(bm25_promptcase_text("原文", &f("事实", "盗窃罪"), &zh), "原文法律事实：事实法律纠纷：盗窃罪");
    }

    #[test]
    fn only_once() {
        let p = Prompt::none(Language::En);
        let once = LexicalText::Raw("R".into()).reformulate(&f("F", "I"), &p).unwrap();
        assert_eq!(once.as_str(), "R F I");
        assert!(once.reformulate(&f("F", "I"), &p).is_none());
    }
}
