use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Language;
use crate::extraction::{issue_units, LegalFeatures};
use crate::hash::fnv1a64;

/// Draws a random issue for misleading prompts. Each case gets its own
/// stream seeded from the run seed and the case id, so draws do not depend
/// on processing order.
#[derive(Debug, Clone)]
pub struct IssueSampler {
    units: Vec<String>,
    seed: u64,
    language: Language,
}

impl IssueSampler {
    /// Pools the issue units (charges or sentences) of every case.
    pub fn from_features<'a>(
        features: impl IntoIterator<Item = &'a LegalFeatures>,
        language: Language,
        seed: u64,
    ) -> Self {
        let units: BTreeSet<String> = features
            .into_iter()
            .flat_map(|f| issue_units(&f.issue_text, language))
            .collect();
        IssueSampler {
            units: units.into_iter().collect(),
            seed,
            language,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    /// An issue other than the case's own where possible; `None` only when no
    /// case has any issue.
    pub fn sample(&self, case: &LegalFeatures) -> Option<&str> {
        let own: BTreeSet<String> = issue_units(&case.issue_text, self.language).into_iter().collect();
        let foreign: Vec<&String> = self.units.iter().filter(|u| !own.contains(*u)).collect();
        let pool: Vec<&String> = if foreign.is_empty() {
            self.units.iter().collect()
        } else {
            foreign
        };
        if pool.is_empty() {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a64(case.case_id.as_bytes()));
        Some(pool[rng.random_range(0..pool.len())].as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{FactProvenance, IssueProvenance};

    fn f(id: &str, issue: &str) -> LegalFeatures {
        LegalFeatures {
            case_id: id.into(),
            fact_text: "f".into(),
            issue_text: issue.into(),
            fact_provenance: FactProvenance::MarkerSection,
            issue_provenance: IssueProvenance::ChargeMatch,
        }
    }

    #[test]
    fn excludes_own_issue_and_is_seeded() {
        let feats = vec![f("a", "盗窃罪"), f("b", "抢劫罪、诈骗罪"), f("c", "")];
        let s = IssueSampler::from_features(&feats, Language::Zh, 42);
        assert_eq!(s.units(), ["抢劫罪", "盗窃罪", "诈骗罪"]);
        for _ in 0..3 {
            let pick = s.sample(&feats[0]).unwrap();
            assert_ne!(pick, "盗窃罪");
            assert_eq!(Some(pick), s.sample(&feats[0]));
        }
        assert_eq!(s.sample(&feats[1]), Some("盗窃罪"));
        let again = IssueSampler::from_features(&feats, Language::Zh, 42);
        assert_eq!(s.sample(&feats[2]), again.sample(&feats[2]));
    }

    #[test]
    fn empty_pool() {
        let feats = vec![f("a", "")];
        assert_eq!(IssueSampler::from_features(&feats, Language::Zh, 0).sample(&feats[0]), None);
    }
}
