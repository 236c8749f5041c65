use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RepresentationError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("representation of {0} has non-finite components")]
    NonFinite(String),
    #[error("representation of {0} is empty")]
    Empty(String),
    #[error("representation of {id} has layout {found:?}, set holds {expected:?}")]
    LayoutMismatch {
        id: String,
        expected: Layout,
        found: Layout,
    },
}

/// How the concatenated vector is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One `d`-dim vector (fact-only, issue-only and whole-text variants).
    Single,
    /// `[fact ; issue ; cross]`, `3d` components.
    FactIssueCross,
}

impl Layout {
    pub fn parts(self) -> usize {
        match self {
            Layout::Single => 1,
            Layout::FactIssueCross => 3,
        }
    }
}

/// The vector a case is ranked by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRepresentation {
    pub case_id: String,
    layout: Layout,
    sub_dim: usize,
    concat: Vec<f32>,
}

fn check_finite(id: &str, v: &[f32]) -> Result<(), RepresentationError> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(RepresentationError::NonFinite(id.to_string()));
    }
    Ok(())
}

impl CaseRepresentation {
    pub fn single(case_id: impl Into<String>, vector: Vec<f32>) -> Result<Self, RepresentationError> {
        let case_id = case_id.into();
        if vector.is_empty() {
            return Err(RepresentationError::Empty(case_id));
        }
        check_finite(&case_id, &vector)?;
        Ok(CaseRepresentation {
            case_id,
            layout: Layout::Single,
            sub_dim: vector.len(),
            concat: vector,
        })
    }

    /// Concatenates `[fact ; issue ; cross]`.
    pub fn fact_issue_cross(
        case_id: impl Into<String>,
        fact: &[f32],
        issue: &[f32],
        cross: &[f32],
    ) -> Result<Self, RepresentationError> {
        let case_id = case_id.into();
        let d = fact.len();
        for other in [issue.len(), cross.len()] {
            if other != d {
                return Err(RepresentationError::DimensionMismatch { left: d, right: other });
            }
        }
        if d == 0 {
            return Err(RepresentationError::Empty(case_id));
        }
        let mut concat = Vec::with_capacity(3 * d);
        concat.extend_from_slice(fact);
        concat.extend_from_slice(issue);
        concat.extend_from_slice(cross);
        check_finite(&case_id, &concat)?;
        Ok(CaseRepresentation {
            case_id,
            layout: Layout::FactIssueCross,
            sub_dim: d,
            concat,
        })
    }

    /// Rebuilds a representation from its stored form.
    pub fn from_concat(
        case_id: impl Into<String>,
        layout: Layout,
        concat: Vec<f32>,
    ) -> Result<Self, RepresentationError> {
        let case_id = case_id.into();
        let parts = layout.parts();
        if concat.is_empty() || !concat.len().is_multiple_of(parts) {
            return Err(RepresentationError::DimensionMismatch {
                left: concat.len(),
                right: parts,
            });
        }
        check_finite(&case_id, &concat)?;
        Ok(CaseRepresentation {
            case_id,
            layout,
            sub_dim: concat.len() / parts,
            concat,
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Dimension `d` of each part.
    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    pub fn dim(&self) -> usize {
        self.concat.len()
    }

    pub fn concat(&self) -> &[f32] {
        &self.concat
    }

    pub fn parts(&self) -> impl Iterator<Item = &[f32]> {
        self.concat.chunks(self.sub_dim)
    }

    fn part(&self, i: usize) -> Option<&[f32]> {
        (self.layout == Layout::FactIssueCross).then(|| &self.concat[i * self.sub_dim..(i + 1) * self.sub_dim])
    }

    pub fn e_fact(&self) -> Option<&[f32]> {
        self.part(0)
    }

    pub fn e_issue(&self) -> Option<&[f32]> {
        self.part(1)
    }

    pub fn e_cross(&self) -> Option<&[f32]> {
        self.part(2)
    }

    /// Multiplies every component by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        CaseRepresentation {
            case_id: self.case_id.clone(),
            layout: self.layout,
            sub_dim: self.sub_dim,
            concat: self.concat.iter().map(|x| x * factor).collect(),
        }
    }
}

/// Dot product accumulated in f64, left to right.
pub fn dot(a: &[f32], b: &[f32]) -> Result<f64, RepresentationError> {
    if a.len() != b.len() {
        return Err(RepresentationError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum())
}

/// Dot product of the concatenated vectors.
pub fn similarity(q: &CaseRepresentation, d: &CaseRepresentation) -> Result<f64, RepresentationError> {
    dot(&q.concat, &d.concat)
}

/// Representations of one run, keyed by case id. All members share layout
/// and dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RepresentationSet {
    reps: BTreeMap<String, CaseRepresentation>,
}

impl RepresentationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rep: CaseRepresentation) -> Result<(), RepresentationError> {
        if let Some(first) = self.reps.values().next() {
            if first.layout != rep.layout {
                return Err(RepresentationError::LayoutMismatch {
                    id: rep.case_id,
                    expected: first.layout,
                    found: rep.layout,
                });
            }
            if first.dim() != rep.dim() {
                return Err(RepresentationError::DimensionMismatch {
                    left: first.dim(),
                    right: rep.dim(),
                });
            }
        }
        self.reps.insert(rep.case_id.clone(), rep);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&CaseRepresentation> {
        self.reps.get(id)
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Members in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &CaseRepresentation> {
        self.reps.values()
    }

    pub fn layout(&self) -> Option<Layout> {
        self.reps.values().next().map(|r| r.layout)
    }

    pub fn dim(&self) -> Option<usize> {
        self.reps.values().next().map(CaseRepresentation::dim)
    }

    pub fn sub_dim(&self) -> Option<usize> {
        self.reps.values().next().map(CaseRepresentation::sub_dim)
    }
}

impl FromIterator<CaseRepresentation> for Result<RepresentationSet, RepresentationError> {
    fn from_iter<I: IntoIterator<Item = CaseRepresentation>>(iter: I) -> Self {
        let mut set = RepresentationSet::new();
        for rep in iter {
            set.insert(rep)?;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v: &[f32]) -> CaseRepresentation {
        CaseRepresentation::single("x", v.to_vec()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(similarity(&single(&[1.0, 0.0, 0.0]), &single(&[0.0, 1.0, 0.0])).unwrap(), 0.0);
        let a = single(&[1.0, 2.0, 2.0]);
        assert_eq!(similarity(&a, &a).unwrap(), 9.0);
        assert!(similarity(&single(&[1.0]), &single(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn concat_order() {
        let r = CaseRepresentation::fact_issue_cross("c", &[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]).unwrap();
        assert_eq!(r.concat(), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(r.e_issue().unwrap(), [3.0, 4.0]);
        assert_eq!(r.dim(), 6);
        assert_eq!(r.sub_dim(), 2);
        assert_eq!(r.parts().count(), 3);
    }

    #[test]
    fn invariants_enforced() {
        assert!(CaseRepresentation::fact_issue_cross("c", &[1.0], &[1.0, 2.0], &[1.0]).is_err());
        assert_eq!(
            CaseRepresentation::single("n", vec![f32::NAN]).unwrap_err(),
            RepresentationError::NonFinite("n".into())
        );
        let mut set = RepresentationSet::new();
        set.insert(single(&[1.0, 2.0])).unwrap();
        assert!(set.insert(CaseRepresentation::single("y", vec![1.0]).unwrap()).is_err());
    }
}
