use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BackendDescriptor, BackendError, EmbeddingBackend, EncoderInput};

#[derive(Serialize, Deserialize)]
struct Record {
    segments: Vec<String>,
    vector: Vec<f32>,
}

/// Precomputed vectors read from JSONL: a descriptor line
/// `{"name","version","dim","max_tokens"}` followed by
/// `{"segments":[...],"vector":[...]}` records.
#[derive(Debug, Clone)]
pub struct FileBackend {
    descriptor: BackendDescriptor,
    vectors: HashMap<Vec<String>, Vec<f32>>,
}

impl FileBackend {
    pub fn open(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path).map_err(|source| BackendError::Io {
            context: path.display().to_string(),
            source,
        })?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let malformed = |n: usize, e: serde_json::Error| {
            BackendError::Malformed(format!("{}:{}: {e}", path.display(), n + 1))
        };
        let (n, header) = lines
            .next()
            .ok_or_else(|| BackendError::Malformed(format!("{}: missing descriptor line", path.display())))?;
        let descriptor: BackendDescriptor = serde_json::from_str(header).map_err(|e| malformed(n, e))?;
        let mut backend = FileBackend::new(descriptor)?;
        for (n, line) in lines {
            let r: Record = serde_json::from_str(line).map_err(|e| malformed(n, e))?;
            backend.insert(EncoderInput { segments: r.segments }, r.vector)?;
        }
        Ok(backend)
    }

    pub fn new(descriptor: BackendDescriptor) -> Result<Self, BackendError> {
        if descriptor.dim == 0 {
            return Err(BackendError::Config("dim must be positive".into()));
        }
        Ok(FileBackend {
            descriptor,
            vectors: HashMap::new(),
        })
    }

    pub fn insert(&mut self, input: EncoderInput, vector: Vec<f32>) -> Result<(), BackendError> {
        super::check_vectors(&self.descriptor, 1, std::slice::from_ref(&vector))?;
        self.vectors.insert(input.segments, vector);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Writes the store in the format [`FileBackend::open`] reads, records
    /// sorted by segments.
    pub fn save(&self, path: &Path) -> Result<(), BackendError> {
        let mut entries: Vec<(&Vec<String>, &Vec<f32>)> = self.vectors.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = serde_json::to_string(&self.descriptor).expect("descriptor serializes");
        out.push('\n');
        let records = entries.into_iter().map(|(s, v)| Record {
            segments: s.clone(),
            vector: v.clone(),
        });
        out.push_str(&crate::io::to_jsonl(records).expect("records serialize"));
        crate::io::write_atomic(path, out.as_bytes()).map_err(|source| BackendError::Io {
            context: path.display().to_string(),
            source,
        })
    }
}

impl EmbeddingBackend for FileBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        super::check_inputs(inputs)?;
        let mut missing = Vec::new();
        let mut out = Vec::with_capacity(inputs.len());
        for (i, input) in inputs.iter().enumerate() {
            match self.vectors.get(&input.segments) {
                Some(v) => out.push(v.clone()),
                None => missing.push(i),
            }
        }
        if !missing.is_empty() {
            return Err(BackendError::Missing(missing));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::embed_batch;

    #[test]
    fn save_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.jsonl");
        let mut b = FileBackend::new(BackendDescriptor {
            name: "file".into(),
            version: "1".into(),
            dim: 2,
            max_tokens: 512,
        })
        .unwrap();
        b.insert(EncoderInput::single("a"), vec![1.0, 2.0]).unwrap();
        b.insert(EncoderInput::pair("a", "b"), vec![0.5, -0.25]).unwrap();
        b.save(&path).unwrap();
        let reopened = FileBackend::open(&path).unwrap();
        let out = embed_batch(&reopened, &[EncoderInput::pair("a", "b"), EncoderInput::single("a")]).unwrap();
        assert_eq!(out, vec![vec![0.5, -0.25], vec![1.0, 2.0]]);
        let err = embed_batch(&reopened, &[EncoderInput::single("a"), EncoderInput::single("zz")]).unwrap_err();
        assert!(matches!(err, BackendError::Missing(ref v) if v == &[1]));
    }

    #[test]
    fn wrong_dim_rejected() {
        let mut b = FileBackend::new(BackendDescriptor {
            name: "file".into(),
            version: "1".into(),
            dim: 2,
            max_tokens: 512,
        })
        .unwrap();
        assert!(b.insert(EncoderInput::single("a"), vec![1.0]).is_err());
    }
}
