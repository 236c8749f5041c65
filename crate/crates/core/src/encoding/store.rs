//! Binary representation store.
//!
//! `<name>.bin`: magic `PCRS`, version `u32`, dim `u32`, count `u64`, then
//! `count` records of `fnv1a64(id)` `u64` followed by `dim` `f32`, all
//! little-endian, in ascending id order. `<name>.ids.json` maps the hashes
//! back to ids and records the layout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::representation::{CaseRepresentation, Layout, RepresentationError, RepresentationSet};
use crate::hash::fnv1a64;

const MAGIC: &[u8; 4] = b"PCRS";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("ids {0} and {1} hash to the same record key")]
    HashCollision(String, String),
    #[error("cannot store an empty representation set")]
    Empty,
    #[error(transparent)]
    Representation(#[from] RepresentationError),
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    layout: Layout,
    sub_dim: usize,
    ids: BTreeMap<String, String>,
}

/// `reps.bin` → `reps.ids.json`.
pub fn sidecar_path(store: &Path) -> PathBuf {
    store.with_extension("ids.json")
}

fn key_hex(key: u64) -> String {
    format!("{key:016x}")
}

pub fn store_bytes(set: &RepresentationSet) -> Result<(Vec<u8>, String), StoreError> {
    let dim = set.dim().ok_or(StoreError::Empty)?;
    let mut ids = BTreeMap::new();
    let mut bytes = Vec::with_capacity(HEADER_LEN + set.len() * (8 + 4 * dim));
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    bytes.extend_from_slice(&(set.len() as u64).to_le_bytes());
    for rep in set.iter() {
        let key = fnv1a64(rep.case_id.as_bytes());
        if let Some(prev) = ids.insert(key_hex(key), rep.case_id.clone()) {
            return Err(StoreError::HashCollision(prev, rep.case_id.clone()));
        }
        bytes.extend_from_slice(&key.to_le_bytes());
        for x in rep.concat() {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    let sidecar = Sidecar {
        layout: set.layout().expect("non-empty"),
        sub_dim: set.sub_dim().expect("non-empty"),
        ids,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    Ok((bytes, json))
}

pub fn write_store(path: &Path, set: &RepresentationSet) -> Result<(), StoreError> {
    let (bytes, json) = store_bytes(set)?;
    crate::io::write_atomic(path, &bytes).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let side = sidecar_path(path);
    crate::io::write_atomic(&side, json.as_bytes()).map_err(|source| StoreError::Io { path: side, source })
}

pub fn read_store(path: &Path) -> Result<RepresentationSet, StoreError> {
    let format = |message: String| StoreError::Format {
        path: path.to_path_buf(),
        message,
    };
    let bytes = std::fs::read(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let side_path = sidecar_path(path);
    let side_text = std::fs::read_to_string(&side_path).map_err(|source| StoreError::Io {
        path: side_path.clone(),
        source,
    })?;
    let sidecar: Sidecar = serde_json::from_str(&side_text).map_err(|e| StoreError::Format {
        path: side_path,
        message: e.to_string(),
    })?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(format("not a representation store".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(format(format!("unsupported store version {version}")));
    }
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let record = 8 + 4 * dim;
    if dim == 0 || bytes.len() != HEADER_LEN + count * record {
        return Err(format(format!("size does not match header (dim {dim}, count {count})")));
    }
    if sidecar.sub_dim * sidecar.layout.parts() != dim {
        return Err(format(format!(
            "sidecar layout {:?} x {} does not match dim {dim}",
            sidecar.layout, sidecar.sub_dim
        )));
    }
    let mut set = RepresentationSet::new();
    for rec in bytes[HEADER_LEN..].chunks_exact(record) {
        let key = u64::from_le_bytes(rec[..8].try_into().unwrap());
        let id = sidecar
            .ids
            .get(&key_hex(key))
            .ok_or_else(|| format(format!("record key {} missing from sidecar", key_hex(key))))?;
        let vector = rec[8..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        set.insert(CaseRepresentation::from_concat(id.clone(), sidecar.layout, vector)?)?;
    }
    Ok(set)
}

#[derive(Serialize)]
struct JsonlRecord<'a> {
    id: &'a str,
    vector: &'a [f32],
}

/// `{"id","vector"}` per line, ascending id.
pub fn export_jsonl(set: &RepresentationSet) -> String {
    crate::io::to_jsonl(set.iter().map(|r| JsonlRecord {
        id: &r.case_id,
        vector: r.concat(),
    }))
    .expect("records serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RepresentationSet {
        let mut set = RepresentationSet::new();
        set.insert(CaseRepresentation::fact_issue_cross("b", &[1.0, 2.0], &[3.0, 4.0], &[5.0, -0.0]).unwrap())
            .unwrap();
        set.insert(CaseRepresentation::fact_issue_cross("a", &[0.5; 2], &[0.25; 2], &[-1.5; 2]).unwrap())
            .unwrap();
        set
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reps.bin");
        let set = sample();
        write_store(&path, &set).unwrap();
        assert!(dir.path().join("reps.ids.json").is_file());
        let back = read_store(&path).unwrap();
        assert_eq!(back, set);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"PCRS");
        assert_eq!(bytes.len(), 20 + 2 * (8 + 4 * 6));
    }

    #[test]
    fn truncated_store_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reps.bin");
        write_store(&path, &sample()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.pop();
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_store(&path), Err(StoreError::Format { .. })));
    }

    #[test]
    fn jsonl_export() {
        let out = export_jsonl(&sample());
        let first = out.lines().next().unwrap();
        assert_eq!(first, r#"{"id":"a","vector":[0.5,0.5,0.25,0.25,-1.5,-1.5]}"#);
    }
}
