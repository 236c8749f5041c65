use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use super::{embed_batch, BackendDescriptor, BackendError, EmbeddingBackend, EncoderInput};
use crate::hash::fnv1a64;

const HEADER_LEN: usize = 16;
const MAX_DIM: usize = 1 << 20;

/// Cache key: FNV-1a 64 of the canonical JSON `[name, version, segments]`.
pub fn cache_key(descriptor: &BackendDescriptor, input: &EncoderInput) -> u64 {
    let canonical = serde_json::to_string(&(&descriptor.name, &descriptor.version, &input.segments))
        .expect("strings always serialize");
    fnv1a64(canonical.as_bytes())
}

fn checksum(key: u64, vector: &[f32]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&key.to_le_bytes());
    h.update(&(vector.len() as u32).to_le_bytes());
    for x in vector {
        h.update(&x.to_le_bytes());
    }
    h.finalize()
}

fn encode_record(key: u64, vector: &[f32], out: &mut Vec<u8>) {
    out.extend_from_slice(&key.to_le_bytes());
    out.extend_from_slice(&checksum(key, vector).to_le_bytes());
    out.extend_from_slice(&(vector.len() as u32).to_le_bytes());
    for x in vector {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

/// Parses one shard. Records with a bad checksum are skipped; a truncated or
/// implausible record ends the shard.
fn decode_shard(bytes: &[u8], source: &Path, into: &mut HashMap<u64, Vec<f32>>) -> usize {
    let mut pos = 0;
    let mut bad = 0;
    while pos < bytes.len() {
        if bytes.len() - pos < HEADER_LEN {
            log::warn!("{}: truncated record at byte {pos}; ignoring the rest", source.display());
            return bad + 1;
        }
        let key = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
        let sum = u32::from_le_bytes(bytes[pos + 8..pos + 12].try_into().unwrap());
        let dim = u32::from_le_bytes(bytes[pos + 12..pos + 16].try_into().unwrap()) as usize;
        let body = pos + HEADER_LEN;
        if dim == 0 || dim > MAX_DIM || bytes.len() - body < dim * 4 {
            log::warn!("{}: unreadable record at byte {pos}; ignoring the rest", source.display());
            return bad + 1;
        }
        let vector: Vec<f32> = bytes[body..body + dim * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        pos = body + dim * 4;
        if checksum(key, &vector) != sum {
            log::warn!("{}: checksum mismatch for key {key:016x}; treating as a miss", source.display());
            bad += 1;
            continue;
        }
        into.insert(key, vector);
    }
    bad
}

/// Content-addressed, append-only embedding store sharded by the top byte of
/// the key. All shards are read at open; concurrent readers share a lock and
/// appends are serialized.
#[derive(Debug)]
pub struct EmbeddingCache {
    dir: PathBuf,
    entries: RwLock<HashMap<u64, Vec<f32>>>,
    append: Mutex<()>,
    corrupt: usize,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl EmbeddingCache {
    pub fn open(dir: &Path) -> Result<Self, BackendError> {
        let io = |source| BackendError::Io {
            context: dir.display().to_string(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        let mut shards: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "bin"))
            .collect();
        shards.sort();
        let mut entries = HashMap::new();
        let mut corrupt = 0;
        for shard in shards {
            let bytes = fs::read(&shard).map_err(|source| BackendError::Io {
                context: shard.display().to_string(),
                source,
            })?;
            corrupt += decode_shard(&bytes, &shard, &mut entries);
        }
        Ok(EmbeddingCache {
            dir: dir.to_path_buf(),
            entries: RwLock::new(entries),
            append: Mutex::new(()),
            corrupt,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records skipped at open because they failed verification.
    pub fn corrupt_records(&self) -> usize {
        self.corrupt
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn get(&self, key: u64) -> Option<Vec<f32>> {
        self.entries.read().unwrap().get(&key).cloned()
    }

    fn shard_path(&self, key: u64) -> PathBuf {
        self.dir.join(format!("{:02x}.bin", key >> 56))
    }

    /// Appends records to their shards and makes them visible to readers.
    pub fn insert_many(&self, records: &[(u64, Vec<f32>)]) -> Result<(), BackendError> {
        if records.is_empty() {
            return Ok(());
        }
        let mut by_shard: HashMap<PathBuf, Vec<u8>> = HashMap::new();
        for (key, v) in records {
            encode_record(*key, v, by_shard.entry(self.shard_path(*key)).or_default());
        }
        {
            let _guard = self.append.lock().unwrap();
            for (path, bytes) in by_shard {
                let mut f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&path)
                    .and_then(|mut f| f.write_all(&bytes).map(|_| f))
                    .map_err(|source| BackendError::Io {
                        context: path.display().to_string(),
                        source,
                    })?;
                f.flush().map_err(|source| BackendError::Io {
                    context: path.display().to_string(),
                    source,
                })?;
            }
        }
        let mut entries = self.entries.write().unwrap();
        for (key, v) in records {
            entries.insert(*key, v.clone());
        }
        Ok(())
    }
}

/// Serves hits from `cache`, embeds the distinct misses in one backend call,
/// persists them and returns vectors aligned with `inputs`.
pub fn cache_get_or_embed<B: EmbeddingBackend + ?Sized>(
    cache: &EmbeddingCache,
    backend: &B,
    inputs: &[EncoderInput],
) -> Result<Vec<Vec<f32>>, BackendError> {
    super::check_inputs(inputs)?;
    let descriptor = backend.descriptor();
    let keys: Vec<u64> = inputs.iter().map(|i| cache_key(descriptor, i)).collect();
    let mut out: Vec<Option<Vec<f32>>> = Vec::with_capacity(inputs.len());
    let mut pending: HashMap<u64, usize> = HashMap::new();
    let mut miss_inputs = Vec::new();
    let mut miss_keys = Vec::new();
    {
        let entries = cache.entries.read().unwrap();
        for (input, key) in inputs.iter().zip(&keys) {
            match entries.get(key) {
                Some(v) if v.len() == descriptor.dim => out.push(Some(v.clone())),
                _ => {
                    out.push(None);
                    if !pending.contains_key(key) {
                        pending.insert(*key, miss_inputs.len());
                        miss_inputs.push(input.clone());
                        miss_keys.push(*key);
                    }
                }
            }
        }
    }
    cache.hits.fetch_add(inputs.len() - out.iter().filter(|v| v.is_none()).count(), Ordering::Relaxed);
    cache.misses.fetch_add(miss_inputs.len(), Ordering::Relaxed);
    if !miss_inputs.is_empty() {
        let fresh = embed_batch(backend, &miss_inputs)?;
        let records: Vec<(u64, Vec<f32>)> = miss_keys.into_iter().zip(fresh).collect();
        cache.insert_many(&records)?;
        for (slot, key) in out.iter_mut().zip(&keys) {
            if slot.is_none() {
                *slot = Some(records[pending[key]].1.clone());
            }
        }
    }
    Ok(out.into_iter().map(|v| v.expect("every slot filled")).collect())
}

/// A backend whose calls go through an [`EmbeddingCache`].
pub struct CachedBackend<B> {
    inner: B,
    cache: EmbeddingCache,
}

impl<B: EmbeddingBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: EmbeddingCache) -> Self {
        CachedBackend { inner, cache }
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: EmbeddingBackend> EmbeddingBackend for CachedBackend<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        self.inner.descriptor()
    }

    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        cache_get_or_embed(&self.cache, &self.inner, inputs)
    }
}

/// Counts calls and inputs that reach the wrapped backend.
pub struct CountingBackend<B> {
    inner: B,
    calls: AtomicUsize,
    inputs: AtomicUsize,
}

impl<B: EmbeddingBackend> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        CountingBackend {
            inner,
            calls: AtomicUsize::new(0),
            inputs: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn inputs(&self) -> usize {
        self.inputs.load(Ordering::Relaxed)
    }
}

impl<B: EmbeddingBackend> EmbeddingBackend for CountingBackend<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        self.inner.descriptor()
    }

    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inputs.fetch_add(inputs.len(), Ordering::Relaxed);
        self.inner.embed(inputs)
    }
}
