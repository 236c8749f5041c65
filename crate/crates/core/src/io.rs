//! File helpers shared by the loaders and writers.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Writes `bytes` to `path` through a sibling temp file and a rename, so
/// readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = tmp_path(path);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Serializes `records` as JSON Lines, one object per line.
pub fn to_jsonl<T: Serialize>(records: impl IntoIterator<Item = T>) -> serde_json::Result<String> {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(&rec)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(
    path: &Path,
    records: impl IntoIterator<Item = T>,
) -> io::Result<()> {
    let body = to_jsonl(records).map_err(io::Error::other)?;
    write_atomic(path, body.as_bytes())
}

pub fn write_json_pretty<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut body = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

/// One line of a JSONL file that failed to parse.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Reads a JSONL file, keeping going past malformed lines. Blank lines are
/// skipped. Line numbers are 1-based.
pub fn read_jsonl_lenient<T: DeserializeOwned>(
    path: &Path,
) -> io::Result<(Vec<T>, Vec<LineError>)> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(rec) => records.push(rec),
            Err(e) => errors.push(LineError {
                line: idx + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((records, errors))
}

/// Reads a JSONL file, failing on the first malformed line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> io::Result<Vec<T>> {
    let (records, errors) = read_jsonl_lenient(path)?;
    if let Some(e) = errors.first() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{}:{}: {}", path.display(), e.line, e.message),
        ));
    }
    Ok(records)
}
