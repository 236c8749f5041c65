use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backend::remote::{http_agent, join_url, read_body};

#[derive(Debug, thiserror::Error)]
pub enum SummarizerError {
    #[error("summarizer unavailable: {0}")]
    Unavailable(String),
    #[error("malformed summarizer response: {0}")]
    Malformed(String),
}

/// Produces a short summary of `text` following `instruction`.
///
/// Implementations must be deterministic for a fixed `version()` and safe to
/// call from several threads.
pub trait Summarizer: Send + Sync {
    fn version(&self) -> String;
    fn summarize(&self, text: &str, instruction: &str) -> Result<String, SummarizerError>;
}

#[derive(Serialize)]
struct Request<'a> {
    instruction: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct Response {
    summary: String,
}

/// Client for a service exposing `POST /summarize`. Any non-200 answer or
/// transport failure counts as unavailable.
pub struct RemoteSummarizer {
    agent: ureq::Agent,
    url: String,
    version: String,
}

impl std::fmt::Debug for RemoteSummarizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteSummarizer").field("url", &self.url).finish()
    }
}

impl RemoteSummarizer {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let url = url.into();
        RemoteSummarizer {
            agent: http_agent(timeout),
            version: format!("remote:{url}"),
            url,
        }
    }

    /// Overrides the version string recorded in manifests.
    pub fn with_version(mut self, version: impl Into<String>) -> Self {
        self.version = version.into();
        self
    }
}

impl Summarizer for RemoteSummarizer {
    fn version(&self) -> String {
        self.version.clone()
    }

    fn summarize(&self, text: &str, instruction: &str) -> Result<String, SummarizerError> {
        let url = join_url(&self.url, "summarize");
        let mut resp = self
            .agent
            .post(&url)
            .send_json(Request { instruction, text })
            .map_err(|e| SummarizerError::Unavailable(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = read_body(&mut resp).map_err(|e| SummarizerError::Unavailable(e.to_string()))?;
        if status != 200 {
            return Err(SummarizerError::Unavailable(format!("status {status}")));
        }
        let parsed: Response = serde_json::from_str(&body).map_err(|e| SummarizerError::Malformed(e.to_string()))?;
        Ok(parsed.summary)
    }
}
