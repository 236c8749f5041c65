use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendDescriptor, BackendError, EmbeddingBackend, EncoderInput};

pub const ENV_EMBED_URL: &str = "PROMPTCASE_EMBED_URL";
pub const ENV_EMBED_TIMEOUT_MS: &str = "PROMPTCASE_EMBED_TIMEOUT_MS";
const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
const BODY_LIMIT: u64 = 512 * 1024 * 1024;

/// Retries on transport failures and 5xx responses only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: usize,
    pub base_delay: Duration,
    pub factor: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(200),
            factor: 4,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based).
    pub fn delay(&self, retry: usize) -> Duration {
        let exp = u32::try_from(retry.saturating_sub(1)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(self.factor.saturating_pow(exp))
    }
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub url: String,
    /// Model name sent with each request; defaults to the service's name.
    pub model: Option<String>,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    /// Inputs per HTTP request.
    pub max_batch: usize,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        RemoteConfig {
            url: url.into(),
            model: None,
            timeout: DEFAULT_TIMEOUT,
            retry: RetryPolicy::default(),
            max_batch: 32,
        }
    }

    /// Reads the service URL and optional timeout from the environment.
    pub fn from_env() -> Result<Self, BackendError> {
        let url = std::env::var(ENV_EMBED_URL)
            .map_err(|_| BackendError::Config(format!("{ENV_EMBED_URL} is not set")))?;
        let mut config = RemoteConfig::new(url);
        if let Ok(ms) = std::env::var(ENV_EMBED_TIMEOUT_MS) {
            let ms: u64 = ms
                .trim()
                .parse()
                .map_err(|_| BackendError::Config(format!("{ENV_EMBED_TIMEOUT_MS} must be an integer, got {ms:?}")))?;
            config.timeout = Duration::from_millis(ms);
        }
        Ok(config)
    }
}

#[derive(Debug, Deserialize)]
struct Health {
    name: String,
    model_version: String,
    dim: usize,
    max_tokens: usize,
    #[serde(default)]
    pooling: Option<String>,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    inputs: &'a [EncoderInput],
    max_tokens: usize,
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<Vec<f32>>,
    model_version: String,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
}

enum Failure {
    Retryable(String),
    Fatal(BackendError),
}

pub(crate) fn http_agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .new_agent()
}

pub(crate) fn join_url(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}

pub(crate) fn read_body(resp: &mut ureq::http::Response<ureq::Body>) -> Result<String, ureq::Error> {
    resp.body_mut().with_config().limit(BODY_LIMIT).read_to_string()
}

/// HTTP client for an encoder service speaking the `/health` + `/embed`
/// protocol.
pub struct RemoteBackend {
    agent: ureq::Agent,
    config: RemoteConfig,
    model: String,
    pooling: Option<String>,
    descriptor: BackendDescriptor,
}

impl std::fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteBackend")
            .field("url", &self.config.url)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl RemoteBackend {
    /// Queries `/health` for the descriptor.
    pub fn connect(config: RemoteConfig) -> Result<Self, BackendError> {
        if config.max_batch == 0 || config.retry.attempts == 0 {
            return Err(BackendError::Config("max_batch and retry attempts must be positive".into()));
        }
        let agent = http_agent(config.timeout);
        let url = join_url(&config.url, "health");
        let health: Health = fetch_health(&agent, &url, &config.retry)?;
        if health.dim == 0 || health.max_tokens == 0 {
            return Err(BackendError::Malformed(format!(
                "health reports dim={} max_tokens={}",
                health.dim, health.max_tokens
            )));
        }
        let model = config.model.clone().unwrap_or_else(|| health.name.clone());
        Ok(RemoteBackend {
            agent,
            model,
            pooling: health.pooling,
            descriptor: BackendDescriptor {
                name: health.name,
                version: health.model_version,
                dim: health.dim,
                max_tokens: health.max_tokens,
            },
            config,
        })
    }

    pub fn pooling(&self) -> Option<&str> {
        self.pooling.as_deref()
    }

    fn post_once(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, Failure> {
        let url = join_url(&self.config.url, "embed");
        let request = EmbedRequest {
            model: &self.model,
            inputs,
            max_tokens: self.descriptor.max_tokens,
        };
        let mut resp = self
            .agent
            .post(&url)
            .send_json(&request)
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = read_body(&mut resp).map_err(|e| Failure::Retryable(e.to_string()))?;
        if status >= 500 {
            return Err(Failure::Retryable(format!("status {status}: {}", error_message(&body))));
        }
        if status != 200 {
            return Err(Failure::Fatal(BackendError::Rejected {
                status,
                message: error_message(&body),
            }));
        }
        let parsed: EmbedResponse =
            serde_json::from_str(&body).map_err(|e| Failure::Fatal(BackendError::Malformed(e.to_string())))?;
        if parsed.model_version != self.descriptor.version {
            return Err(Failure::Fatal(BackendError::Malformed(format!(
                "model_version {:?} differs from health {:?}",
                parsed.model_version, self.descriptor.version
            ))));
        }
        if parsed.dim != self.descriptor.dim {
            return Err(Failure::Fatal(BackendError::Malformed(format!(
                "dim {} differs from health dim {}",
                parsed.dim, self.descriptor.dim
            ))));
        }
        Ok(parsed.vectors)
    }

    fn post_with_retry(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, Failure> {
        let retry = &self.config.retry;
        let mut last = String::new();
        for attempt in 0..retry.attempts {
            if attempt > 0 {
                thread::sleep(retry.delay(attempt));
            }
            match self.post_once(inputs) {
                Ok(v) => return Ok(v),
                Err(Failure::Retryable(msg)) => {
                    log::warn!("embed attempt {} of {} failed: {msg}", attempt + 1, retry.attempts);
                    last = msg;
                }
                Err(fatal) => return Err(fatal),
            }
        }
        Err(Failure::Retryable(last))
    }
}

fn error_message(body: &str) -> String {
    serde_json::from_str::<ErrorBody>(body)
        .map(|e| e.error)
        .unwrap_or_else(|_| body.chars().take(200).collect())
}

fn fetch_health(agent: &ureq::Agent, url: &str, retry: &RetryPolicy) -> Result<Health, BackendError> {
    let mut last = String::new();
    for attempt in 0..retry.attempts {
        if attempt > 0 {
            thread::sleep(retry.delay(attempt));
        }
        let mut resp = match agent.get(url).call() {
            Ok(r) => r,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let status = resp.status().as_u16();
        let body = match read_body(&mut resp) {
            Ok(b) => b,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        if status >= 500 {
            last = format!("status {status}: {}", error_message(&body));
            continue;
        }
        if status != 200 {
            return Err(BackendError::Rejected {
                status,
                message: error_message(&body),
            });
        }
        return serde_json::from_str(&body).map_err(|e| BackendError::Malformed(format!("health: {e}")));
    }
    Err(BackendError::Transport {
        failed: Vec::new(),
        attempts: retry.attempts,
        message: format!("{url}: {last}"),
    })
}

impl EmbeddingBackend for RemoteBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    /// Sends inputs in chunks of `max_batch`. If any chunk still fails after
    /// retries, the error lists the indices of every input that got no vector.
    fn embed(&self, inputs: &[EncoderInput]) -> Result<Vec<Vec<f32>>, BackendError> {
        super::check_inputs(inputs)?;
        let mut out = Vec::with_capacity(inputs.len());
        let mut failed = Vec::new();
        let mut message = String::new();
        for (chunk_no, chunk) in inputs.chunks(self.config.max_batch).enumerate() {
            let offset = chunk_no * self.config.max_batch;
            match self.post_with_retry(chunk) {
                Ok(vectors) => {
                    super::check_vectors(&self.descriptor, chunk.len(), &vectors)?;
                    out.extend(vectors);
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    failed.extend(offset..offset + chunk.len());
                    message = msg;
                }
            }
        }
        if !failed.is_empty() {
            return Err(BackendError::Transport {
                failed,
                attempts: self.config.retry.attempts,
                message,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_schedule() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay(1), Duration::from_millis(200));
        assert_eq!(p.delay(2), Duration::from_millis(800));
    }

    #[test]
    fn url_joining() {
        assert_eq!(join_url("http://h:1/", "/embed"), "http://h:1/embed");
        assert_eq!(join_url("http://h:1/api", "health"), "http://h:1/api/health");
    }
}
