//! Run configuration: one JSON file mirrors every field, flags override it.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use promptcase::backend::{EmbeddingBackend, FileBackend, MockBackend, RemoteBackend, RemoteConfig};
use promptcase::encoding::{PromptTemplate, ReformulationVariant, PRESETS};
use promptcase::retrieval::Bm25Params;
use promptcase::{Language, Tokenizer};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    /// A directory of `<id>.txt` cases with a query manifest; every query is
    /// ranked against the whole collection.
    Coliee {
        root: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
    },
    /// A JSONL query file, one candidate directory per query, golden labels.
    Lecard {
        queries: PathBuf,
        candidates: PathBuf,
        labels: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    pub summarizer_url: Option<String>,
    pub summarizer_timeout_ms: u64,
    /// Charge list file; the bundled list when absent.
    pub lexicon: Option<PathBuf>,
    pub placeholders: Vec<String>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            summarizer_url: None,
            summarizer_timeout_ms: 60_000,
            lexicon: None,
            placeholders: vec![promptcase::extraction::DEFAULT_PLACEHOLDER.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Mock {
        #[serde(default = "default_mock_dim")]
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: PathBuf,
    },
    Remote {
        url: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<String>,
        #[serde(default = "default_remote_timeout")]
        timeout_ms: u64,
    },
}

fn default_mock_dim() -> usize {
    64
}

fn default_remote_timeout() -> u64 {
    30_000
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Mock {
            dim: default_mock_dim(),
            seed: 0,
        }
    }
}

impl std::str::FromStr for BackendConfig {
    type Err = String;

    /// `mock`, `mock:<dim>`, `mock:<dim>:<seed>`, `file:<path>` or an
    /// `http(s)://` URL.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.starts_with("http://") || s.starts_with("https://") {
            return Ok(BackendConfig::Remote {
                url: s.to_string(),
                model: None,
                timeout_ms: default_remote_timeout(),
            });
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(BackendConfig::File { path: path.into() });
        }
        let mut parts = s.split(':');
        if parts.next() != Some("mock") {
            return Err(format!("unknown backend {s:?} (expected mock[:dim[:seed]], file:<path> or a URL)"));
        }
        let num = |p: Option<&str>, default: u64| -> Result<u64, String> {
            p.map_or(Ok(default), |v| v.parse().map_err(|_| format!("bad number {v:?} in backend {s:?}")))
        };
        let dim = num(parts.next(), default_mock_dim() as u64)? as usize;
        let seed = num(parts.next(), 0)?;
        if dim == 0 || parts.next().is_some() {
            return Err(format!("bad mock backend {s:?}"));
        }
        Ok(BackendConfig::Mock { dim, seed })
    }
}

impl BackendConfig {
    pub fn open(&self) -> CliResult<Box<dyn EmbeddingBackend>> {
        Ok(match self {
            BackendConfig::Mock { dim, seed } => {
                if *dim == 0 {
                    return Err(CliError::usage("mock backend dim must be positive"));
                }
                Box::new(MockBackend::new(*dim, *seed))
            }
            BackendConfig::File { path } => Box::new(FileBackend::open(path)?),
            BackendConfig::Remote { url, model, timeout_ms } => {
                let mut config = RemoteConfig::new(url.clone());
                config.model = model.clone();
                config.timeout = Duration::from_millis(*timeout_ms);
                Box::new(RemoteBackend::connect(config)?)
            }
        })
    }
}

/// What `retrieve` produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Pipeline {
    /// BM25 over the raw case texts.
    Bm25,
    /// BM25 over raw text plus prompted facts and issues.
    Bm25Promptcase,
    /// Dot product over the encoded representations.
    Dense,
    /// BM25 top `stage1_depth`, reranked by dot product.
    TwoStage,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Bm25 => "bm25",
            Pipeline::Bm25Promptcase => "bm25_promptcase",
            Pipeline::Dense => "dense",
            Pipeline::TwoStage => "two_stage",
        }
    }

    pub fn needs_store(self) -> bool {
        matches!(self, Pipeline::Dense | Pipeline::TwoStage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    pub pipeline: Pipeline,
    pub stage1_depth: usize,
    pub topk: usize,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            pipeline: Pipeline::TwoStage,
            stage1_depth: 10,
            topk: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<DatasetConfig>,
    /// Defaults to the corpus language's tokenizer.
    pub tokenizer: Option<Tokenizer>,
    pub bm25: Bm25Params,
    pub extraction: ExtractionConfig,
    /// Preset `A`-`G`, `NA`, or a path to a template JSON file.
    pub template: String,
    pub variant: ReformulationVariant,
    pub backend: BackendConfig,
    pub cache_dir: Option<PathBuf>,
    /// Cases sent to the backend per call.
    pub batch_cases: usize,
    pub stage: StageConfig,
    /// Cutoff for P, R, F1, MRR and NDCG.
    pub eval_k: usize,
    /// Adds fact-only and issue-only arms to the ablation grid.
    pub feature_arms: bool,
    /// Seed of all sampling (misleading prompts).
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            tokenizer: None,
            bm25: Bm25Params::default(),
            extraction: ExtractionConfig::default(),
            template: "A".to_string(),
            variant: ReformulationVariant::default(),
            backend: BackendConfig::default(),
            cache_dir: None,
            batch_cases: 8,
            stage: StageConfig::default(),
            eval_k: 5,
            feature_arms: false,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Reads a config file. A command manifest is accepted too: its embedded
    /// config is used, which is how a run is reproduced.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: invalid JSON: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config").filter(|_| value_is_manifest(&text)) {
            value = inner.take();
        }
        let config: RunConfig = serde_json::from_value(value)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.eval_k == 0 {
            return Err(CliError::usage("eval_k must be at least 1"));
        }
        if self.stage.topk == 0 || self.stage.stage1_depth == 0 {
            return Err(CliError::usage("topk and stage1_depth must be at least 1"));
        }
        if self.stage.pipeline == Pipeline::TwoStage && self.stage.topk > self.stage.stage1_depth {
            return Err(CliError::usage(format!(
                "two-stage topk {} exceeds stage1_depth {}",
                self.stage.topk, self.stage.stage1_depth
            )));
        }
        if self.batch_cases == 0 {
            return Err(CliError::usage("batch_cases must be at least 1"));
        }
        if !(self.bm25.k1 >= 0.0 && (0.0..=1.0).contains(&self.bm25.b)) {
            return Err(CliError::usage("bm25 needs k1 >= 0 and 0 <= b <= 1"));
        }
        Ok(())
    }

    pub fn tokenizer_for(&self, language: Language) -> Tokenizer {
        self.tokenizer.unwrap_or_else(|| Tokenizer::for_language(language))
    }

    /// The configured template for a corpus in `language`.
    pub fn template_for(&self, language: Language) -> CliResult<PromptTemplate> {
        template_named(&self.template, language)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn value_is_manifest(text: &str) -> bool {
    serde_json::from_str::<crate::manifest::Manifest>(text).is_ok()
}

pub fn template_named(name: &str, language: Language) -> CliResult<PromptTemplate> {
    let t = if PRESETS.contains(&name) || name == "NA" {
        PromptTemplate::preset(name, language)?
    } else {
        PromptTemplate::load(Path::new(name))?
    };
    t.check_language(language)?;
    Ok(t)
}
