use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use promptcase::encoding::FeatureMode;
use promptcase::Tokenizer;

use crate::commands;
use crate::config::{BackendConfig, DatasetConfig, Pipeline, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "promptcase", version, about = "Legal case retrieval with prompt-based case encoding")]
pub struct Cli {
    /// JSON run config, or a manifest written by an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for misleading-prompt sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a dataset into the normalized corpus and print its statistics.
    Ingest(IngestArgs),
    /// Extract legal facts and legal issues from every case.
    Extract(ExtractArgs),
    /// Encode cases into representation vectors.
    Encode {
        #[command(flatten)]
        prompt: PromptArgs,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Rank candidates for every query and write a TREC run.
    Retrieve {
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[command(flatten)]
        prompt: PromptArgs,
    },
    /// Score a run against the relevance judgments.
    Evaluate {
        /// Run file (default: run.trec in the output directory).
        #[arg(long)]
        run: Option<PathBuf>,
        /// Metric cutoff.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run the prompt/feature ablation and template grid.
    Ablate {
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[command(flatten)]
        backend: BackendArgs,
        /// Instructive template used by the prompt-on variant rows.
        #[arg(long)]
        template: Option<String>,
        /// Metric cutoff.
        #[arg(long)]
        k: Option<usize>,
        /// Also run fact-only and issue-only encodings.
        #[arg(long)]
        feature_arms: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DatasetKind {
    Coliee,
    Lecard,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetKind>,
    /// COLIEE-style case directory.
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// LeCaRD-style query JSONL.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// LeCaRD-style candidate directory (one sub-directory per query).
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Relevance labels `{query: [case, ...]}`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Tokenizer for the statistics table: english_simple or chinese_bigram.
    #[arg(long, value_parser = parse_tokenizer)]
    pub tokenizer: Option<Tokenizer>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Base URL of a summarization service.
    #[arg(long)]
    pub summarizer: Option<String>,
    /// Charge list file, one charge per line.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Placeholder marking suppressed text (repeatable).
    #[arg(long = "placeholder")]
    pub placeholders: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    /// Preset A-G, NA, or a template JSON file.
    #[arg(long)]
    pub template: Option<String>,
    /// Encoded text: whole_text, fact_only, issue_only or fact_and_issue.
    #[arg(long, value_parser = parse_feature_mode)]
    pub feature_mode: Option<FeatureMode>,
    /// Encode without prompt prefixes.
    #[arg(long)]
    pub no_prompt: bool,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// mock[:dim[:seed]], file:<path>, or the URL of an encoder service.
    #[arg(long)]
    pub backend: Option<BackendConfig>,
    /// Directory of the embedding cache.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Cases per backend call.
    #[arg(long)]
    pub batch_cases: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RetrievalArgs {
    #[arg(long, value_enum)]
    pub pipeline: Option<Pipeline>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// english_simple or chinese_bigram (default: by corpus language).
    #[arg(long, value_parser = parse_tokenizer)]
    pub tokenizer: Option<Tokenizer>,
    /// BM25 candidates handed to the dense rerank.
    #[arg(long)]
    pub stage1_depth: Option<usize>,
    /// Results kept per query.
    #[arg(long)]
    pub topk: Option<usize>,
}

fn parse_tokenizer(s: &str) -> Result<Tokenizer, String> {
    s.parse::<Tokenizer>().map_err(|e| e.to_string())
}

fn parse_feature_mode(s: &str) -> Result<FeatureMode, String> {
    s.parse()
}

impl RetrievalArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(p) = self.pipeline {
            c.stage.pipeline = p;
        }
        if let Some(v) = self.k1 {
            c.bm25.k1 = v;
        }
        if let Some(v) = self.b {
            c.bm25.b = v;
        }
        if self.tokenizer.is_some() {
            c.tokenizer = self.tokenizer;
        }
        if let Some(v) = self.stage1_depth {
            c.stage.stage1_depth = v;
        }
        if let Some(v) = self.topk {
            c.stage.topk = v;
        }
    }
}

impl PromptArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(t) = &self.template {
            c.template = t.clone();
        }
        if let Some(m) = self.feature_mode {
            c.variant.feature_mode = m;
        }
        if self.no_prompt {
            c.variant.use_prompt = false;
        }
    }
}

impl BackendArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(b) = &self.backend {
            c.backend = b.clone();
        }
        if self.cache_dir.is_some() {
            c.cache_dir = self.cache_dir.clone();
        }
        if let Some(n) = self.batch_cases {
            c.batch_cases = n;
        }
    }
}

fn dataset_from(args: &IngestArgs, current: Option<DatasetConfig>) -> CliResult<Option<DatasetConfig>> {
    let Some(kind) = args.dataset else {
        if args.root.is_some() || args.queries.is_some() || args.candidates.is_some() {
            return Err(CliError::usage("--dataset is required with dataset paths"));
        }
        return Ok(current);
    };
    let missing = |flag: &str| CliError::usage(format!("--dataset {kind:?} needs {flag}").to_lowercase());
    Ok(Some(match kind {
        DatasetKind::Coliee => DatasetConfig::Coliee {
            root: args.root.clone().ok_or_else(|| missing("--root"))?,
            labels: args.labels.clone(),
        },
        DatasetKind::Lecard => DatasetConfig::Lecard {
            queries: args.queries.clone().ok_or_else(|| missing("--queries"))?,
            candidates: args.candidates.clone().ok_or_else(|| missing("--candidates"))?,
            labels: args.labels.clone().ok_or_else(|| missing("--labels"))?,
        },
    }))
}

impl Cli {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(out) = &self.out {
            c.out = out.clone();
        }
        match &self.command {
            Command::Ingest(a) => {
                c.dataset = dataset_from(a, c.dataset.take())?;
                if a.tokenizer.is_some() {
                    c.tokenizer = a.tokenizer;
                }
            }
            Command::Extract(a) => {
                if a.summarizer.is_some() {
                    c.extraction.summarizer_url = a.summarizer.clone();
                }
                if a.lexicon.is_some() {
                    c.extraction.lexicon = a.lexicon.clone();
                }
                if !a.placeholders.is_empty() {
                    c.extraction.placeholders = a.placeholders.clone();
                }
            }
            Command::Encode { prompt, backend } => {
                prompt.apply(&mut c);
                backend.apply(&mut c);
            }
            Command::Retrieve { retrieval, prompt } => {
                retrieval.apply(&mut c);
                prompt.apply(&mut c);
            }
            Command::Evaluate { k, .. } => {
                if let Some(k) = k {
                    c.eval_k = *k;
                }
            }
            Command::Ablate {
                retrieval,
                backend,
                template,
                k,
                feature_arms,
            } => {
                retrieval.apply(&mut c);
                backend.apply(&mut c);
                if let Some(t) = template {
                    c.template = t.clone();
                }
                if let Some(k) = k {
                    c.eval_k = *k;
                }
                c.feature_arms |= feature_arms;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs the parsed command.
pub fn run(cli: &Cli) -> CliResult<()> {
    let config = cli.resolve()?;
    std::fs::create_dir_all(&config.out)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", config.out.display())))?;
    match &cli.command {
        Command::Ingest(_) => commands::cmd_ingest(&config),
        Command::Extract(_) => commands::cmd_extract(&config).map(drop),
        Command::Encode { .. } => commands::cmd_encode(&config).map(drop),
        Command::Retrieve { .. } => commands::cmd_retrieve(&config).map(drop),
        Command::Evaluate { run, .. } => commands::cmd_evaluate(&config, run.as_deref()).map(drop),
        Command::Ablate { .. } => commands::cmd_ablate(&config).map(drop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("promptcase").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 4, "stage": {"pipeline": "dense", "topk": 7}}"#).unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["--config", p, "retrieve", "--topk", "3"]).resolve().unwrap();
        assert_eq!((c.seed, c.stage.pipeline, c.stage.topk), (4, Pipeline::Dense, 3));
        let c = parse(&["--config", p, "--seed", "9", "retrieve"]).resolve().unwrap();
        assert_eq!((c.seed, c.stage.topk), (9, 7));
    }

    #[test]
    fn dataset_flags() {
        let c = parse(&["ingest", "--dataset", "coliee", "--root", "x"]).resolve().unwrap();
        assert!(matches!(c.dataset, Some(DatasetConfig::Coliee { .. })));
        let err = parse(&["ingest", "--dataset", "lecard", "--queries", "q"]).resolve().unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn manifests_are_configs() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            seed: 77,
            ..RunConfig::default()
        };
        let manifest = crate::manifest::Manifest::new("encode", &config);
        manifest.write(dir.path()).unwrap();
        let path = dir.path().join("encode.manifest.json");
        assert_eq!(RunConfig::load(&path).unwrap(), config);
    }
}
