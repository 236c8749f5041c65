mod common;

use std::collections::BTreeSet;
use std::path::Path;

use promptcase::backend::{CachedBackend, CountingBackend, EmbeddingCache, MockBackend};
use promptcase::corpus::Corpus;
use promptcase::encoding::store::read_store;
use promptcase::encoding::CaseRepresentation;
use promptcase::retrieval::{dense_retrieve, trec, Bm25Index, Bm25Params, Tokenizer};
use promptcase_cli::commands::encode_with;
use promptcase_cli::{RunConfig, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};

use common::{coliee, full_pipeline, lecard, ok, promptcase};

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn code(args: &[&str]) -> i32 {
    promptcase(args).status.code().expect("exit code")
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(code(&["--help"]), EXIT_OK);
    assert_eq!(code(&["--version"]), EXIT_OK);
    assert_eq!(code(&["retrieve", "--no-such-flag"]), EXIT_USAGE);
    assert_eq!(code(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(code(&["retrieve", "--pipeline", "sparse"]), EXIT_USAGE);
    assert_eq!(code(&["encode", "--backend", "ftp://x"]), EXIT_USAGE);
}

#[test]
fn missing_inputs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let r = promptcase(&["retrieve", "--out", &out]);
    assert_eq!(r.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&r.stderr).contains("promptcase ingest"));
    assert_eq!(code(&["ingest", "--out", &out, "--dataset", "coliee", "--root", &s(&dir.path().join("nope"))]), EXIT_USAGE);
    assert_eq!(code(&["ingest", "--out", &out]), EXIT_USAGE);
    assert_eq!(code(&["--config", &s(&dir.path().join("absent.json")), "retrieve"]), EXIT_USAGE);

    // Corpus present but no store: dense modes point at encode.
    let data = coliee(&dir.path().join("data"), 12, 3, 1);
    ok(&[&["ingest".to_string(), "--out".into(), out.clone()][..], &data.coliee_args()].concat());
    let r = promptcase(&["retrieve", "--out", &out, "--pipeline", "dense"]);
    assert_eq!(r.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&r.stderr).contains("promptcase encode"));
    assert_eq!(code(&["retrieve", "--out", &out, "--topk", "20", "--stage1-depth", "10"]), EXIT_USAGE);
    assert_eq!(code(&["ablate", "--out", &out, "--pipeline", "bm25"]), EXIT_USAGE);
}

#[test]
fn extract_fails_above_error_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let data = coliee(&dir.path().join("data"), 20, 4, 2);
    ok(&[&["ingest".to_string(), "--out".into(), s(&out)][..], &data.coliee_args()].concat());
    ok(&["extract", "--out", &s(&out)]);

    let corpus = out.join("corpus.jsonl");
    let mut text = std::fs::read_to_string(&corpus).unwrap();
    text.push_str("{not json\n{\"id\": 1}\n\n{\"broken\": true}\n");
    std::fs::write(&corpus, text).unwrap();
    let r = promptcase(&["extract", "--out", &s(&out)]);
    assert_eq!(r.status.code(), Some(EXIT_RUNTIME), "{}", String::from_utf8_lossy(&r.stderr));
    let errors = std::fs::read_to_string(out.join("extract_errors.jsonl")).unwrap();
    assert_eq!(errors.lines().count(), 3);
    assert_eq!(std::fs::read_to_string(out.join("features.jsonl")).unwrap().lines().count(), 20);
}

#[test]
fn unjudged_run_query_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let data = coliee(&dir.path().join("data"), 12, 3, 3);
    ok(&[&["ingest".to_string(), "--out".into(), s(&out)][..], &data.coliee_args()].concat());
    let run = dir.path().join("bad.trec");
    std::fs::write(&run, "999 Q0 001 1 2.5 bm25\n").unwrap();
    assert_eq!(code(&["evaluate", "--out", &s(&out), "--run", &s(&run)]), EXIT_RUNTIME);
    std::fs::write(&run, "this is not a run\n").unwrap();
    assert_eq!(code(&["evaluate", "--out", &s(&out), "--run", &s(&run)]), EXIT_RUNTIME);
}

#[test]
fn coliee_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let data = coliee(&dir.path().join("data"), 30, 6, 4);
    full_pipeline(&data.coliee_args(), &out, &["--jobs", "2"]);
    for f in [
        "corpus.jsonl",
        "judgments.json",
        "stats.txt",
        "features.jsonl",
        "representations.pcrs",
        "run.trec",
        "report.json",
        "report.csv",
        "report.txt",
        "per_query.csv",
        "evaluate.manifest.json",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["num_queries"], 6);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("run,P@5,R@5,Mi-F1,Ma-F1,MRR@5,MAP,NDCG@5\n"), "{csv}");

    // Every extracted issue comes from placeholder sentences.
    let features = std::fs::read_to_string(out.join("features.jsonl")).unwrap();
    for line in features.lines() {
        let f: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(f["issue_provenance"], "placeholder_sentences");
        assert!(f["issue_text"].as_str().unwrap().contains("FRAGMENT_SUPPRESSED"));
        assert_eq!(f["fact_provenance"], "lead_fallback");
    }
}

#[test]
fn lecard_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let data = lecard(&dir.path().join("data"), 4, 15, 5);
    full_pipeline(&data.lecard_args(), &out, &[]);
    let features = std::fs::read_to_string(out.join("features.jsonl")).unwrap();
    for line in features.lines() {
        let f: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(f["fact_provenance"], "marker_section");
        assert_eq!(f["issue_provenance"], "charge_match");
    }
    let run = trec::parse_run(&std::fs::read_to_string(out.join("run.trec")).unwrap()).unwrap();
    assert_eq!(run.len(), 4);
    // Candidates never leave their own query's pool.
    for list in &run {
        let pool = data.root.join("candidates").join(&list.query_id);
        for id in list.ids() {
            assert!(pool.join(format!("{id}.txt")).is_file(), "{id} outside pool of {}", list.query_id);
        }
    }
}

fn prepared(seed: u64) -> (tempfile::TempDir, RunConfig) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let data = coliee(&dir.path().join("data"), 24, 5, seed);
    ok(&[&["ingest".to_string(), "--out".into(), s(&out)][..], &data.coliee_args()].concat());
    ok(&["extract", "--out", &s(&out)]);
    let config = RunConfig {
        out,
        ..RunConfig::default()
    };
    (dir, config)
}

#[test]
fn warm_cache_makes_no_backend_calls() {
    let (dir, config) = prepared(6);
    let cache_dir = dir.path().join("cache");
    let store = config.path("representations.pcrs");

    let cold = CachedBackend::new(CountingBackend::new(MockBackend::new(16, 1)), EmbeddingCache::open(&cache_dir).unwrap());
    encode_with(&config, &cold).unwrap();
    assert!(cold.inner().calls() > 0);
    let first = std::fs::read(&store).unwrap();

    let warm = CachedBackend::new(CountingBackend::new(MockBackend::new(16, 1)), EmbeddingCache::open(&cache_dir).unwrap());
    encode_with(&config, &warm).unwrap();
    assert_eq!(warm.inner().calls(), 0);
    assert_eq!(warm.cache().misses(), 0);
    assert_eq!(std::fs::read(&store).unwrap(), first);

    // And the uncached store is the same bytes.
    encode_with(&config, &MockBackend::new(16, 1)).unwrap();
    assert_eq!(std::fs::read(&store).unwrap(), first);
}

#[test]
fn cli_dense_equals_library_calls() {
    let (_dir, config) = prepared(7);
    let out = s(&config.out);
    ok(&["encode", "--out", &out, "--backend", "mock:24:9"]);
    ok(&["retrieve", "--out", &out, "--pipeline", "dense", "--topk", "7"]);
    let from_cli = std::fs::read_to_string(config.path("run.trec")).unwrap();

    let corpus = Corpus::read_jsonl(&config.path("corpus.jsonl")).unwrap();
    let reps = read_store(&config.path("representations.pcrs")).unwrap();
    let lists: Vec<_> = corpus
        .query_ids()
        .map(|q| {
            let pool = corpus.resolve_pool(q).unwrap();
            let candidates: Vec<&CaseRepresentation> = pool.iter().map(|id| reps.get(id).unwrap()).collect();
            dense_retrieve(reps.get(q).unwrap(), &candidates, 7).unwrap()
        })
        .collect();
    assert_eq!(from_cli, trec::write_run(&lists));
}

#[test]
fn two_stage_rows_stay_in_bm25_top_depth() {
    let (_dir, config) = prepared(8);
    let out = s(&config.out);
    ok(&["encode", "--out", &out]);
    ok(&["retrieve", "--out", &out, "--stage1-depth", "6", "--topk", "4"]);
    let run = trec::parse_run(&std::fs::read_to_string(config.path("run.trec")).unwrap()).unwrap();

    let corpus = Corpus::read_jsonl(&config.path("corpus.jsonl")).unwrap();
    let docs: Vec<(String, String)> = corpus
        .candidate_ids()
        .into_iter()
        .map(|id| (id.to_string(), corpus.get(id).unwrap().raw_text.clone()))
        .collect();
    let index = Bm25Index::build(docs, Tokenizer::for_language(promptcase::Language::En), Bm25Params::default()).unwrap();
    assert_eq!(run.len(), 5);
    for list in &run {
        assert_eq!(list.len(), 4);
        let pool = corpus.resolve_pool(&list.query_id).unwrap();
        let top: BTreeSet<String> = index
            .retrieve(&list.query_id, &corpus.get(&list.query_id).unwrap().raw_text, &pool, 6)
            .unwrap()
            .ids()
            .map(str::to_string)
            .collect();
        for id in list.ids() {
            assert!(top.contains(id), "{id} not in BM25 top-6 of {}", list.query_id);
        }
    }
}

#[test]
fn promptcase_input_changes_lexical_run() {
    let (_dir, config) = prepared(9);
    let out = s(&config.out);
    ok(&["retrieve", "--out", &out, "--pipeline", "bm25"]);
    let plain = std::fs::read_to_string(config.path("run.trec")).unwrap();
    ok(&["retrieve", "--out", &out, "--pipeline", "bm25_promptcase"]);
    let reformulated = std::fs::read_to_string(config.path("run.trec")).unwrap();
    assert_ne!(plain, reformulated);
    assert!(reformulated.lines().all(|l| l.ends_with(" bm25")));
}

#[test]
fn manifest_reproduces_its_outputs() {
    let (dir, config) = prepared(10);
    let out = s(&config.out);
    ok(&["encode", "--out", &out, "--backend", "mock:8:2", "--template", "D", "--seed", "11"]);
    let store = std::fs::read(config.path("representations.pcrs")).unwrap();
    let manifest = config.path("encode.manifest.json");
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["config"]["seed"], 11);
    assert_eq!(m["config"]["template"], "D");
    assert!(m["backend"]["version"].is_string());

    // Replay into a copy of the inputs.
    let replay = dir.path().join("replay");
    std::fs::create_dir_all(&replay).unwrap();
    for f in ["corpus.jsonl", "features.jsonl"] {
        std::fs::copy(config.path(f), replay.join(f)).unwrap();
    }
    ok(&["--config", &s(&manifest), "--out", &s(&replay), "encode"]);
    assert_eq!(std::fs::read(replay.join("representations.pcrs")).unwrap(), store);
    // A different seed changes the misleading prompts and so the vectors.
    ok(&["--config", &s(&manifest), "--out", &s(&replay), "--seed", "12", "encode"]);
    assert_ne!(std::fs::read(replay.join("representations.pcrs")).unwrap(), store);
}

#[test]
fn ablation_is_seed_deterministic() {
    let (_dir, config) = prepared(11);
    let out = s(&config.out);
    ok(&["ablate", "--out", &out, "--seed", "5"]);
    let first = std::fs::read(config.path("ablation.json")).unwrap();
    ok(&["ablate", "--out", &out, "--seed", "5"]);
    assert_eq!(std::fs::read(config.path("ablation.json")).unwrap(), first);
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 11);
    ok(&["ablate", "--out", &out, "--feature-arms"]);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(config.path("ablation.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 15);
}
