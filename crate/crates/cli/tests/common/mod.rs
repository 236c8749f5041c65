//! Synthetic COLIEE- and LeCaRD-style datasets for the integration tests.
//!
//! Every case belongs to a topic; a query's relevant cases are the other
//! cases of its topic. Topics own a few distinctive words (English) or a
//! charge (Chinese), so lexical and mock-dense retrieval both have signal.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_promptcase");

const TOPICS: [[&str; 4]; 6] = [
    ["refugee", "persecution", "asylum", "removal"],
    ["trademark", "infringement", "confusion", "branding"],
    ["immigration", "visa", "sponsorship", "spouse"],
    ["customs", "seizure", "forfeiture", "smuggling"],
    ["pension", "disability", "benefits", "entitlement"],
    ["procurement", "tender", "contract", "bidder"],
];

const FILLER: [&str; 16] = [
    "the", "applicant", "court", "decision", "officer", "evidence", "tribunal", "record", "judge", "review",
    "submitted", "found", "argued", "reasons", "application", "minister",
];

const CHARGES: [&str; 6] = ["盗窃罪", "诈骗罪", "故意伤害罪", "抢劫罪", "交通肇事罪", "危险驾驶罪"];
const ZH_FILLER: [&str; 10] = ["被告人", "于", "某日", "在", "某地", "将", "被害人", "财物", "经鉴定", "价值"];
const ZH_TOPIC: [&str; 6] = ["窃取手机", "骗取钱款", "持刀伤人", "抢走背包", "驾车撞人", "醉酒驾驶"];

pub struct Dataset {
    pub root: PathBuf,
    /// query id to relevant ids
    pub labels: BTreeMap<String, Vec<String>>,
}

fn sentence(rng: &mut ChaCha8Rng, topic: usize, words: usize) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(words);
    for _ in 0..words {
        if rng.random_bool(0.35) {
            out.push(TOPICS[topic].choose(rng).unwrap());
        } else {
            out.push(FILLER.choose(rng).unwrap());
        }
    }
    let mut s = out.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

/// An English judgment with background, analysis and order sections; the
/// analysis holds `placeholders` sentences citing suppressed authority.
pub fn english_case(rng: &mut ChaCha8Rng, id: &str, topic: usize, placeholders: usize) -> String {
    let facts: Vec<String> = (0..5).map(|_| sentence(rng, topic, 12)).collect();
    let mut analysis: Vec<String> = (0..3).map(|_| sentence(rng, topic, 10)).collect();
    for i in 0..placeholders {
        let s = sentence(rng, topic, 8);
        analysis.insert(i.min(analysis.len()), format!("{} See FRAGMENT_SUPPRESSED at para {}.", s, i + 3));
    }
    format!(
        "Case {id} v. Minister of Citizenship\n\nBackground\n\n{}\n\nAnalysis\n\n{}\n\nOrder\n\nThe application is dismissed.\n",
        facts.join(" "),
        analysis.join(" ")
    )
}

/// A Chinese criminal judgment with a 经审理查明 fact section and a charge.
pub fn chinese_case(rng: &mut ChaCha8Rng, topic: usize) -> String {
    let mut facts = String::new();
    for _ in 0..4 {
        for _ in 0..6 {
            facts.push_str(ZH_FILLER.choose(rng).unwrap());
        }
        facts.push_str(ZH_TOPIC[topic]);
        facts.push('。');
    }
    format!(
        "某某市人民法院\n刑事判决书\n\n公诉机关指控被告人犯{charge}。\n\n经审理查明：{facts}\n\n本院认为，被告人的行为已构成{charge}。\n\n判决如下：被告人犯{charge}，判处有期徒刑一年。\n",
        charge = CHARGES[topic],
    )
}

fn write(path: &Path, text: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text).unwrap();
}

/// `docs` English cases under `root/cases`, the first `queries` of them
/// listed as queries, and labels in `root/labels.json`.
pub fn coliee(root: &Path, docs: usize, queries: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = root.join("cases");
    let topics: Vec<usize> = (0..docs).map(|i| i % TOPICS.len()).collect();
    let ids: Vec<String> = (0..docs).map(|i| format!("{:03}", i + 1)).collect();
    for (i, id) in ids.iter().enumerate() {
        let n = rng.random_range(1..=4);
        write(&cases.join(format!("{id}.txt")), &english_case(&mut rng, id, topics[i], n));
    }
    let query_ids = &ids[..queries];
    let manifest: String = query_ids.iter().map(|q| format!("{q}.txt\n")).collect();
    write(&cases.join("queries.manifest"), &manifest);
    let mut labels = BTreeMap::new();
    for (qi, q) in query_ids.iter().enumerate() {
        let rel: Vec<String> = (0..docs)
            .filter(|&j| j != qi && topics[j] == topics[qi])
            .map(|j| ids[j].clone())
            .collect();
        labels.insert(q.clone(), rel);
    }
    write(&root.join("labels.json"), &serde_json::to_string_pretty(&labels).unwrap());
    Dataset {
        root: root.to_path_buf(),
        labels,
    }
}

/// `queries` Chinese queries with `pool` candidates each, laid out as
/// `root/queries.jsonl`, `root/candidates/<q>/<c>.txt`, `root/labels.json`.
pub fn lecard(root: &Path, queries: usize, pool: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = String::new();
    let mut labels = BTreeMap::new();
    for q in 0..queries {
        let qid = format!("{}", 5000 + q);
        let topic = q % CHARGES.len();
        let text = chinese_case(&mut rng, topic);
        lines.push_str(&serde_json::json!({"id": qid, "text": text}).to_string());
        lines.push('\n');
        let mut rel = Vec::new();
        for c in 0..pool {
            let cid = format!("{}", 100_000 + q * 1000 + c);
            let ctopic = if c % 3 == 0 { topic } else { rng.random_range(0..CHARGES.len()) };
            if ctopic == topic {
                rel.push(cid.clone());
            }
            write(
                &root.join("candidates").join(&qid).join(format!("{cid}.txt")),
                &chinese_case(&mut rng, ctopic),
            );
        }
        labels.insert(qid, rel);
    }
    write(&root.join("queries.jsonl"), &lines);
    write(&root.join("labels.json"), &serde_json::to_string_pretty(&labels).unwrap());
    Dataset {
        root: root.to_path_buf(),
        labels,
    }
}

impl Dataset {
    pub fn coliee_args(&self) -> Vec<String> {
        let r = &self.root;
        vec![
            "--dataset".into(),
            "coliee".into(),
            "--root".into(),
            r.join("cases").display().to_string(),
            "--labels".into(),
            r.join("labels.json").display().to_string(),
        ]
    }

    pub fn lecard_args(&self) -> Vec<String> {
        let r = &self.root;
        vec![
            "--dataset".into(),
            "lecard".into(),
            "--queries".into(),
            r.join("queries.jsonl").display().to_string(),
            "--candidates".into(),
            r.join("candidates").display().to_string(),
            "--labels".into(),
            r.join("labels.json").display().to_string(),
        ]
    }

    pub fn avg_relevant(&self) -> f64 {
        let total: usize = self.labels.values().map(Vec::len).sum();
        total as f64 / self.labels.len() as f64
    }
}

/// Runs the binary.
pub fn promptcase<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn promptcase")
}

/// Runs the binary and panics with its stderr unless it exits 0.
pub fn ok<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    let out = promptcase(args);
    assert!(
        out.status.success(),
        "promptcase {:?} exited {:?}\n{}",
        args.iter().map(|a| a.as_ref().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// ingest → extract → encode → retrieve → evaluate into `out`.
pub fn full_pipeline(dataset_args: &[String], out: &Path, extra: &[&str]) {
    let o = out.display().to_string();
    let with = |cmd: &str, more: &[String]| {
        let mut a: Vec<String> = vec![cmd.into(), "--out".into(), o.clone()];
        a.extend(more.iter().cloned());
        a.extend(extra.iter().map(|s| s.to_string()));
        a
    };
    ok(&with("ingest", dataset_args));
    ok(&with("extract", &[]));
    ok(&with("encode", &["--backend".into(), "mock:32:3".into()]));
    ok(&with("retrieve", &[]));
    ok(&with("evaluate", &[]));
}
