use promptcase::eval::{evaluate_run, MetricsReport};
use promptcase::retrieval::trec;

use super::{load_judgments, JUDGMENTS_FILE, PER_QUERY_CSV, REPORT_CSV, REPORT_JSON, REPORT_TXT, RUN_FILE};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

/// Scores `run` (default: the run file in the output directory) against the
/// ingested judgments.
pub fn cmd_evaluate(config: &RunConfig, run: Option<&std::path::Path>) -> CliResult<MetricsReport> {
    let run_path = run.map_or_else(|| config.path(RUN_FILE), std::path::Path::to_path_buf);
    if !run_path.exists() {
        return Err(CliError::usage(format!(
            "{} not found; run `promptcase retrieve` first",
            run_path.display()
        )));
    }
    let judgments = load_judgments(config)?;
    let text = std::fs::read_to_string(&run_path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", run_path.display())))?;
    let lists = trec::parse_run(&text).map_err(|e| CliError::runtime(format!("{}: {e}", run_path.display())))?;
    let report = evaluate_run(&lists, &judgments, config.eval_k)?;
    if !report.missing_from_run.is_empty() {
        log::warn!(
            "{} judged queries are missing from the run and score zero",
            report.missing_from_run.len()
        );
    }
    if report.aggregate.r > report.recall_bound + 1e-9 {
        return Err(CliError::runtime(format!(
            "R@{} = {} exceeds its bound {}",
            report.k, report.aggregate.r, report.recall_bound
        )));
    }

    let mut manifest = Manifest::new("evaluate", config);
    manifest.input(&run_path)?;
    manifest.input(&config.path(JUDGMENTS_FILE))?;
    let label = lists
        .first()
        .and_then(|l| l.stage)
        .map_or("run", |s| s.name());
    let table = report.table(label);
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    manifest.output(&config.path(REPORT_JSON), json.as_bytes())?;
    manifest.output(&config.path(REPORT_CSV), table.to_csv().as_bytes())?;
    manifest.output(&config.path(REPORT_TXT), table.to_text().as_bytes())?;
    manifest.output(&config.path(PER_QUERY_CSV), report.per_query_csv().as_bytes())?;
    manifest.summary = serde_json::json!({
        "queries": report.num_queries,
        "recall_bound": report.recall_bound,
        "missing_from_run": report.missing_from_run.len(),
    });
    manifest.write(&config.out)?;
    print!("{}", table.to_text());
    Ok(report)
}
