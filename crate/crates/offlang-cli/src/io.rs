//! File IO and serialization around the core types: corpus and pair TSVs,
//! checkpoints, key-value config files, metrics JSON, history JSONL, and
//! projection CSV. All writers are deterministic byte-for-byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use offlang_core::corpus::{self, Corpus, DistributionReport, HierarchyRule};
use offlang_core::evalviz::{Metrics, Projection};
use offlang_core::model::{Checkpoint, CheckpointMeta, ModelParams};
use offlang_core::pairs::{Pair, PairDataset, SamplingPlan};
use offlang_core::train::TrainHistory;
use offlang_core::Task;

use crate::CliError;

pub const PAIRS_HEADER: &str = "text_a\ttext_b\tsimilar";

fn data_err(context: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{context}: {err}"))
}

pub fn source_tag(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into())
}

/// Load a labeled corpus from a TSV file.
pub fn load_corpus(path: &Path, has_header: bool) -> Result<Corpus, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data_err(&path.display().to_string(), e))?;
    corpus::parse_tsv(&text, has_header, &source_tag(path))
        .map_err(|e| data_err(&path.display().to_string(), e))
}

pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<(), CliError> {
    fs::write(path, corpus::format_tsv(corpus, true))
        .map_err(|e| data_err(&path.display().to_string(), e))
}

/// Load a pair file (header `text_a\ttext_b\tsimilar`, similar in {0,1}).
pub fn load_pairs(path: &Path) -> Result<PairDataset, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data_err(&path.display().to_string(), e))?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(CliError::Data(format!(
                "{}: line {}: expected 3 columns, found {}",
                path.display(),
                idx + 1,
                cols.len()
            )));
        }
        let similar = match cols[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(CliError::Data(format!(
                    "{}: line {}: similar must be 0 or 1, found {other:?}",
                    path.display(),
                    idx + 1
                )))
            }
        };
        pairs.push(Pair {
            text_a: cols[0].into(),
            text_b: cols[1].into(),
            similar,
        });
    }
    let plan = SamplingPlan {
        size: pairs.len() as u64,
        seed: 0,
    };
    Ok(PairDataset { pairs, plan })
}

pub fn save_pairs(path: &Path, dataset: &PairDataset) -> Result<(), CliError> {
    let mut out = String::from(PAIRS_HEADER);
    out.push('\n');
    for p in &dataset.pairs {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| {
                    if c == '\t' || c == '\n' || c == '\r' {
                        ' '
                    } else {
                        c
                    }
                })
                .collect()
        };
        out.push_str(&clean(&p.text_a));
        out.push('\t');
        out.push_str(&clean(&p.text_b));
        out.push('\t');
        out.push(if p.similar { '1' } else { '0' });
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| data_err(&path.display().to_string(), e))
}

pub fn save_checkpoint(
    path: &Path,
    params: &ModelParams,
    meta: Option<CheckpointMeta>,
) -> Result<(), CliError> {
    let encoded = Checkpoint::new(params.clone(), meta).encode();
    fs::write(path, encoded).map_err(|e| data_err(&path.display().to_string(), e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data_err(&path.display().to_string(), e))?;
    Checkpoint::decode(&text).map_err(|e| data_err(&path.display().to_string(), e))
}

/// Parse a `key = value` config file; '#' starts a comment.
pub fn load_kv(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data_err(&path.display().to_string(), e))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Data(format!(
                "{}: line {}: expected key = value",
                path.display(),
                idx + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn metrics_json(task: Task, metrics: &Metrics) -> Value {
    let labels = task.labels();
    let per_class: Vec<Value> = metrics
        .per_class
        .iter()
        .enumerate()
        .map(|(i, m)| {
            json!({
                "label": labels[i],
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            })
        })
        .collect();
    json!({
        "task": task.name(),
        "total": metrics.total,
        "accuracy": metrics.accuracy,
        "macro_precision": metrics.macro_precision,
        "macro_recall": metrics.macro_recall,
        "macro_f1": metrics.macro_f1,
        "per_class": per_class,
        "confusion": metrics.confusion,
    })
}

pub fn distribution_json(report: &DistributionReport) -> Value {
    let labels: Vec<Value> = report
        .entries
        .iter()
        .map(|e| json!({"label": e.label, "count": e.count, "fraction": e.fraction}))
        .collect();
    json!({
        "task": report.task.name(),
        "total": report.total,
        "labels": labels,
    })
}

pub fn violations_json(violations: &[(String, HierarchyRule)]) -> Value {
    let list: Vec<Value> = violations
        .iter()
        .map(|(id, rule)| json!({"id": id, "rule": rule.name()}))
        .collect();
    json!({"count": violations.len(), "violations": list})
}

pub fn history_jsonl(history: &TrainHistory) -> String {
    let mut out = String::new();
    for e in &history.epochs {
        let line = json!({
            "epoch": e.epoch,
            "train_loss": e.train_loss,
            "dev_f1_a": e.dev_f1.a,
            "dev_f1_b": e.dev_f1.b,
            "dev_f1_c": e.dev_f1.c,
            "skipped_batches": e.skipped_batches,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    let footer = json!({
        "best_epoch": history.best_epoch,
        "epochs_run": history.epochs.len(),
        "stopped_early": history.stopped_early,
    });
    out.push_str(&footer.to_string());
    out.push('\n');
    out
}

pub fn projection_csv(projection: &Projection) -> String {
    let k = projection.components.len();
    let mut out = String::new();
    if k == 2 {
        out.push_str("x,y,label\n");
    } else {
        for i in 1..=k {
            out.push_str(&format!("c{i},"));
        }
        out.push_str("label\n");
    }
    for (row, label) in projection.coordinates.iter().zip(&projection.labels) {
        for v in row {
            out.push_str(&format!("{v:?},"));
        }
        out.push_str(label);
        out.push('\n');
    }
    out
}

/// Write a JSON document to `path`, or to stdout when `path` is `None`.
pub fn emit_json(path: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let mut body = value.to_string();
    body.push('\n');
    match path {
        Some(p) => fs::write(p, body).map_err(|e| data_err(&p.display().to_string(), e)),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn write_text(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| data_err(&path.display().to_string(), e))
}
