//! Entity-level scoring and multi-seed aggregation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::bio::{extract_mentions, InvalidSequence, Mention, RepairPolicy};
use crate::corpus::Corpus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("corpora disagree on query {0:?} (missing or token count differs)")]
    CorpusMismatch(String),
    #[error("query {query_id:?}: {source}")]
    InvalidSequence {
        query_id: String,
        source: InvalidSequence,
    },
    #[error("input must not be empty")]
    EmptyInput,
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

fn round2<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_f64((value * 100.0).round() / 100.0)
}

/// Precision/recall/F1 in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MicroScores {
    #[serde(serialize_with = "round2")]
    pub precision: f64,
    #[serde(serialize_with = "round2")]
    pub recall: f64,
    #[serde(serialize_with = "round2")]
    pub f1: f64,
}

/// Per-type precision/recall/F1 with the underlying mention counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeScores {
    #[serde(serialize_with = "round2")]
    pub precision: f64,
    #[serde(serialize_with = "round2")]
    pub recall: f64,
    #[serde(serialize_with = "round2")]
    pub f1: f64,
    pub gold_count: usize,
    pub pred_count: usize,
}

/// Entity-level evaluation report. Values are percentages held at full
/// precision; JSON serialization rounds to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub micro: MicroScores,
    pub per_type: BTreeMap<String, TypeScores>,
    #[serde(serialize_with = "round2")]
    pub token_accuracy: f64,
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn precision_recall(matched: usize, pred: usize, gold: usize) -> (f64, f64) {
    let p = if pred > 0 {
        matched as f64 / pred as f64
    } else if gold == 0 {
        1.0
    } else {
        0.0
    };
    let r = if gold > 0 {
        matched as f64 / gold as f64
    } else if pred == 0 {
        1.0
    } else {
        0.0
    };
    (p * 100.0, r * 100.0)
}

/// Scores a prediction layer against a gold layer by exact (start, end, type)
/// mention matches. Queries are matched by id, so the result is invariant
/// under query reordering.
pub fn score(
    pred: &Corpus,
    pred_layer: &str,
    gold: &Corpus,
    gold_layer: &str,
    repair: RepairPolicy,
) -> Result<EvalReport, EvalError> {
    if pred.len() != gold.len() {
        let pred_ids: BTreeSet<&str> = pred.queries().iter().map(|q| q.id()).collect();
        let gold_ids: BTreeSet<&str> = gold.queries().iter().map(|q| q.id()).collect();
        let odd = pred_ids
            .symmetric_difference(&gold_ids)
            .next()
            .map(|s| s.to_string())
            .unwrap_or_default();
        return Err(EvalError::CorpusMismatch(odd));
    }
    let gold_by_id: HashMap<&str, &crate::corpus::TaggedQuery> =
        gold.queries().iter().map(|q| (q.id(), q)).collect();

    let mut matched = 0usize;
    let mut pred_total = 0usize;
    let mut gold_total = 0usize;
    let mut per_type: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    let mut token_matches = 0usize;
    let mut token_total = 0usize;

    for pred_query in pred.queries() {
        let gold_query = gold_by_id
            .get(pred_query.id())
            .copied()
            .ok_or_else(|| EvalError::CorpusMismatch(pred_query.id().to_owned()))?;
        if gold_query.len() != pred_query.len() {
            return Err(EvalError::CorpusMismatch(pred_query.id().to_owned()));
        }
        let pred_labels = pred_query.require_layer(pred_layer)?;
        let gold_labels = gold_query.require_layer(gold_layer)?;

        token_total += pred_labels.len();
        token_matches += pred_labels
            .iter()
            .zip(gold_labels)
            .filter(|(a, b)| a == b)
            .count();

        let pred_mentions = extract(pred_labels, repair, pred_query.id())?;
        let gold_mentions = extract(gold_labels, repair, gold_query.id())?;
        let gold_set: BTreeSet<&Mention> = gold_mentions.iter().collect();

        pred_total += pred_mentions.len();
        gold_total += gold_mentions.len();
        for m in &pred_mentions {
            let entry = per_type.entry(m.ty.clone()).or_default();
            entry.1 += 1;
            if gold_set.contains(m) {
                matched += 1;
                entry.0 += 1;
            }
        }
        for m in &gold_mentions {
            per_type.entry(m.ty.clone()).or_default().2 += 1;
        }
    }

    let (p, r) = precision_recall(matched, pred_total, gold_total);
    let micro = MicroScores {
        precision: p,
        recall: r,
        f1: f1(p, r),
    };
    let per_type = per_type
        .into_iter()
        .map(|(ty, (m, p_count, g_count))| {
            let (p, r) = precision_recall(m, p_count, g_count);
            (
                ty,
                TypeScores {
                    precision: p,
                    recall: r,
                    f1: f1(p, r),
                    gold_count: g_count,
                    pred_count: p_count,
                },
            )
        })
        .collect();
    let token_accuracy = if token_total > 0 {
        token_matches as f64 / token_total as f64 * 100.0
    } else {
        100.0
    };
    Ok(EvalReport {
        micro,
        per_type,
        token_accuracy,
    })
}

fn extract(
    labels: &[crate::ontology::Label],
    repair: RepairPolicy,
    query_id: &str,
) -> Result<Vec<Mention>, EvalError> {
    extract_mentions(labels, repair).map_err(|source| EvalError::InvalidSequence {
        query_id: query_id.to_owned(),
        source,
    })
}

/// Mean and population standard deviation of one metric over several runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub metric: String,
    #[serde(serialize_with = "round2")]
    pub mean: f64,
    #[serde(serialize_with = "round2")]
    pub stddev: f64,
    pub n_runs: usize,
}

fn run_stats(metric: &str, values: &[f64]) -> RunStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    RunStats {
        metric: metric.to_owned(),
        mean,
        stddev: variance.sqrt(),
        n_runs: values.len(),
    }
}

/// Aggregates the micro metrics of several runs (e.g. different random
/// seeds) into mean ± population standard deviation.
pub fn aggregate_runs(reports: &[EvalReport]) -> Result<Vec<RunStats>, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let collect = |f: fn(&EvalReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    Ok(vec![
        run_stats("precision", &collect(|r| r.micro.precision)),
        run_stats("recall", &collect(|r| r.micro.recall)),
        run_stats("f1", &collect(|r| r.micro.f1)),
        run_stats("token_accuracy", &collect(|r| r.token_accuracy)),
    ])
}
