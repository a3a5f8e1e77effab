//! Accuracy and timing metrics over `K` runs against ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::claims::TruthAssignment;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no prediction runs to evaluate")]
    NoRuns,
    #[error("objects missing from ground truth: {}", .0.join(", "))]
    MissingGold(Vec<String>),
    #[error("objects missing a popularity weight: {}", .0.join(", "))]
    MissingWeight(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    /// Mean wall time per run in seconds, when runs were timed.
    pub mean_execution_time: Option<f64>,
    pub runs: usize,
}

/// Objects covered by any run, checked against the ground truth.
fn evaluated_objects<'a>(preds: &'a [TruthAssignment], gold: &TruthAssignment) -> Result<BTreeSet<&'a str>, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let objects: BTreeSet<&str> = preds.iter().flat_map(|p| p.objects()).collect();
    let missing: Vec<String> = objects
        .iter()
        .filter(|o| gold.get(o).is_none())
        .map(|o| o.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingGold(missing));
    }
    Ok(objects)
}

/// Per-object `(precision term, recall term)`. An empty prediction scores 0
/// precision, as does recall against an empty gold set.
fn object_ratios(pred: Option<&BTreeSet<String>>, gold: &BTreeSet<String>) -> (f64, f64) {
    let empty = BTreeSet::new();
    let pred = pred.unwrap_or(&empty);
    let hits = pred.intersection(gold).count() as f64;
    let ratio = |d: usize| if d == 0 { 0.0 } else { hits / d as f64 };
    (ratio(pred.len()), ratio(gold.len()))
}

fn accumulate(
    preds: &[TruthAssignment],
    gold: &TruthAssignment,
    weight: impl Fn(&str) -> f64,
    objects: &BTreeSet<&str>,
) -> (f64, f64) {
    let (mut p, mut r) = (0.0, 0.0);
    for run in preds {
        for o in objects {
            let (po, ro) = object_ratios(run.get(o), gold.get(o).expect("checked"));
            let w = weight(o);
            p += po * w;
            r += ro * w;
        }
    }
    let k = preds.len() as f64;
    (p / k, r / k)
}

/// Per-object precision and recall averaged over objects and runs.
pub fn precision_recall(preds: &[TruthAssignment], gold: &TruthAssignment) -> Result<(f64, f64), EvalError> {
    let objects = evaluated_objects(preds, gold)?;
    let n = objects.len() as f64;
    Ok(accumulate(preds, gold, |_| 1.0 / n, &objects))
}

/// Per-object ratios weighted by object popularity, summed over objects and
/// averaged over runs.
pub fn weighted_precision_recall(
    preds: &[TruthAssignment],
    gold: &TruthAssignment,
    weights: &BTreeMap<String, f64>,
) -> Result<(f64, f64), EvalError> {
    let objects = evaluated_objects(preds, gold)?;
    let missing: Vec<String> = objects
        .iter()
        .filter(|o| !weights.contains_key(**o))
        .map(|o| o.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingWeight(missing));
    }
    Ok(accumulate(preds, gold, |o| weights[o], &objects))
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Mean of the run durations; `None` for no runs.
pub fn timing(durations: &[f64]) -> Option<f64> {
    if durations.is_empty() {
        None
    } else {
        Some(durations.iter().sum::<f64>() / durations.len() as f64)
    }
}

/// All six accuracy metrics plus mean execution time.
pub fn evaluate(
    preds: &[TruthAssignment],
    gold: &TruthAssignment,
    weights: &BTreeMap<String, f64>,
    durations: &[f64],
) -> Result<MetricsReport, EvalError> {
    let (precision, recall) = precision_recall(preds, gold)?;
    let (weighted_precision, weighted_recall) = weighted_precision_recall(preds, gold, weights)?;
    Ok(MetricsReport {
        precision,
        recall,
        f1: f1(precision, recall),
        weighted_precision,
        weighted_recall,
        weighted_f1: f1(weighted_precision, weighted_recall),
        mean_execution_time: timing(durations),
        runs: preds.len(),
    })
}

impl MetricsReport {
    fn rows(&self) -> [(&'static str, f64); 6] {
        [
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("weighted_precision", self.weighted_precision),
            ("weighted_recall", self.weighted_recall),
            ("weighted_f1", self.weighted_f1),
        ]
    }

    /// `key=value` lines for scripts.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.rows() {
            let _ = writeln!(out, "{k}={v}");
        }
        if let Some(t) = self.mean_execution_time {
            let _ = writeln!(out, "mean_execution_time={t}");
        }
        let _ = writeln!(out, "runs={}", self.runs);
        out
    }

    /// Aligned two-column table for humans.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<20} {:>10}", "metric", "value");
        let _ = writeln!(out, "{:-<31}", "");
        for (k, v) in self.rows() {
            let _ = writeln!(out, "{k:<20} {v:>10.4}");
        }
        if let Some(t) = self.mean_execution_time {
            let _ = writeln!(out, "{:<20} {:>9.4}s", "execution_time", t);
        }
        let _ = writeln!(out, "{:<20} {:>10}", "runs", self.runs);
        out
    }
}
