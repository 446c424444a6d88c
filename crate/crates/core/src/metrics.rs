//! Per-packet detection metrics.
//!
//! The positive class is an attack packet and a Drop verdict is a positive
//! prediction. Ratios with a zero denominator are `None`: rendered as `—` in
//! tables, empty in CSV and `null` in JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::binding::BindingRecord;
use crate::packet::Truth;
use crate::pipeline::{Reason, Verdict};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, truth: Truth, verdict: &Verdict) {
        match (truth.is_attack(), verdict.is_drop()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }
}

/// Counts outcomes over `(truth, verdict)` pairs.
pub fn evaluate<'a, I>(pairs: I) -> ConfusionMatrix
where
    I: IntoIterator<Item = (Truth, &'a Verdict)>,
{
    let mut cm = ConfusionMatrix::default();
    for (truth, verdict) in pairs {
        cm.record(truth, verdict);
    }
    cm
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den != 0).then(|| num as f64 / den as f64)
}

pub fn scores(cm: &ConfusionMatrix) -> Scores {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Scores { accuracy: ratio(cm.tp + cm.tn, cm.total()), precision, recall, f1 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: u8,
    pub name: String,
    pub confusion: ConfusionMatrix,
    pub scores: Scores,
    /// Drop counts keyed by stage, then reason.
    pub stages: BTreeMap<String, BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bindings: Vec<BindingRecord>,
}

/// Drop histogram keyed by stage and reason.
pub fn stage_histogram<'a, I>(verdicts: I) -> BTreeMap<String, BTreeMap<String, u64>>
where
    I: IntoIterator<Item = &'a Verdict>,
{
    let mut out: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for v in verdicts {
        if v.reason == Reason::Accepted {
            continue;
        }
        *out.entry(v.stage.as_str().to_owned()).or_default().entry(v.reason.as_str().to_owned()).or_default() += 1;
    }
    out
}

impl ScenarioReport {
    pub fn new(scenario: u8, name: impl Into<String>, labeled: &[(Truth, Verdict)]) -> Self {
        let confusion = evaluate(labeled.iter().map(|(t, v)| (*t, v)));
        ScenarioReport {
            scenario,
            name: name.into(),
            confusion,
            scores: scores(&confusion),
            stages: stage_histogram(labeled.iter().map(|(_, v)| v)),
            bindings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown report format {0:?} (expected json, csv or table)")]
pub struct UnknownFormat(pub String);

impl std::str::FromStr for Format {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

fn pct(v: Option<f64>) -> Option<String> {
    v.map(|x| format!("{:.2}", x * 100.0))
}

/// Renders reports in scenario order.
pub fn render(reports: &[ScenarioReport], format: Format) -> String {
    let mut sorted: Vec<&ScenarioReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.scenario);
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&sorted).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("scenario,accuracy,precision,recall,f1\n");
            for r in sorted {
                let cells = [r.scores.accuracy, r.scores.precision, r.scores.recall, r.scores.f1].map(|v| pct(v).unwrap_or_default());
                let _ = writeln!(s, "{},{}", r.scenario, cells.join(","));
            }
            s
        }
        Format::Table => {
            let width = sorted.iter().map(|r| r.name.len() + 4).max().unwrap_or(0).max("Attack Scenario".len());
            let mut s = format!(
                "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
                "Attack Scenario", "Accuracy", "Precision", "Recall", "F1"
            );
            for r in sorted {
                let label = format!("{}. {}", r.scenario, r.name);
                let cells = [r.scores.accuracy, r.scores.precision, r.scores.recall, r.scores.f1].map(|v| pct(v).unwrap_or_else(|| "—".into()));
                let _ = writeln!(s, "{label:<width$}  {:>9}  {:>9}  {:>9}  {:>9}", cells[0], cells[1], cells[2], cells[3]);
            }
            s
        }
    }
}
