use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::PipelineConfig;
use crate::corpus::Label;
use crate::lang::Language;

/// Importance groups in report column order: name and the feature indices
/// (0-based) they sum.
pub const IMPORTANCE_GROUPS: [(&str, &[usize]); 6] = [
    ("Difference between maximum and minimum distance to the chosen wordset", &[0]),
    ("Max closest distance to the chosen wordset", &[1]),
    ("Average length of a word in message", &[7]),
    ("Average distance of words in a message to the chosen wordset", &[2]),
    ("Average semantic distance between words in a message", &[4]),
    ("Other parameters", &[3, 5, 6, 8, 9, 10, 11]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// Sums feature importances into the report groups.
pub fn group_importances(raw: &[f64]) -> Vec<NamedValue> {
    IMPORTANCE_GROUPS
        .iter()
        .map(|(name, idx)| NamedValue {
            name: (*name).to_owned(),
            value: idx.iter().filter_map(|&i| raw.get(i)).sum(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub artifact_version: String,
    pub language: Language,
    pub board: Option<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// `confusion[true][predicted]`, classes in label order.
    pub confusion: [[u64; 2]; 2],
    pub per_class: Vec<ClassMetrics>,
    pub grouped_importances: Vec<NamedValue>,
    pub raw_importances: Vec<NamedValue>,
    /// True when the forest never split, so every importance is zero.
    pub importances_degenerate: bool,
    pub config: PipelineConfig,
}

impl EvalReport {
    /// Accuracy, confusion and per-class metrics from paired labels.
    pub fn metrics(truth: &[Label], predicted: &[Label]) -> (f64, [[u64; 2]; 2], Vec<ClassMetrics>) {
        let mut confusion = [[0u64; 2]; 2];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[t.index()][p.index()] += 1;
        }
        let n = truth.len() as f64;
        let accuracy = if n == 0.0 {
            0.0
        } else {
            (confusion[0][0] + confusion[1][1]) as f64 / n
        };
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let per_class = [Label::Neutral, Label::Aggressive]
            .into_iter()
            .map(|l| {
                let c = l.index();
                ClassMetrics {
                    label: l,
                    precision: ratio(confusion[c][c], confusion[0][c] + confusion[1][c]),
                    recall: ratio(confusion[c][c], confusion[c][0] + confusion[c][1]),
                }
            })
            .collect();
        (accuracy, confusion, per_class)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Plain-text table: accuracy and the six importance groups.
    pub fn to_table(&self) -> String {
        let row_name = match &self.board {
            Some(b) => format!("{} ({b})", self.language.display_name()),
            None => self.language.display_name().to_owned(),
        };
        let mut headers = vec!["Language (Imageboard)".to_owned(), "Percentage of correct classification (%)".to_owned()];
        headers.extend(self.grouped_importances.iter().map(|g| g.name.clone()));
        let mut cells = vec![row_name, format!("{:.2}", self.accuracy * 100.0)];
        cells.extend(self.grouped_importances.iter().map(|g| format!("{:.3}", g.value)));

        let mut out = String::new();
        out.push_str("Random forest feature importance\n");
        out.push_str("Weights of different parameters (Total - 1)\n\n");
        let width = headers.iter().map(|h| h.chars().count()).max().unwrap_or(0);
        for (h, c) in headers.iter().zip(&cells) {
            let _ = writeln!(out, "{h:<width$}  {c}");
        }
        out.push('\n');
        let _ = writeln!(out, "n_train={} n_test={}", self.n_train, self.n_test);
        let _ = writeln!(out, "confusion (rows true, columns predicted): neutral {:?} aggressive {:?}", self.confusion[0], self.confusion[1]);
        for m in &self.per_class {
            let _ = writeln!(out, "{}: precision {:.4} recall {:.4}", m.label.as_str(), m.precision, m.recall);
        }
        if self.importances_degenerate {
            out.push_str("warning: the forest made no splits; importances are all zero\n");
        }
        out
    }
}
