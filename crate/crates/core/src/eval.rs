//! Classification evaluation: confusion matrices, scalar metrics, ROC
//! curves, and AUC.
//!
//! Positive means fraud (label 1) throughout. Thresholded prediction is
//! closed on the positive side: predict 1 iff score >= threshold.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Binary confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Scalar metrics derived from a confusion matrix. Degenerate 0/0 cases
/// (no predicted positives, no actual positives, or an empty precision +
/// recall sum) evaluate to 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Count prediction outcomes against the truth.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.true_positives += 1,
            (0, 1) => cm.false_positives += 1,
            (0, 0) => cm.true_negatives += 1,
            (1, 0) => cm.false_negatives += 1,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "labels",
                    reason: format!("labels must be 0 or 1, found ({t}, {p})"),
                })
            }
        }
    }
    Ok(cm)
}

/// Accuracy, precision, recall, and F1 from exact counts.
pub fn summarize(cm: &ConfusionMatrix) -> Result<MetricsSummary> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("empty confusion matrix".into()));
    }
    let tp = cm.true_positives as f64;
    let accuracy = (tp + cm.true_negatives as f64) / total as f64;
    let precision = ratio_or_zero(tp, tp + cm.false_positives as f64);
    let recall = ratio_or_zero(tp, tp + cm.false_negatives as f64);
    let f1 = ratio_or_zero(2.0 * precision * recall, precision + recall);
    Ok(MetricsSummary {
        accuracy,
        precision,
        recall,
        f1,
    })
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// ROC curve from a descending threshold sweep over the distinct scores.
///
/// The first point is (0, 0) at an infinite sentinel threshold; tied scores
/// are grouped so the curve holds one point per distinct score; the last
/// point is always (1, 1) at the minimum score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// (false_positive_rate, true_positive_rate) pairs, in sweep order.
    pub points: Vec<(f64, f64)>,
    /// Score cutoff that produced each point.
    pub thresholds: Vec<f64>,
}

/// Sweep thresholds over the scores, counting exact prediction outcomes at
/// each distinct score level.
pub fn roc_curve(y_true: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if y_true.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput("roc_curve needs at least one score".into()));
    }
    if let Some(&bad) = y_true.iter().find(|&&t| t > 1) {
        return Err(Error::InvalidParameter {
            name: "y_true",
            reason: format!("labels must be 0 or 1, found {bad}"),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "scores",
            reason: "scores must be finite".into(),
        });
    }
    let positives = y_true.iter().filter(|&&t| t == 1).count();
    let negatives = y_true.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass {
            only_class: if positives == 0 { 0 } else { 1 },
        });
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        while i < order.len() && scores[order[i]] == score {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
        thresholds.push(score);
    }
    Ok(RocCurve { points, thresholds })
}

/// Area under the curve by the trapezoidal rule. Equals the probability
/// that a random positive outscores a random negative, counting ties as
/// one half.
pub fn auc(curve: &RocCurve) -> f64 {
    let mut area = 0.0;
    for pair in curve.points.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    area
}

impl RocCurve {
    /// Write as CSV (`threshold,fpr,tpr`). Values use shortest round-trip
    /// float formatting, so `read_csv` reconstructs the curve exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("threshold,fpr,tpr\n");
        for (t, (fpr, tpr)) in self.thresholds.iter().zip(&self.points) {
            out.push_str(&format!("{t},{fpr},{tpr}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reload a curve written by `write_csv`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = content.lines();
        match lines.next() {
            Some("threshold,fpr,tpr") => {}
            other => {
                return Err(Error::CsvFormat {
                    line: 1,
                    message: format!("expected roc header, found {other:?}"),
                })
            }
        }
        let mut points = Vec::new();
        let mut thresholds = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut cells = line.split(',');
            let mut next = |name| {
                cells
                    .next()
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| Error::CsvFormat {
                        line: (i + 2) as u64,
                        message: format!("bad {name} value in {line:?}"),
                    })
            };
            let t = next("threshold")?;
            let fpr = next("fpr")?;
            let tpr = next("tpr")?;
            thresholds.push(t);
            points.push((fpr, tpr));
        }
        Ok(Self { points, thresholds })
    }
}
