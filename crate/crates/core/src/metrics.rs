//! ROC-AUC (Mann-Whitney form), F1, confusion counts, and cross-fold
//! mean ± std aggregation.

use crate::classify::ProbVector;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Metric computation failures.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricsError {
    /// AUC needs at least one positive and one negative.
    SingleClass,
    LengthMismatch { scores: usize, labels: usize },
    NonFiniteScore(f64),
    /// Prediction ids with no ground-truth label.
    MissingTruth(Vec<String>),
}

impl core::fmt::Display for MetricsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::SingleClass => write!(f, "AUC requires both classes to be present"),
            Self::LengthMismatch { scores, labels } => {
                write!(f, "{scores} scores vs {labels} labels")
            }
            Self::NonFiniteScore(v) => write!(f, "non-finite score {v}"),
            Self::MissingTruth(ids) => {
                write!(f, "no ground truth for {} id(s):", ids.len())?;
                for id in ids.iter().take(8) {
                    write!(f, " {id}")?;
                }
                if ids.len() > 8 {
                    write!(f, " ...")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for MetricsError {}

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs the scores
/// order correctly, ties counting one half. Computed in O(n log n) from the
/// rank-sum of the positives, with tied scores sharing their average rank.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if let Some(&bad) = scores.iter().find(|v| !v.is_finite()) {
        return Err(MetricsError::NonFiniteScore(bad));
    }
    let n_pos = labels.iter().filter(|&&l| l != 0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0f64;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their average.
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| labels[i] != 0).count();
        rank_sum_pos += avg_rank * tied_pos as f64;
        start = end;
    }

    let n_pos = n_pos as f64;
    let n_neg = n_neg as f64;
    Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

/// Binary confusion counts at some decision threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl Confusion {
    pub fn from_decisions(preds: &[u8], labels: &[u8]) -> Self {
        assert_eq!(preds.len(), labels.len(), "prediction/label length mismatch");
        let mut c = Confusion::default();
        for (&p, &l) in preds.iter().zip(labels) {
            match (p != 0, l != 0) {
                (true, true) => c.true_pos += 1,
                (true, false) => c.false_pos += 1,
                (false, false) => c.true_neg += 1,
                (false, true) => c.false_neg += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    /// `2TP / (2TP + FP + FN)`; 0 when the denominator is 0.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.true_pos + self.false_pos + self.false_neg;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.true_pos as f64 / denom as f64
        }
    }
}

/// F1 of hard predictions against labels, positive class = 1.
pub fn f1(preds: &[u8], labels: &[u8]) -> f64 {
    Confusion::from_decisions(preds, labels).f1()
}

/// One fold's evaluation: threshold metrics plus ranking quality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub auc: f64,
    pub f1: f64,
    pub confusion: Confusion,
    pub threshold: f64,
}

/// Scores `predictions` against `truth`: AUC on the positive-class
/// probability, F1 and confusion from thresholding it at `threshold`.
/// Every prediction id must have a truth label; truth may cover more ids.
pub fn evaluate(
    predictions: &BTreeMap<String, ProbVector>,
    truth: &BTreeMap<String, u8>,
    threshold: f64,
) -> Result<EvalReport, MetricsError> {
    let missing: Vec<String> =
        predictions.keys().filter(|id| !truth.contains_key(*id)).cloned().collect();
    if !missing.is_empty() {
        return Err(MetricsError::MissingTruth(missing));
    }
    let mut scores = Vec::with_capacity(predictions.len());
    let mut labels = Vec::with_capacity(predictions.len());
    let mut decisions = Vec::with_capacity(predictions.len());
    for (id, p) in predictions {
        scores.push(p.p1());
        labels.push(truth[id]);
        decisions.push(u8::from(p.p1() >= threshold));
    }
    let auc = roc_auc(&scores, &labels)?;
    let confusion = Confusion::from_decisions(&decisions, &labels);
    Ok(EvalReport { auc, f1: confusion.f1(), confusion, threshold })
}

/// Mean and population standard deviation of one metric across folds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "cannot aggregate zero values");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: libm::sqrt(var) }
    }

    /// Two-decimal "mean ± std" rendering.
    pub fn render(&self) -> String {
        format!("{:.2} ± {:.2}", self.mean, self.std)
    }
}

/// Cross-fold aggregate of per-fold reports.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldAggregate {
    pub per_fold: Vec<EvalReport>,
    pub auc: MeanStd,
    pub f1: MeanStd,
}

/// Arithmetic mean and population std of AUC and F1 across folds.
pub fn aggregate_folds(reports: &[EvalReport]) -> FoldAggregate {
    assert!(!reports.is_empty(), "cannot aggregate zero folds");
    let aucs: Vec<f64> = reports.iter().map(|r| r.auc).collect();
    let f1s: Vec<f64> = reports.iter().map(|r| r.f1).collect();
    FoldAggregate {
        per_fold: reports.to_vec(),
        auc: MeanStd::of(&aucs),
        f1: MeanStd::of(&f1s),
    }
}
