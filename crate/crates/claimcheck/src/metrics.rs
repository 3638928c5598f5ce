//! Confusion counting and the five evaluation metrics, with OOC as the
//! positive class.
//!
//! Degenerate denominators follow the common scorer convention and collapse
//! to 0 (precision when tp+fp=0, recall when tp+fn=0, F1 when p+r=0, MCC when
//! any factor of its denominator is 0). The formulas are undefined there, and
//! 0 vs undefined changes reports, so this is worth knowing when comparing
//! against other scorers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Label;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction and gold lists differ in length: {preds} vs {golds}")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("cannot score an empty list")]
    Empty,
    #[error("all confusion counts are zero")]
    ZeroCounts,
}

/// Confusion cells under the OOC-positive convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// The five derived metrics plus the counts they came from. Values are kept
/// at full f64 precision in memory; output files round to 4 decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub counts: ConfusionCounts,
    pub n: u64,
}

/// Count confusion cells: OOC is the positive class, so tp counts pairs
/// predicted OOC with gold OOC, and fn counts gold-OOC pairs missed as NOOC.
pub fn confusion(preds: &[Label], golds: &[Label]) -> Result<ConfusionCounts, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut counts = ConfusionCounts::default();
    for (pred, gold) in preds.iter().zip(golds) {
        match (pred, gold) {
            (Label::OOC, Label::OOC) => counts.tp += 1,
            (Label::NOOC, Label::NOOC) => counts.tn += 1,
            (Label::OOC, Label::NOOC) => counts.fp += 1,
            (Label::NOOC, Label::OOC) => counts.fn_ += 1,
        }
    }
    Ok(counts)
}

/// Derive accuracy, precision, recall, F1 and MCC from confusion counts.
pub fn compute_metrics(counts: ConfusionCounts) -> Result<MetricsReport, MetricsError> {
    let total = counts.total();
    if total == 0 {
        return Err(MetricsError::ZeroCounts);
    }
    let tp = counts.tp as f64;
    let tn = counts.tn as f64;
    let fp = counts.fp as f64;
    let fn_ = counts.fn_ as f64;

    let accuracy = (tp + tn) / total as f64;
    let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
    let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    let mcc = if denom == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / denom.sqrt()
    };

    Ok(MetricsReport {
        accuracy,
        precision,
        recall,
        f1,
        mcc,
        counts,
        n: total,
    })
}

/// File form of a report: same fields, rounded to 4 decimals. This is the
/// exact schema of metrics.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub n: u64,
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
}

impl MetricsReport {
    pub fn to_file(&self) -> MetricsFile {
        MetricsFile {
            n: self.n,
            counts: self.counts,
            accuracy: round4(self.accuracy),
            precision: round4(self.precision),
            recall: round4(self.recall),
            f1: round4(self.f1),
            mcc: round4(self.mcc),
        }
    }
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-9;

    #[test]
    fn single_true_positive() {
        let c = confusion(&[Label::OOC], &[Label::OOC]).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 0, 0, 0));
    }

    #[test]
    fn four_cells_enumerated() {
        let preds = [Label::OOC, Label::NOOC, Label::OOC, Label::NOOC];
        let golds = [Label::OOC, Label::OOC, Label::NOOC, Label::NOOC];
        let c = confusion(&preds, &golds).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 1, 1, 1));
    }

    #[test]
    fn identical_lists_have_no_errors() {
        let labels = [Label::OOC, Label::OOC, Label::NOOC, Label::OOC, Label::NOOC];
        let c = confusion(&labels, &labels).unwrap();
        assert_eq!(c.fp, 0);
        assert_eq!(c.fn_, 0);
        assert_eq!(c.total(), labels.len() as u64);
    }

    #[test]
    fn length_mismatch_and_empty_are_rejected() {
        assert!(matches!(
            confusion(&[Label::OOC], &[]),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert!(matches!(confusion(&[], &[]), Err(MetricsError::Empty)));
        assert!(matches!(
            compute_metrics(ConfusionCounts::default()),
            Err(MetricsError::ZeroCounts)
        ));
    }

    #[test]
    fn balanced_ninety_percent_case() {
        let m = compute_metrics(ConfusionCounts::new(45, 45, 5, 5)).unwrap();
        assert!((m.accuracy - 0.90).abs() < EPS);
        assert!((m.precision - 0.90).abs() < EPS);
        assert!((m.recall - 0.90).abs() < EPS);
        assert!((m.f1 - 0.90).abs() < EPS);
        assert!((m.mcc - 0.80).abs() < EPS);
    }

    #[test]
    fn small_hand_computed_case() {
        let m = compute_metrics(ConfusionCounts::new(3, 4, 2, 1)).unwrap();
        assert!((m.accuracy - 0.7).abs() < EPS);
        assert!((m.precision - 0.6).abs() < EPS);
        assert!((m.recall - 0.75).abs() < EPS);
        assert!((m.f1 - 2.0 / 3.0).abs() < EPS);
        assert!((m.mcc - 10.0 / 600f64.sqrt()).abs() < EPS);
    }

    #[test]
    fn degenerate_counts_follow_the_zero_convention() {
        let m = compute_metrics(ConfusionCounts::new(0, 10, 0, 0)).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.mcc, 0.0);
    }

    #[test]
    fn perfect_classifier_scores_ones() {
        for n in [1, 7, 500] {
            let m = compute_metrics(ConfusionCounts::new(n, n, 0, 0)).unwrap();
            assert_eq!(m.accuracy, 1.0);
            assert_eq!(m.precision, 1.0);
            assert_eq!(m.recall, 1.0);
            assert_eq!(m.f1, 1.0);
            assert!((m.mcc - 1.0).abs() < EPS);
        }
    }

    #[test]
    fn file_form_rounds_to_four_decimals() {
        let m = compute_metrics(ConfusionCounts::new(3, 4, 2, 1)).unwrap();
        let f = m.to_file();
        assert_eq!(f.f1, 0.6667);
        assert_eq!(f.mcc, 0.4082);
        assert_eq!(f.n, 10);
    }

    fn label_strategy() -> impl Strategy<Value = Label> {
        prop_oneof![Just(Label::OOC), Just(Label::NOOC)]
    }

    proptest! {
        #[test]
        fn class_swap_transposes_counts_and_preserves_accuracy(
            pairs in proptest::collection::vec((label_strategy(), label_strategy()), 1..120)
        ) {
            let (preds, golds): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let swap = |l: &Label| match l { Label::OOC => Label::NOOC, Label::NOOC => Label::OOC };
            let spreds: Vec<_> = preds.iter().map(swap).collect();
            let sgolds: Vec<_> = golds.iter().map(swap).collect();

            let c = confusion(&preds, &golds).unwrap();
            let s = confusion(&spreds, &sgolds).unwrap();
            prop_assert_eq!(s, ConfusionCounts::new(c.tn, c.tp, c.fn_, c.fp));

            let m = compute_metrics(c).unwrap();
            let ms = compute_metrics(s).unwrap();
            prop_assert!((m.accuracy - ms.accuracy).abs() < EPS);
            prop_assert!((m.mcc.abs() - ms.mcc.abs()).abs() < EPS);
            prop_assert!((m.mcc - ms.mcc).abs() < EPS, "mcc sign must survive a simultaneous swap");
        }

        #[test]
        fn f1_matches_the_harmonic_identity(
            tp in 0u64..200, tn in 0u64..200, fp in 0u64..200, fn_ in 0u64..200
        ) {
            prop_assume!(tp + tn + fp + fn_ > 0);
            let m = compute_metrics(ConfusionCounts::new(tp, tn, fp, fn_)).unwrap();
            if 2 * tp + fp + fn_ > 0 {
                let identity = 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64;
                prop_assert!((m.f1 - identity).abs() < EPS);
            }
        }
    }
}
