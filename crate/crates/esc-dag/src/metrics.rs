//! Model-selection metrics: error counts, FDR, TPR, and mean inclusion
//! probabilities over true-zero and true-nonzero positions.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    /// False positives plus false negatives.
    pub errors: usize,
    /// FP/(FP+TP), with the 0/0 → 0 convention.
    pub fdr: f64,
    /// TP/(TP+FN); reported as 1 and flagged when the truth has no
    /// nonzeros.
    pub tpr: f64,
    /// Mean inclusion probability over true-zero positions.
    pub p_bar_0: f64,
    /// Mean inclusion probability over true-nonzero positions.
    pub p_bar_1: f64,
    /// True when the truth has no nonzero entries, making TPR undefined.
    pub degenerate_truth: bool,
}

/// Computes the confusion metrics for a strictly lower-triangular inclusion
/// matrix (`inclusion[j-2][l-1]` holds the probability for entry (j, l))
/// against the true support given as 1-based (j, l) pairs.
pub fn selection_metrics(
    true_support: &BTreeSet<(usize, usize)>,
    inclusion: &[Vec<f64>],
    threshold: f64,
) -> SelectionMetrics {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut sum_zero = 0.0;
    let mut n_zero = 0usize;
    let mut sum_nonzero = 0.0;
    let mut n_nonzero = 0usize;
    for (ji, row) in inclusion.iter().enumerate() {
        let j = ji + 2;
        debug_assert_eq!(row.len(), j - 1, "inclusion row {j} has wrong length");
        for (li, &pr) in row.iter().enumerate() {
            debug_assert!((0.0..=1.0).contains(&pr));
            let l = li + 1;
            let is_true = true_support.contains(&(j, l));
            let selected = pr >= threshold;
            match (is_true, selected) {
                (true, true) => tp += 1,
                (true, false) => fn_ += 1,
                (false, true) => fp += 1,
                (false, false) => {}
            }
            if is_true {
                sum_nonzero += pr;
                n_nonzero += 1;
            } else {
                sum_zero += pr;
                n_zero += 1;
            }
        }
    }
    let degenerate_truth = n_nonzero == 0;
    SelectionMetrics {
        errors: fp + fn_,
        fdr: if fp + tp == 0 { 0.0 } else { fp as f64 / (fp + tp) as f64 },
        tpr: if degenerate_truth { 1.0 } else { tp as f64 / (tp + fn_) as f64 },
        p_bar_0: if n_zero == 0 { 0.0 } else { sum_zero / n_zero as f64 },
        p_bar_1: if degenerate_truth { 0.0 } else { sum_nonzero / n_nonzero as f64 },
        degenerate_truth,
    }
}
