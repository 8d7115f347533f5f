//! Macro-averaged precision/recall/F1 and the confusion matrix.

use std::fmt;

use crate::error::{Error, Result};

/// Per-class counts and scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of gold examples of this class.
    pub support: usize,
}

/// Confusion matrix plus per-class and macro scores.
///
/// Macro scores average over all `K` declared classes, including classes
/// with zero gold support; 0/0 ratios score 0 by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassScores>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

/// Scores `predicted` against `gold` over a fixed `class_count`-class space.
pub fn evaluate(gold: &[usize], predicted: &[usize], class_count: usize) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    }
    let mut confusion = vec![vec![0usize; class_count]; class_count];
    for (&g, &p) in gold.iter().zip(predicted) {
        if g >= class_count || p >= class_count {
            return Err(Error::Range(format!(
                "label pair ({g}, {p}) outside [0, {class_count})"
            )));
        }
        confusion[g][p] += 1;
    }

    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mut per_class = Vec::with_capacity(class_count);
    for k in 0..class_count {
        let tp = confusion[k][k];
        let gold_total: usize = confusion[k].iter().sum();
        let pred_total: usize = confusion.iter().map(|row| row[k]).sum();
        let precision = ratio(tp, pred_total);
        let recall = ratio(tp, gold_total);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassScores {
            precision,
            recall,
            f1,
            support: gold_total,
        });
    }

    let k = class_count as f64;
    Ok(EvalReport {
        macro_precision: per_class.iter().map(|c| c.precision).sum::<f64>() / k,
        macro_recall: per_class.iter().map(|c| c.recall).sum::<f64>() / k,
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / k,
        confusion,
        per_class,
    })
}

impl EvalReport {
    /// Recall of one class; the share of its gold examples predicted
    /// correctly. 0 when the class never occurs in gold.
    pub fn per_class_accuracy(&self, class_id: usize) -> Result<f64> {
        self.per_class
            .get(class_id)
            .map(|c| c.recall)
            .ok_or_else(|| {
                Error::Range(format!(
                    "class {class_id} out of range for {} classes",
                    self.per_class.len()
                ))
            })
    }

    pub fn class_count(&self) -> usize {
        self.per_class.len()
    }

    /// The single machine-parseable summary line.
    pub fn macro_line(&self) -> String {
        format!(
            "macro_f1={:.4} macro_p={:.4} macro_r={:.4}",
            self.macro_f1, self.macro_precision, self.macro_recall
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class  support  precision  recall  f1")?;
        for (k, c) in self.per_class.iter().enumerate() {
            writeln!(
                f,
                "{k:<5}  {:<7}  {:<9.4}  {:<6.4}  {:.4}",
                c.support, c.precision, c.recall, c.f1
            )?;
        }
        write!(f, "{}", self.macro_line())
    }
}
