use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::classifier::argmax;
use crate::ensemble::{EnsembleModel, FusionMode, CLASSIFIERS};
use crate::error::{Error, Result};
use crate::features::{Family, FeatureBundle};

/// Deepest ranking reported.
pub const MAX_TOP_K: usize = 5;

/// Raw correct-prediction counts; merged across folds before percentages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub samples: usize,
    pub individual_correct: [usize; CLASSIFIERS],
    /// `top_k_correct[j]`: truth within the first `j + 1` ranked classes.
    pub top_k_correct: Vec<usize>,
    pub union_correct: usize,
    /// `confusion[truth][ensemble top-1]`.
    pub confusion: Vec<Vec<usize>>,
}

impl Tally {
    pub fn new(classes: usize) -> Self {
        Tally {
            samples: 0,
            individual_correct: [0; CLASSIFIERS],
            top_k_correct: vec![0; MAX_TOP_K.min(classes)],
            union_correct: 0,
            confusion: vec![vec![0; classes]; classes],
        }
    }

    /// Scores one sample. `outputs` are the raw classifier outputs and
    /// `ranked` the fused ranking.
    pub fn record(&mut self, truth: usize, outputs: &[Vec<f64>; CLASSIFIERS], ranked: &[usize]) {
        self.samples += 1;
        let mut any = false;
        for (count, out) in self.individual_correct.iter_mut().zip(outputs) {
            if argmax(out) == truth {
                *count += 1;
                any = true;
            }
        }
        if any {
            self.union_correct += 1;
        }
        if let Some(pos) = ranked.iter().position(|&c| c == truth) {
            for hit in self.top_k_correct.iter_mut().skip(pos) {
                *hit += 1;
            }
        }
        self.confusion[truth][ranked[0]] += 1;
    }

    pub fn merge(&mut self, other: &Tally) {
        self.samples += other.samples;
        for (a, b) in self
            .individual_correct
            .iter_mut()
            .zip(other.individual_correct)
        {
            *a += b;
        }
        for (a, b) in self.top_k_correct.iter_mut().zip(&other.top_k_correct) {
            *a += b;
        }
        self.union_correct += other.union_correct;
        for (row, other_row) in self.confusion.iter_mut().zip(&other.confusion) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }

    fn pct(&self, correct: usize) -> f64 {
        percent(correct, self.samples)
    }
}

/// Percentage rounded to two decimals.
pub(crate) fn percent(correct: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    (correct as f64 * 10_000.0 / total as f64).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub validation_size: usize,
    pub test_size: usize,
    /// The `d_k` used for this fold's weights, in percent.
    pub validation_accuracy: [f64; CLASSIFIERS],
    pub weights: [f64; CLASSIFIERS],
    pub individual_top1: [f64; CLASSIFIERS],
    pub ensemble_top_k: Vec<f64>,
    pub union: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: FusionMode,
    pub labels: Vec<String>,
    pub samples: usize,
    /// Per classifier, in chain-code, intersection, shadow, line-fit order.
    pub individual_top1: [f64; CLASSIFIERS],
    /// Ensemble top-1 through top-`MAX_TOP_K`.
    pub ensemble_top_k: Vec<f64>,
    /// A sample counts if any classifier's own top-1 is right.
    pub union: f64,
    pub confusion: Vec<Vec<usize>>,
    pub folds: Vec<FoldReport>,
}

impl EvalReport {
    pub fn from_tally(
        tally: &Tally,
        labels: Vec<String>,
        mode: FusionMode,
        folds: Vec<FoldReport>,
    ) -> Self {
        EvalReport {
            mode,
            labels,
            samples: tally.samples,
            individual_top1: tally.individual_correct.map(|c| tally.pct(c)),
            ensemble_top_k: tally.top_k_correct.iter().map(|&c| tally.pct(c)).collect(),
            union: tally.pct(tally.union_correct),
            confusion: tally.confusion.clone(),
            folds,
        }
    }

    pub fn best_individual(&self) -> f64 {
        self.individual_top1.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Fixed-layout text tables: individual accuracies, ensemble top-k, union,
    /// then the per-fold breakdown.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "fusion mode: {}", self.mode);
        let _ = writeln!(s, "test samples: {}", self.samples);
        let _ = writeln!(s, "classes: {}", self.labels.len());
        let _ = writeln!(s);
        let _ = writeln!(s, "individual classifiers (top-1 %)");
        for (f, acc) in Family::ALL.iter().zip(self.individual_top1) {
            let _ = writeln!(s, "  {:<14}{acc:>7.2}", f.name());
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "ensemble (%)");
        for (k, acc) in self.ensemble_top_k.iter().enumerate() {
            let _ = writeln!(s, "  {:<14}{acc:>7.2}", format!("top-{}", k + 1));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "any classifier (%)");
        let _ = writeln!(s, "  {:<14}{:>7.2}", "union", self.union);
        if !self.folds.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "folds");
            let _ = write!(
                s,
                "  {:>4} {:>6} {:>5} {:>6}",
                "fold", "train", "val", "test"
            );
            for f in Family::ALL {
                let _ = write!(s, " {:>12}", f.name());
            }
            let _ = writeln!(s, " {:>7} {:>7}", "top-1", "union");
            for fold in &self.folds {
                let _ = write!(
                    s,
                    "  {:>4} {:>6} {:>5} {:>6}",
                    fold.fold, fold.train_size, fold.validation_size, fold.test_size
                );
                for acc in fold.individual_top1 {
                    let _ = write!(s, " {acc:>12.2}");
                }
                let top1 = fold.ensemble_top_k.first().copied().unwrap_or(0.0);
                let _ = writeln!(s, " {top1:>7.2} {:>7.2}", fold.union);
            }
            let _ = writeln!(s);
            let _ = writeln!(s, "fusion weights");
            for fold in &self.folds {
                let w: Vec<String> = fold.weights.iter().map(|w| format!("{w:.4}")).collect();
                let _ = writeln!(s, "  fold {}: {}", fold.fold, w.join(" "));
            }
        }
        s
    }
}

/// Counts predictions of `ensemble` over labeled feature bundles.
pub fn tally<'a>(
    ensemble: &EnsembleModel,
    samples: impl IntoIterator<Item = (usize, &'a FeatureBundle)>,
    mode: FusionMode,
) -> Result<Tally> {
    let mut t = Tally::new(ensemble.class_count());
    for (truth, bundle) in samples {
        let outputs = ensemble.confidences(bundle)?;
        let decision = ensemble.combine(&outputs, mode)?;
        t.record(truth, &outputs, &decision.ranked);
    }
    Ok(t)
}

/// Single-split evaluation; the report has no fold breakdown.
pub fn evaluate<'a>(
    ensemble: &EnsembleModel,
    samples: impl IntoIterator<Item = (usize, &'a FeatureBundle)>,
    mode: FusionMode,
) -> Result<EvalReport> {
    let t = tally(ensemble, samples, mode)?;
    Ok(EvalReport::from_tally(
        &t,
        ensemble.labels.clone(),
        mode,
        Vec::new(),
    ))
}

/// Evaluates on every sample of a featurized dataset. Class names are matched
/// to the ensemble's labels, so directory sets may differ in order.
pub fn evaluate_dataset(
    ensemble: &EnsembleModel,
    ds: &Dataset,
    mode: FusionMode,
) -> Result<EvalReport> {
    let to_model: Vec<usize> = ds
        .labels
        .iter()
        .map(|name| {
            ensemble
                .labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::Format(format!("class {name:?} is unknown to the ensemble")))
        })
        .collect::<Result<_>>()?;
    let samples = (0..ds.len())
        .map(|i| Ok((to_model[ds.samples[i].label], ds.features(i)?)))
        .collect::<Result<Vec<_>>>()?;
    evaluate(ensemble, samples, mode)
}
