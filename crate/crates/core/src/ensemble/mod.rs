//! Accuracy-weighted fusion of the four family classifiers.
//!
//! Classifier `k` (in [`Family::ALL`](crate::features::Family::ALL) order)
//! contributes `ω_k · O_ik` to class `i`, with `ω_k = d_k / Σ d` for validation
//! accuracies `d_k`. In [`FusionMode::Vote`] `O_ik` is 1 for the classifier's
//! top class and 0 elsewhere; in [`FusionMode::ConfidenceSum`] it is the
//! classifier's output for class `i` divided by the sum of its outputs.

mod model;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use model::{
    EnsembleManifest, EnsembleModel, ManifestEntry, ENSEMBLE_FORMAT, MANIFEST_FILE, NORMALIZER_FILE,
};

use crate::classifier::argmax;
use crate::error::{Error, Result};
use crate::exact_float;

pub const CLASSIFIERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum FusionMode {
    /// Each classifier votes for its own argmax.
    #[default]
    #[serde(rename = "vote")]
    Vote,
    /// Each classifier spreads its weight over its normalized outputs.
    #[serde(rename = "confsum")]
    ConfidenceSum,
}

impl FusionMode {
    pub fn name(self) -> &'static str {
        match self {
            FusionMode::Vote => "vote",
            FusionMode::ConfidenceSum => "confsum",
        }
    }
}

impl fmt::Display for FusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vote" => Ok(FusionMode::Vote),
            "confsum" => Ok(FusionMode::ConfidenceSum),
            other => Err(Error::InvalidConfig(format!(
                "unknown fusion mode {other:?} (expected vote or confsum)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    #[serde(with = "exact_float::array")]
    pub omega: [f64; CLASSIFIERS],
    /// The `d_k` the weights were derived from, in percent.
    #[serde(with = "exact_float::array")]
    pub source_accuracies: [f64; CLASSIFIERS],
}

/// `ω_k = d_k / Σ d`.
pub fn compute_weights(accuracies: [f64; CLASSIFIERS]) -> Result<FusionWeights> {
    for (index, &value) in accuracies.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveAccuracy { index, value });
        }
    }
    let total: f64 = accuracies.iter().sum();
    Ok(FusionWeights {
        omega: accuracies.map(|d| d / total),
        source_accuracies: accuracies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedDecision {
    /// Combined support per class.
    pub scores: Vec<f64>,
    /// Class indices, best first.
    pub ranked: Vec<usize>,
    pub winner: usize,
}

/// Normalized outputs; an all-zero (or otherwise unnormalizable) row becomes uniform.
fn normalized(row: &[f64]) -> Vec<f64> {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        row.iter().map(|v| v / sum).collect()
    } else {
        vec![1.0 / row.len() as f64; row.len()]
    }
}

fn weighted_sum(rows: &[Vec<f64>; CLASSIFIERS], w: &FusionWeights, m: usize) -> Vec<f64> {
    let mut scores = vec![0.0; m];
    for (row, &omega) in rows.iter().zip(&w.omega) {
        for (s, &o) in scores.iter_mut().zip(row) {
            *s += omega * o;
        }
    }
    scores
}

/// Fuses four confidence vectors of equal length `m`.
///
/// Classes are ranked by descending score; equal scores fall back to the
/// confidence-sum score, then to the lower class index.
pub fn combine_decisions(
    per_classifier: [&[f64]; CLASSIFIERS],
    weights: &FusionWeights,
    mode: FusionMode,
) -> Result<CombinedDecision> {
    let m = per_classifier[0].len();
    if m == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: 0,
        });
    }
    if let Some(bad) = per_classifier.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: bad.len(),
        });
    }

    let shares = per_classifier.map(normalized);
    let confidence = weighted_sum(&shares, weights, m);
    let scores = match mode {
        FusionMode::ConfidenceSum => confidence.clone(),
        FusionMode::Vote => {
            let votes = per_classifier.map(|row| {
                let mut v = vec![0.0; m];
                v[argmax(row)] = 1.0;
                v
            });
            weighted_sum(&votes, weights, m)
        }
    };

    let mut ranked: Vec<usize> = (0..m).collect();
    ranked.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| confidence[b].total_cmp(&confidence[a]))
            .then_with(|| a.cmp(&b))
    });
    Ok(CombinedDecision {
        winner: ranked[0],
        scores,
        ranked,
    })
}

/// The `k` best classes.
pub fn rank_top_k(decision: &CombinedDecision, k: usize) -> Result<Vec<usize>> {
    let m = decision.ranked.len();
    if k == 0 || k > m {
        return Err(Error::BadK { k, m });
    }
    Ok(decision.ranked[..k].to_vec())
}
