use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledSample;
use crate::error::{Error, Result};

pub const FOLDS: usize = 3;

/// Three disjoint, class-stratified parts; fold `i` tests on part `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub parts: [Vec<String>; FOLDS],
}

/// A single stratified train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutPlan {
    pub seed: u64,
    pub train_fraction: f64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Sample indices grouped by class, each group shuffled. One RNG stream runs
/// through the classes in label order.
fn shuffled_by_class(
    samples: &[LabeledSample],
    seed: u64,
    needed: usize,
) -> Result<Vec<Vec<usize>>> {
    let classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
    let mut groups = vec![Vec::new(); classes];
    for (i, s) in samples.iter().enumerate() {
        groups[s.label].push(i);
    }
    for g in &groups {
        if !g.is_empty() && g.len() < needed {
            let id = &samples[g[0]].id;
            return Err(Error::TooFewSamples {
                label: id
                    .split_once('/')
                    .map_or(id.as_str(), |(class, _)| class)
                    .to_string(),
                count: g.len(),
                needed,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    Ok(groups)
}

pub fn three_fold_split(samples: &[LabeledSample], seed: u64) -> Result<FoldPlan> {
    let groups = shuffled_by_class(samples, seed, FOLDS)?;
    let mut parts: [Vec<String>; FOLDS] = Default::default();
    // The counter carries across classes so part sizes stay balanced overall.
    for (next, i) in groups.into_iter().flatten().enumerate() {
        parts[next % FOLDS].push(samples[i].id.clone());
    }
    Ok(FoldPlan { seed, parts })
}

/// Per class, the first `round(n · train_fraction)` shuffled samples train.
pub fn holdout_split(
    samples: &[LabeledSample],
    seed: u64,
    train_fraction: f64,
) -> Result<HoldoutPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "holdout fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let groups = shuffled_by_class(samples, seed, 2)?;
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for g in groups {
        let cut = ((g.len() as f64 * train_fraction).round() as usize)
            .clamp(1, g.len().saturating_sub(1));
        for (j, &i) in g.iter().enumerate() {
            let id = samples[i].id.clone();
            if j < cut {
                train.push(id)
            } else {
                test.push(id)
            }
        }
    }
    Ok(HoldoutPlan {
        seed,
        train_fraction,
        train,
        test,
    })
}

/// Maps ids back to positions in `samples`.
pub(crate) fn indices_of(samples: &[LabeledSample], ids: &[String]) -> Result<Vec<usize>> {
    let lookup: HashMap<&str, usize> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i))
        .collect();
    ids.iter()
        .map(|id| {
            lookup
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidConfig(format!("unknown sample id {id}")))
        })
        .collect()
}

impl FoldPlan {
    /// `(train, test)` ids of fold `i`.
    pub fn fold(&self, i: usize) -> (Vec<String>, Vec<String>) {
        let test = self.parts[i].clone();
        let train = (0..FOLDS)
            .filter(|&j| j != i)
            .flat_map(|j| self.parts[j].iter().cloned())
            .collect();
        (train, test)
    }
}
