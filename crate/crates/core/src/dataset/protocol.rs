use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::eval::{percent, tally, EvalReport, FoldReport, Tally};
use super::folds::{holdout_split, indices_of, three_fold_split, FOLDS};
use super::{Dataset, Normalizer};
use crate::classifier::{init_mlp, MlpConfig, MlpModel};
use crate::ensemble::{compute_weights, EnsembleModel, FusionMode, CLASSIFIERS};
use crate::error::{Error, Result};
use crate::features::Family;

pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.68;
/// Share of each training fold held back to measure `d_k`.
pub const VALIDATION_FRACTION: f64 = 0.1;
/// Floor for a measured `d_k` (percent) so weights stay defined when a
/// classifier misses the whole validation slice.
pub const MIN_ACCURACY: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    ThreeFold,
    Holdout { train_fraction: f64 },
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::ThreeFold => f.write_str("3fold"),
            Protocol::Holdout { .. } => f.write_str("holdout"),
        }
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3fold" => Ok(Protocol::ThreeFold),
            "holdout" => Ok(Protocol::Holdout {
                train_fraction: DEFAULT_HOLDOUT_FRACTION,
            }),
            other => Err(Error::InvalidConfig(format!(
                "unknown protocol {other:?} (expected 3fold or holdout)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOptions {
    pub seed: u64,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub target_sse: f64,
    /// Hidden layer sizes in [`Family::ALL`] order.
    pub hidden_sizes: [usize; CLASSIFIERS],
}

impl Default for TrainingOptions {
    fn default() -> Self {
        let base = MlpConfig::new(1, 1, 1);
        TrainingOptions {
            seed: 0,
            max_epochs: base.max_epochs,
            learning_rate: base.learning_rate,
            momentum: base.momentum,
            target_sse: base.target_sse,
            hidden_sizes: Family::ALL.map(Family::default_hidden_size),
        }
    }
}

impl TrainingOptions {
    fn mlp_config(&self, family: Family, classes: usize, seed: u64) -> MlpConfig {
        let mut c = MlpConfig::new(family.len(), self.hidden_sizes[family.index()], classes)
            .with_seed(seed)
            .with_epochs(self.max_epochs)
            .with_target_sse(self.target_sse);
        c.learning_rate = self.learning_rate;
        c.momentum = self.momentum;
        c
    }
}

/// Deterministic child seed (splitmix64 finalizer over `base` and `stream`).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Shuffles `train` and splits off the last 10% (at least one sample) for validation.
pub fn validation_split(train: &[usize], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if train.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 training samples, got {}",
            train.len()
        )));
    }
    let mut order = train.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let val = ((order.len() as f64 * VALIDATION_FRACTION).round() as usize).max(1);
    let validation = order.split_off(order.len() - val);
    Ok((order, validation))
}

/// Validation statistics of one trained ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSummary {
    pub train_size: usize,
    pub validation_size: usize,
    pub validation_accuracy: [f64; CLASSIFIERS],
}

/// Trains the four family networks on `train` (minus its validation slice)
/// and weights them by validation accuracy. `stream` separates the seeds of
/// different folds.
pub fn train_ensemble(
    ds: &Dataset,
    train: &[usize],
    opts: &TrainingOptions,
    stream: u64,
) -> Result<(EnsembleModel, TrainingSummary)> {
    let classes = ds.class_count();
    let normalizer = Normalizer::fit(
        train
            .iter()
            .map(|&i| ds.features(i))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let (fit, validation) = validation_split(train, derive_seed(opts.seed, stream))?;

    let encode = |idx: &[usize], family: Family| -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        idx.iter()
            .map(|&i| {
                let mut target = vec![0.0; classes];
                target[ds.samples[i].label] = 1.0;
                Ok((normalizer.apply_vector(ds.features(i)?.get(family)), target))
            })
            .collect()
    };

    let trained: Vec<Result<(MlpModel, f64)>> = Family::ALL
        .par_iter()
        .map(|&family| {
            let seed = derive_seed(
                opts.seed,
                stream * CLASSIFIERS as u64 + family.index() as u64 + 1_000,
            );
            let mut model = init_mlp(opts.mlp_config(family, classes, seed))?;
            model.train(&encode(&fit, family)?)?;
            let held_out = encode(&validation, family)?;
            let mut correct = 0;
            for (x, t) in &held_out {
                if t[model.predict_class(x)?] == 1.0 {
                    correct += 1;
                }
            }
            let accuracy = (correct as f64 * 100.0 / held_out.len() as f64).max(MIN_ACCURACY);
            Ok((model, accuracy))
        })
        .collect();

    let mut models = Vec::with_capacity(CLASSIFIERS);
    let mut accuracies = [0.0; CLASSIFIERS];
    for (k, r) in trained.into_iter().enumerate() {
        let (m, a) = r?;
        models.push(m);
        accuracies[k] = a;
    }
    let models: [MlpModel; CLASSIFIERS] = models.try_into().expect("four models");
    let ensemble = EnsembleModel::new(
        models,
        compute_weights(accuracies)?,
        ds.labels.clone(),
        normalizer,
        FusionMode::default(),
    )?;
    Ok((
        ensemble,
        TrainingSummary {
            train_size: fit.len(),
            validation_size: validation.len(),
            validation_accuracy: accuracies,
        },
    ))
}

/// Result of running a protocol: the pooled report and each split's ensemble.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub report: EvalReport,
    pub ensembles: Vec<EnsembleModel>,
}

/// Runs the protocol fold by fold and pools test predictions. Needs cached features.
pub fn cross_validate(
    ds: &Dataset,
    protocol: Protocol,
    opts: &TrainingOptions,
    mode: FusionMode,
) -> Result<CrossValidation> {
    let splits: Vec<(Vec<usize>, Vec<usize>)> = match protocol {
        Protocol::ThreeFold => {
            let plan = three_fold_split(&ds.samples, opts.seed)?;
            (0..FOLDS)
                .map(|i| {
                    let (train, test) = plan.fold(i);
                    Ok((
                        indices_of(&ds.samples, &train)?,
                        indices_of(&ds.samples, &test)?,
                    ))
                })
                .collect::<Result<_>>()?
        }
        Protocol::Holdout { train_fraction } => {
            let plan = holdout_split(&ds.samples, opts.seed, train_fraction)?;
            vec![(
                indices_of(&ds.samples, &plan.train)?,
                indices_of(&ds.samples, &plan.test)?,
            )]
        }
    };

    let mut pooled = Tally::new(ds.class_count());
    let mut folds = Vec::with_capacity(splits.len());
    let mut ensembles = Vec::with_capacity(splits.len());
    for (fold, (train, test)) in splits.iter().enumerate() {
        let (ensemble, summary) = train_ensemble(ds, train, opts, fold as u64)?;
        let test_bundles = test
            .iter()
            .map(|&i| Ok((ds.samples[i].label, ds.features(i)?)))
            .collect::<Result<Vec<_>>>()?;
        let t = tally(&ensemble, test_bundles, mode)?;
        pooled.merge(&t);
        folds.push(FoldReport {
            fold,
            train_size: summary.train_size,
            validation_size: summary.validation_size,
            test_size: t.samples,
            validation_accuracy: summary.validation_accuracy,
            weights: ensemble.weights.omega,
            individual_top1: t.individual_correct.map(|c| percent(c, t.samples)),
            ensemble_top_k: t
                .top_k_correct
                .iter()
                .map(|&c| percent(c, t.samples))
                .collect(),
            union: percent(t.union_correct, t.samples),
        });
        ensembles.push(ensemble);
    }
    Ok(CrossValidation {
        report: EvalReport::from_tally(&pooled, ds.labels.clone(), mode, folds),
        ensembles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..8).map(|k| derive_seed(42, k)).collect();
        let mut u = s.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), s.len());
        assert_eq!(derive_seed(42, 3), s[3]);
    }

    #[test]
    fn validation_is_last_tenth() {
        let train: Vec<usize> = (0..40).collect();
        let (fit, val) = validation_split(&train, 7).unwrap();
        assert_eq!((fit.len(), val.len()), (36, 4));
        let mut all: Vec<usize> = fit.iter().chain(&val).copied().collect();
        all.sort();
        assert_eq!(all, train);
        assert_eq!(validation_split(&train[..3], 0).unwrap().1.len(), 1);
        assert!(validation_split(&train[..1], 0).is_err());
    }

    #[test]
    fn protocol_names() {
        assert_eq!("3fold".parse::<Protocol>().unwrap(), Protocol::ThreeFold);
        assert!(matches!(
            "holdout".parse::<Protocol>().unwrap(),
            Protocol::Holdout { .. }
        ));
        assert!("5fold".parse::<Protocol>().is_err());
    }
}
