//! Labeled image directories, fold planning, normalization and evaluation.
//!
//! A dataset root holds one subdirectory per class; class indices follow the
//! sorted directory names. Sample ids are `class/file`.

mod eval;
mod folds;
mod normalize;
mod protocol;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use eval::{evaluate, evaluate_dataset, tally, EvalReport, FoldReport, Tally, MAX_TOP_K};
pub use folds::{holdout_split, three_fold_split, FoldPlan, HoldoutPlan, FOLDS};
pub use normalize::{FamilyRange, Normalizer};
pub use protocol::{
    cross_validate, derive_seed, train_ensemble, validation_split, CrossValidation, Protocol,
    TrainingOptions, TrainingSummary, DEFAULT_HOLDOUT_FRACTION, MIN_ACCURACY, VALIDATION_FRACTION,
};

use crate::error::{Error, Result};
use crate::features::{extract_feature_bundle, FeatureBundle};
use crate::imaging::io::read_gray;

const IMAGE_EXTENSIONS: [&str; 2] = ["png", "pgm"];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: String,
    pub label: usize,
    pub path: PathBuf,
    pub features: Option<FeatureBundle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub root: PathBuf,
    pub labels: Vec<String>,
    pub samples: Vec<LabeledSample>,
    /// Files dropped because they could not be decoded, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Lists classes and image files without decoding them.
pub fn scan_dataset(root: &Path) -> Result<Dataset> {
    if !root.is_dir() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    let mut labels = Vec::new();
    let mut samples = Vec::new();
    for class_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let label = labels.len();
        let class = file_name(&class_dir);
        for path in sorted_entries(&class_dir)?
            .into_iter()
            .filter(|p| p.is_file() && is_image(p))
        {
            samples.push(LabeledSample {
                id: format!("{class}/{}", file_name(&path)),
                label,
                path,
                features: None,
            });
        }
        labels.push(class);
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    Ok(Dataset {
        root: root.to_path_buf(),
        labels,
        samples,
        skipped: Vec::new(),
    })
}

/// Scans `root` and extracts every sample's feature bundle.
pub fn load_dataset(root: &Path, skip_unreadable: bool) -> Result<Dataset> {
    let mut ds = scan_dataset(root)?;
    ds.extract_features(skip_unreadable)?;
    Ok(ds)
}

impl Dataset {
    pub fn class_count(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Decodes and featurizes samples in parallel. Errors are reported for
    /// the first failing sample in dataset order; with `skip_unreadable`,
    /// undecodable files are dropped instead.
    pub fn extract_features(&mut self, skip_unreadable: bool) -> Result<()> {
        let results: Vec<Result<FeatureBundle>> = self
            .samples
            .par_iter()
            .map(|s| match &s.features {
                Some(f) => Ok(f.clone()),
                None => extract_feature_bundle(&read_gray(&s.path)?),
            })
            .collect();
        let mut kept = Vec::with_capacity(self.samples.len());
        for (mut sample, result) in std::mem::take(&mut self.samples).into_iter().zip(results) {
            match result {
                Ok(bundle) => {
                    sample.features = Some(bundle);
                    kept.push(sample);
                }
                Err(Error::UnreadableImage { path, reason }) if skip_unreadable => {
                    self.skipped.push((path, reason));
                }
                Err(e) => return Err(e),
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyDataset(self.root.clone()));
        }
        self.samples = kept;
        Ok(())
    }

    /// Cached features of sample `i`.
    pub fn features(&self, i: usize) -> Result<&FeatureBundle> {
        self.samples[i].features.as_ref().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "features of {} were not extracted",
                self.samples[i].id
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::io::write_pgm;
    use crate::imaging::GrayImage;

    fn glyph() -> GrayImage {
        let mut g = GrayImage::filled(20, 20, 255).unwrap();
        for i in 3..17 {
            g.set(i, i, 0);
            g.set(i + 1, i, 0);
        }
        g
    }

    fn corpus(dir: &Path, classes: &[&str], per_class: usize) {
        for class in classes {
            fs::create_dir_all(dir.join(class)).unwrap();
            for i in 0..per_class {
                write_pgm(&dir.join(class).join(format!("{i:03}.pgm")), &glyph()).unwrap();
            }
        }
    }

    #[test]
    fn three_classes_of_two() {
        let dir = tempfile::tempdir().unwrap();
        corpus(dir.path(), &["kha", "ga", "ka"], 2);
        fs::write(dir.path().join("ka").join("notes.txt"), "ignored").unwrap();
        let ds = load_dataset(dir.path(), false).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.labels, vec!["ga", "ka", "kha"]);
        assert_eq!(ds.samples[0].id, "ga/000.pgm");
        assert_eq!(ds.samples[2].label, 1);
        assert!(ds.samples.iter().all(|s| s.features.is_some()));
        // Same directory, same label map.
        assert_eq!(scan_dataset(dir.path()).unwrap().labels, ds.labels);
    }

    #[test]
    fn empty_root() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            scan_dataset(dir.path()),
            Err(Error::EmptyDataset(_))
        ));
        assert!(matches!(
            scan_dataset(&dir.path().join("missing")),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn unreadable_files() {
        let dir = tempfile::tempdir().unwrap();
        corpus(dir.path(), &["a"], 2);
        fs::write(dir.path().join("a").join("broken.png"), b"not a png").unwrap();
        assert!(matches!(
            load_dataset(dir.path(), false),
            Err(Error::UnreadableImage { .. })
        ));
        let ds = load_dataset(dir.path(), true).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.skipped.len(), 1);
    }
}
