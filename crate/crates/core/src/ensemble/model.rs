use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    combine_decisions, compute_weights, CombinedDecision, FusionMode, FusionWeights, CLASSIFIERS,
};
use crate::classifier::{load_model, save_model, MlpModel, ModelDocument};
use crate::dataset::Normalizer;
use crate::error::{Error, Result};
use crate::exact_float;
use crate::features::{extract_feature_bundle, Family, FeatureBundle};
use crate::imaging::GrayImage;

pub const ENSEMBLE_FORMAT: &str = "glyph-ensemble/1";
pub const MANIFEST_FILE: &str = "ensemble.json";
pub const NORMALIZER_FILE: &str = "normalizer.json";

/// Four trained family networks plus everything needed to fuse them.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    /// In [`Family::ALL`] order.
    pub models: [MlpModel; CLASSIFIERS],
    pub weights: FusionWeights,
    pub labels: Vec<String>,
    pub normalizer: Normalizer,
    pub mode: FusionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub family: Family,
    /// Relative to the manifest's directory.
    pub path: String,
    #[serde(with = "exact_float::scalar")]
    pub accuracy: f64,
    #[serde(with = "exact_float::scalar")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub format: String,
    pub fusion_mode: FusionMode,
    pub labels: Vec<String>,
    pub normalizer: String,
    pub classifiers: Vec<ManifestEntry>,
}

fn model_file(family: Family) -> String {
    format!("{}.json", family.name())
}

impl EnsembleModel {
    pub fn new(
        models: [MlpModel; CLASSIFIERS],
        weights: FusionWeights,
        labels: Vec<String>,
        normalizer: Normalizer,
        mode: FusionMode,
    ) -> Result<Self> {
        for (model, family) in models.iter().zip(Family::ALL) {
            let c = model.config();
            if c.input_size != family.len() {
                return Err(Error::DimensionMismatch {
                    expected: family.len(),
                    actual: c.input_size,
                });
            }
            if c.output_size != labels.len() {
                return Err(Error::DimensionMismatch {
                    expected: labels.len(),
                    actual: c.output_size,
                });
            }
        }
        normalizer.validate()?;
        Ok(EnsembleModel {
            models,
            weights,
            labels,
            normalizer,
            mode,
        })
    }

    pub fn class_count(&self) -> usize {
        self.labels.len()
    }

    pub fn model(&self, family: Family) -> &MlpModel {
        &self.models[family.index()]
    }

    /// Raw outputs of every classifier on normalized features.
    pub fn confidences(&self, bundle: &FeatureBundle) -> Result<[Vec<f64>; CLASSIFIERS]> {
        let inputs = self.normalizer.apply(bundle);
        let mut out: [Vec<f64>; CLASSIFIERS] = Default::default();
        for ((slot, model), x) in out.iter_mut().zip(&self.models).zip(&inputs) {
            *slot = model.predict_confidences(x)?;
        }
        Ok(out)
    }

    pub fn combine(
        &self,
        outputs: &[Vec<f64>; CLASSIFIERS],
        mode: FusionMode,
    ) -> Result<CombinedDecision> {
        let rows: [&[f64]; CLASSIFIERS] = [&outputs[0], &outputs[1], &outputs[2], &outputs[3]];
        combine_decisions(rows, &self.weights, mode)
    }

    pub fn classify(&self, bundle: &FeatureBundle, mode: FusionMode) -> Result<CombinedDecision> {
        self.combine(&self.confidences(bundle)?, mode)
    }

    pub fn classify_image(&self, img: &GrayImage, mode: FusionMode) -> Result<CombinedDecision> {
        self.classify(&extract_feature_bundle(img)?, mode)
    }

    pub fn manifest(&self) -> EnsembleManifest {
        EnsembleManifest {
            format: ENSEMBLE_FORMAT.into(),
            fusion_mode: self.mode,
            labels: self.labels.clone(),
            normalizer: NORMALIZER_FILE.into(),
            classifiers: Family::ALL
                .iter()
                .map(|&f| ManifestEntry {
                    family: f,
                    path: model_file(f),
                    accuracy: self.weights.source_accuracies[f.index()],
                    weight: self.weights.omega[f.index()],
                })
                .collect(),
        }
    }

    /// Writes the manifest, normalizer and one model file per family into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (model, family) in self.models.iter().zip(Family::ALL) {
            let doc = ModelDocument::new(model.clone(), Some(family), self.labels.clone());
            save_model(&dir.join(model_file(family)), &doc)?;
        }
        fs::write(dir.join(NORMALIZER_FILE), self.normalizer.to_json()? + "\n")?;
        fs::write(
            dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(&self.manifest())? + "\n",
        )?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: EnsembleManifest =
            serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
        if manifest.format != ENSEMBLE_FORMAT {
            return Err(Error::Format(format!(
                "unsupported ensemble format {:?}",
                manifest.format
            )));
        }
        let families: Vec<Family> = manifest.classifiers.iter().map(|c| c.family).collect();
        if families != Family::ALL {
            return Err(Error::Format(
                "manifest must list chain-code, intersection, shadow, line-fit in order".into(),
            ));
        }
        let mut accuracies = [0.0; CLASSIFIERS];
        let mut models = Vec::with_capacity(CLASSIFIERS);
        for (k, entry) in manifest.classifiers.iter().enumerate() {
            let doc = load_model(&dir.join(&entry.path))?;
            if doc.family.is_some_and(|f| f != entry.family) || doc.labels != manifest.labels {
                return Err(Error::Format(format!(
                    "{} does not match the manifest",
                    entry.path
                )));
            }
            accuracies[k] = entry.accuracy;
            models.push(doc.model);
        }
        let weights = compute_weights(accuracies)?;
        for (entry, w) in manifest.classifiers.iter().zip(weights.omega) {
            if (entry.weight - w).abs() > 1e-12 {
                return Err(Error::Format(format!(
                    "{} weight {} disagrees with its accuracy",
                    entry.family, entry.weight
                )));
            }
        }
        let normalizer =
            Normalizer::from_json(&fs::read_to_string(dir.join(&manifest.normalizer))?)?;
        EnsembleModel::new(
            models.try_into().expect("four models"),
            weights,
            manifest.labels,
            normalizer,
            manifest.fusion_mode,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{init_mlp, MlpConfig};
    use crate::features::FeatureVector;

    fn bundle(scale: f64) -> FeatureBundle {
        let v = |f: Family| {
            FeatureVector::new(
                f,
                (0..f.len())
                    .map(|i| ((i as f64 + 1.0) * scale).sin())
                    .collect(),
            )
            .unwrap()
        };
        FeatureBundle {
            chain_code: v(Family::ChainCode),
            intersection: v(Family::Intersection),
            shadow: v(Family::Shadow),
            line_fit: v(Family::LineFit),
        }
    }

    fn ensemble() -> EnsembleModel {
        let labels: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let models = Family::ALL
            .map(|f| init_mlp(MlpConfig::new(f.len(), 4, 3).with_seed(f.index() as u64)).unwrap());
        let normalizer = Normalizer::fit(&[bundle(0.3), bundle(0.7)]).unwrap();
        EnsembleModel::new(
            models,
            compute_weights([50.0, 20.0, 40.0, 10.0]).unwrap(),
            labels,
            normalizer,
            FusionMode::ConfidenceSum,
        )
        .unwrap()
    }

    #[test]
    fn save_load_round_trip() {
        let e = ensemble();
        let dir = tempfile::tempdir().unwrap();
        e.save(dir.path()).unwrap();
        let back = EnsembleModel::load(dir.path()).unwrap();
        assert_eq!(back, e);
        let b = bundle(0.5);
        assert_eq!(
            back.classify(&b, FusionMode::ConfidenceSum).unwrap(),
            e.classify(&b, FusionMode::ConfidenceSum).unwrap()
        );
        let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert!(manifest.contains("\"chain-code.json\""));
        assert!(manifest.contains("\"confsum\""));
    }

    #[test]
    fn label_count_must_match_outputs() {
        let e = ensemble();
        let r = EnsembleModel::new(
            e.models.clone(),
            e.weights,
            vec!["only".into()],
            e.normalizer.clone(),
            e.mode,
        );
        assert!(matches!(
            r,
            Err(Error::DimensionMismatch {
                expected: 1,
                actual: 3
            })
        ));
    }

    #[test]
    fn tampered_weight_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        ensemble().save(dir.path()).unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let mut m: EnsembleManifest =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        m.classifiers[0].weight = 0.9;
        fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
        assert!(matches!(
            EnsembleModel::load(dir.path()),
            Err(Error::Format(_))
        ));
    }
}
