use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_float;
use crate::features::{Family, FeatureBundle, FeatureVector};

/// Observed range of one family's dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRange {
    pub family: Family,
    #[serde(with = "exact_float::vec")]
    pub min: Vec<f64>,
    #[serde(with = "exact_float::vec")]
    pub max: Vec<f64>,
}

impl FamilyRange {
    fn empty(family: Family) -> Self {
        FamilyRange {
            family,
            min: vec![f64::INFINITY; family.len()],
            max: vec![f64::NEG_INFINITY; family.len()],
        }
    }

    fn observe(&mut self, v: &FeatureVector) {
        for ((lo, hi), &x) in self.min.iter_mut().zip(&mut self.max).zip(v.values()) {
            *lo = lo.min(x);
            *hi = hi.max(x);
        }
    }

    /// `(x − min) / (max − min)` clamped to `[0, 1]`; constant dimensions map to 0.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Per-family, per-dimension min–max scaling fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    ranges: Vec<FamilyRange>,
}

impl Normalizer {
    pub fn fit<'a>(training: impl IntoIterator<Item = &'a FeatureBundle>) -> Result<Self> {
        let mut ranges: Vec<FamilyRange> =
            Family::ALL.iter().map(|&f| FamilyRange::empty(f)).collect();
        let mut seen = 0usize;
        for bundle in training {
            seen += 1;
            for (range, v) in ranges.iter_mut().zip(bundle.iter()) {
                range.observe(v);
            }
        }
        if seen == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        Ok(Normalizer { ranges })
    }

    pub fn range(&self, family: Family) -> &FamilyRange {
        &self.ranges[family.index()]
    }

    pub fn apply_vector(&self, v: &FeatureVector) -> Vec<f64> {
        self.range(v.family()).apply(v.values())
    }

    pub fn apply(&self, bundle: &FeatureBundle) -> [Vec<f64>; 4] {
        Family::ALL.map(|f| self.apply_vector(bundle.get(f)))
    }

    /// Checks that a deserialized normalizer has one well-formed range per family.
    pub fn validate(&self) -> Result<()> {
        let ok = self.ranges.len() == Family::ALL.len()
            && self.ranges.iter().zip(Family::ALL).all(|(r, f)| {
                r.family == f
                    && r.min.len() == f.len()
                    && r.max.len() == f.len()
                    && r.min.iter().zip(&r.max).all(|(lo, hi)| lo <= hi)
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Format("malformed normalizer".into()))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let n: Normalizer = serde_json::from_str(text)?;
        n.validate()?;
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(first: f64) -> FeatureBundle {
        let v = |f: Family| {
            let mut values = vec![0.5; f.len()];
            values[0] = first;
            FeatureVector::new(f, values).unwrap()
        };
        FeatureBundle {
            chain_code: v(Family::ChainCode),
            intersection: v(Family::Intersection),
            shadow: v(Family::Shadow),
            line_fit: v(Family::LineFit),
        }
    }

    #[test]
    fn min_max_scaling() {
        let n = Normalizer::fit(&[bundle(2.0), bundle(4.0)]).unwrap();
        let r = n.range(Family::Shadow);
        assert_eq!(r.apply(&[2.0])[0], 0.0);
        assert_eq!(r.apply(&[4.0])[0], 1.0);
        assert_eq!(r.apply(&[3.0])[0], 0.5);
        // Clamped outside the training range.
        assert_eq!(r.apply(&[7.0])[0], 1.0);
        assert_eq!(r.apply(&[-7.0])[0], 0.0);
        // Constant column.
        assert_eq!(n.apply(&bundle(3.0))[2][1], 0.0);
    }

    #[test]
    fn empty_training_set() {
        assert!(matches!(Normalizer::fit(&[]), Err(Error::EmptyTrainingSet)));
    }

    #[test]
    fn json_round_trip() {
        let n = Normalizer::fit(&[bundle(0.1), bundle(1.0 / 3.0)]).unwrap();
        let back = Normalizer::from_json(&n.to_json().unwrap()).unwrap();
        assert_eq!(back, n);
    }
}
