//! The four feature families: shadow projections, contour chain-code
//! histograms, skeleton end/junction counts and per-segment line fits.
//!
//! Extractors emit raw values (fractions, counts, pixel offsets, unit-circle
//! coordinates); scaling to `[0, 1]` is done later by
//! [`Normalizer`](crate::dataset::Normalizer).

mod chain_histogram;
pub mod csv;
mod intersection;
mod line_fit;
mod shadow;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use chain_histogram::chain_code_histogram;
pub use intersection::intersection_features;
pub use line_fit::{line_fit_points, line_fit_segment, line_fitting_features, LineFitResult};
pub use shadow::shadow_features;

use crate::error::{Error, Result};
use crate::imaging::{
    binarize_dynamic_threshold, extract_contour_mask, morph_cleanup, scale_to_canvas,
    thin_to_skeleton, tight_bounding_box, trace_chain_codes, BinaryImage, ContourChain, GrayImage,
    Point, Skeleton, CANVAS_SIZE,
};

/// Feature family. Declaration order is the fusion order `k = 1..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ChainCode,
    Intersection,
    Shadow,
    LineFit,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::ChainCode,
        Family::Intersection,
        Family::Shadow,
        Family::LineFit,
    ];

    /// Vector length for this family.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        match self {
            Family::ChainCode => 200,
            Family::Intersection => 32,
            Family::Shadow => 16,
            Family::LineFit => 48,
        }
    }

    /// Hidden-layer width used for this family's classifier.
    pub fn default_hidden_size(self) -> usize {
        match self {
            Family::ChainCode => 70,
            Family::Intersection => 20,
            Family::Shadow => 30,
            Family::LineFit => 40,
        }
    }

    /// Position in [`Family::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::ChainCode => "chain-code",
            Family::Intersection => "intersection",
            Family::Shadow => "shadow",
            Family::LineFit => "line-fit",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown feature family {s:?}")))
    }
}

/// A fixed-length feature vector tagged with its family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    family: Family,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(family: Family, values: Vec<f64>) -> Result<Self> {
        if values.len() != family.len() {
            return Err(Error::DimensionMismatch {
                expected: family.len(),
                actual: values.len(),
            });
        }
        Ok(FeatureVector { family, values })
    }

    pub(crate) fn zeros(family: Family) -> Self {
        FeatureVector {
            family,
            values: vec![0.0; family.len()],
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// A regular partition of the canvas into `rows × cols` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentGrid {
    pub rows: usize,
    pub cols: usize,
    pub cell_width: usize,
    pub cell_height: usize,
}

impl SegmentGrid {
    /// 4×4 cells of 25×25, used on skeletons.
    pub const SKELETON: SegmentGrid = SegmentGrid {
        rows: 4,
        cols: 4,
        cell_width: 25,
        cell_height: 25,
    };

    /// 5×5 cells of 20×20, used for contour histograms.
    pub const CONTOUR: SegmentGrid = SegmentGrid {
        rows: 5,
        cols: 5,
        cell_width: 20,
        cell_height: 20,
    };

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Row-major cell index of a canvas pixel.
    pub fn cell_of(&self, p: Point) -> usize {
        (p.y / self.cell_height) * self.cols + p.x / self.cell_width
    }

    /// Pixel position relative to its cell's top-left corner.
    pub fn local(&self, p: Point) -> Point {
        Point::new(p.x % self.cell_width, p.y % self.cell_height)
    }

    fn check_canvas(&self) -> Result<()> {
        if self.rows * self.cell_height != CANVAS_SIZE || self.cols * self.cell_width != CANVAS_SIZE
        {
            return Err(Error::InvalidConfig(format!(
                "grid {self:?} does not tile a {CANVAS_SIZE}x{CANVAS_SIZE} canvas"
            )));
        }
        Ok(())
    }
}

/// All four feature vectors for one character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub chain_code: FeatureVector,
    pub intersection: FeatureVector,
    pub shadow: FeatureVector,
    pub line_fit: FeatureVector,
}

impl FeatureBundle {
    pub fn get(&self, family: Family) -> &FeatureVector {
        match family {
            Family::ChainCode => &self.chain_code,
            Family::Intersection => &self.intersection,
            Family::Shadow => &self.shadow,
            Family::LineFit => &self.line_fit,
        }
    }

    pub fn get_mut(&mut self, family: Family) -> &mut FeatureVector {
        match family {
            Family::ChainCode => &mut self.chain_code,
            Family::Intersection => &mut self.intersection,
            Family::Shadow => &mut self.shadow,
            Family::LineFit => &mut self.line_fit,
        }
    }

    /// Vectors in fusion order.
    pub fn iter(&self) -> impl Iterator<Item = &FeatureVector> {
        Family::ALL.into_iter().map(|f| self.get(f))
    }
}

/// Intermediate rasters from one pipeline run, kept for debug dumps.
#[derive(Debug, Clone)]
pub struct PipelineStages {
    pub threshold: f64,
    pub binary: BinaryImage,
    pub scaled: BinaryImage,
    pub cleaned: BinaryImage,
    pub contour: BinaryImage,
    pub chains: Vec<ContourChain>,
    pub skeleton: Skeleton,
}

/// Runs preprocessing and returns every stage.
pub fn run_pipeline(img: &GrayImage) -> Result<PipelineStages> {
    let bin = binarize_dynamic_threshold(img)?;
    let rect = tight_bounding_box(&bin.image)?;
    let scaled = scale_to_canvas(&bin.image, rect)?;
    let cleaned = morph_cleanup(&scaled);
    let contour = extract_contour_mask(&cleaned);
    let chains = trace_chain_codes(&contour);
    let skeleton = thin_to_skeleton(&cleaned);
    Ok(PipelineStages {
        threshold: bin.threshold,
        binary: bin.image,
        scaled,
        cleaned,
        contour,
        chains,
        skeleton,
    })
}

impl PipelineStages {
    pub fn features(&self) -> Result<FeatureBundle> {
        Ok(FeatureBundle {
            chain_code: chain_code_histogram(&self.chains, SegmentGrid::CONTOUR)?,
            intersection: intersection_features(&self.skeleton, SegmentGrid::SKELETON)?,
            shadow: shadow_features(&self.cleaned)?,
            line_fit: line_fitting_features(&self.skeleton, SegmentGrid::SKELETON)?,
        })
    }
}

/// Grayscale scan to all four feature vectors.
pub fn extract_feature_bundle(img: &GrayImage) -> Result<FeatureBundle> {
    run_pipeline(img)?.features()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_lengths_and_order() {
        let lens: Vec<usize> = Family::ALL.iter().map(|f| f.len()).collect();
        assert_eq!(lens, vec![200, 32, 16, 48]);
        let hidden: Vec<usize> = Family::ALL
            .iter()
            .map(|f| f.default_hidden_size())
            .collect();
        assert_eq!(hidden, vec![70, 20, 30, 40]);
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
    }

    #[test]
    fn vector_length_is_checked() {
        assert!(FeatureVector::new(Family::Shadow, vec![0.0; 15]).is_err());
        assert!(FeatureVector::new(Family::Shadow, vec![0.0; 16]).is_ok());
    }

    #[test]
    fn grids_tile_the_canvas() {
        SegmentGrid::SKELETON.check_canvas().unwrap();
        SegmentGrid::CONTOUR.check_canvas().unwrap();
        assert_eq!(SegmentGrid::SKELETON.cell_of(Point::new(99, 99)), 15);
        assert_eq!(SegmentGrid::CONTOUR.cell_of(Point::new(45, 45)), 12);
        assert_eq!(
            SegmentGrid::SKELETON.local(Point::new(62, 37)),
            Point::new(12, 12)
        );
    }

    #[test]
    fn blank_page_has_no_foreground() {
        let img = GrayImage::filled(40, 40, 255).unwrap();
        assert!(matches!(
            extract_feature_bundle(&img),
            Err(Error::NoForeground)
        ));
    }

    #[test]
    fn extraction_is_deterministic() {
        let mut img = GrayImage::filled(60, 60, 230).unwrap();
        for i in 10..50 {
            img.set(i, 30, 20);
            img.set(30, i, 20);
            img.set(i, i, 40);
        }
        let a = extract_feature_bundle(&img).unwrap();
        let b = extract_feature_bundle(&img).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            let xb: Vec<u64> = x.values().iter().map(|v| v.to_bits()).collect();
            let yb: Vec<u64> = y.values().iter().map(|v| v.to_bits()).collect();
            assert_eq!(xb, yb);
        }
    }
}
