//! Offline handwritten character recognition.
//!
//! A grayscale scan is thresholded, cropped to its ink, stretched onto a
//! 100×100 canvas and cleaned up morphologically. Four feature families are
//! read off that canvas (shadow projections, contour chain-code histograms,
//! skeleton end/junction counts and per-segment line fits), each feeding its own
//! sigmoid MLP. The four classifiers are fused by accuracy-weighted voting.

pub mod classifier;
pub mod dataset;
pub mod ensemble;
pub mod error;
mod exact_float;
pub mod features;
pub mod imaging;
pub mod synth;

pub use classifier::{MlpConfig, MlpModel, TrainReport};
pub use dataset::{Dataset, EvalReport, FoldPlan, LabeledSample, Normalizer};
pub use ensemble::{CombinedDecision, EnsembleModel, FusionMode, FusionWeights};
pub use error::{Error, Result};
pub use features::{extract_feature_bundle, Family, FeatureBundle, FeatureVector, SegmentGrid};
pub use imaging::{BinaryImage, ContourChain, Direction, GrayImage, Point, Rect, Skeleton};
