use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Starting threshold, the midpoint of the 8-bit range.
pub const INITIAL_THRESHOLD: f64 = 128.0;

/// Relative threshold change below which the iteration stops.
const CONVERGENCE_RATIO: f64 = 0.02;

/// Hard cap on threshold updates.
pub const MAX_ITERATIONS: usize = 50;

/// Output of [`binarize_dynamic_threshold`].
#[derive(Debug, Clone)]
pub struct Binarization {
    /// `true` where the gray value is strictly below `threshold`.
    pub image: BinaryImage,
    pub threshold: f64,
    /// Number of threshold updates performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Iterative mean-split thresholding.
///
/// Starting at 128, pixels darker than the threshold are ink and the rest
/// background; the next threshold is the average of the two class means. The
/// loop stops once `|T' - T| / max(T, 1) < 0.02`.
pub fn binarize_dynamic_threshold(img: &GrayImage) -> Result<Binarization> {
    let mut histogram = [0u64; 256];
    for &p in img.pixels() {
        histogram[p as usize] += 1;
    }

    let mut threshold = INITIAL_THRESHOLD;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let (fg, bg) = class_sums(&histogram, threshold);
        if fg.0 == 0 {
            return Err(Error::NoForeground);
        }
        if bg.0 == 0 {
            // Everything is ink; no background mean to move towards.
            converged = true;
            break;
        }
        let next = (fg.1 as f64 / fg.0 as f64 + bg.1 as f64 / bg.0 as f64) / 2.0;
        iterations += 1;
        let change = (next - threshold).abs() / threshold.max(1.0);
        threshold = next;
        if change < CONVERGENCE_RATIO {
            converged = true;
            break;
        }
    }

    let pixels: Vec<bool> = img
        .pixels()
        .iter()
        .map(|&p| (p as f64) < threshold)
        .collect();
    if !pixels.iter().any(|&p| p) {
        return Err(Error::NoForeground);
    }
    Ok(Binarization {
        image: BinaryImage::from_pixels(img.width(), img.height(), pixels)?,
        threshold,
        iterations,
        converged,
    })
}

/// `(count, sum)` of the classes below and at-or-above `threshold`.
fn class_sums(histogram: &[u64; 256], threshold: f64) -> ((u64, u64), (u64, u64)) {
    let mut fg = (0, 0);
    let mut bg = (0, 0);
    for (value, &count) in histogram.iter().enumerate() {
        let class = if (value as f64) < threshold {
            &mut fg
        } else {
            &mut bg
        };
        class.0 += count;
        class.1 += count * value as u64;
    }
    (fg, bg)
}
