//! Synthetic stroke glyphs for smoke tests and benchmarks.
//!
//! Each class is a fixed set of polylines in the unit square. Samples jitter
//! every control point, rotate slightly, vary the stroke width and add pixel
//! noise, then render dark ink on a light background.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{derive_seed, Dataset, LabeledSample};
use crate::error::Result;
use crate::features::extract_feature_bundle;
use crate::imaging::io::write_pgm;
use crate::imaging::GrayImage;

pub const GLYPH_CLASSES: [&str; 10] = [
    "slash",
    "backslash",
    "plus",
    "cross",
    "ell",
    "tee",
    "zed",
    "ring",
    "eight",
    "cup",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// Side of the square output image.
    pub size: usize,
    /// Maximum control-point displacement, in unit-square coordinates.
    pub jitter: f64,
    /// Maximum rotation in radians.
    pub rotation: f64,
    /// Stroke width range in pixels.
    pub thickness: (f64, f64),
    /// Maximum absolute per-pixel noise.
    pub noise: u8,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            size: 64,
            jitter: 0.12,
            rotation: 0.35,
            thickness: (2.0, 7.0),
            noise: 40,
        }
    }
}

type Polyline = Vec<(f64, f64)>;

fn arc(cx: f64, cy: f64, r: f64, from: f64, to: f64, steps: usize) -> Polyline {
    (0..=steps)
        .map(|i| {
            let t = from + (to - from) * i as f64 / steps as f64;
            (cx + r * t.cos(), cy + r * t.sin())
        })
        .collect()
}

fn strokes(class: usize) -> Vec<Polyline> {
    match class {
        0 => vec![vec![(0.25, 0.9), (0.75, 0.1)]],
        1 => vec![vec![(0.25, 0.1), (0.75, 0.9)]],
        2 => vec![vec![(0.5, 0.1), (0.5, 0.9)], vec![(0.1, 0.5), (0.9, 0.5)]],
        3 => vec![
            vec![(0.15, 0.15), (0.85, 0.85)],
            vec![(0.85, 0.15), (0.15, 0.85)],
        ],
        4 => vec![vec![(0.25, 0.1), (0.25, 0.88), (0.8, 0.88)]],
        5 => vec![
            vec![(0.1, 0.15), (0.9, 0.15)],
            vec![(0.5, 0.15), (0.5, 0.9)],
        ],
        6 => vec![vec![(0.15, 0.15), (0.85, 0.15), (0.15, 0.85), (0.85, 0.85)]],
        7 => vec![arc(0.5, 0.5, 0.38, 0.0, 2.0 * PI, 40)],
        8 => vec![
            arc(0.5, 0.3, 0.2, 0.0, 2.0 * PI, 28),
            arc(0.5, 0.7, 0.2, 0.0, 2.0 * PI, 28),
        ],
        9 => {
            let mut u = vec![(0.2, 0.1)];
            u.extend(arc(0.5, 0.6, 0.3, PI, 0.0, 20));
            u.push((0.8, 0.1));
            vec![u]
        }
        _ => panic!("no glyph class {class}"),
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// Renders one sample of `class`.
pub fn render_glyph(class: usize, rng: &mut impl Rng, params: &SynthParams) -> GrayImage {
    let n = params.size as f64;
    let angle = rng.random_range(-params.rotation..=params.rotation);
    let (sin, cos) = angle.sin_cos();
    let width = rng.random_range(params.thickness.0..=params.thickness.1);
    let margin = 0.1 * n;
    let span = n - 2.0 * margin;

    let lines: Vec<Polyline> = strokes(class)
        .into_iter()
        .map(|line| {
            line.into_iter()
                .map(|(x, y)| {
                    let x = x + rng.random_range(-params.jitter..=params.jitter) - 0.5;
                    let y = y + rng.random_range(-params.jitter..=params.jitter) - 0.5;
                    let (rx, ry) = (x * cos - y * sin, x * sin + y * cos);
                    (margin + (rx + 0.5) * span, margin + (ry + 0.5) * span)
                })
                .collect()
        })
        .collect();

    let background = rng.random_range(200..=245) as f64;
    let ink = rng.random_range(10..=70) as f64;
    let mut pixels = Vec::with_capacity(params.size * params.size);
    for y in 0..params.size {
        for x in 0..params.size {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let d = lines
                .iter()
                .flat_map(|l| l.windows(2).map(|w| segment_distance(p, w[0], w[1])))
                .fold(f64::INFINITY, f64::min);
            // One pixel of linear falloff at the stroke edge.
            let coverage = (width / 2.0 + 0.5 - d).clamp(0.0, 1.0);
            let noise = rng.random_range(-(params.noise as f64)..=params.noise as f64);
            let v = background + (ink - background) * coverage + noise;
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(params.size, params.size, pixels).expect("square canvas")
}

/// Sample `index` of `class`, independent of generation order.
pub fn sample(class: usize, index: usize, seed: u64, params: &SynthParams) -> GrayImage {
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(seed, ((class as u64) << 32) | index as u64));
    render_glyph(class, &mut rng, params)
}

/// Writes `root/<class>/<index>.pgm` for every class. Returns the file count.
pub fn write_corpus(
    root: &Path,
    per_class: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<usize> {
    for (class, name) in GLYPH_CLASSES.iter().enumerate() {
        let dir = root.join(name);
        fs::create_dir_all(&dir)?;
        for i in 0..per_class {
            write_pgm(
                &dir.join(format!("{i:04}.pgm")),
                &sample(class, i, seed, params),
            )?;
        }
    }
    Ok(GLYPH_CLASSES.len() * per_class)
}

/// A featurized corpus built without touching the filesystem. Sample ids are
/// `class/index`.
pub fn in_memory_dataset(per_class: usize, seed: u64, params: &SynthParams) -> Result<Dataset> {
    let jobs: Vec<(usize, usize)> = (0..GLYPH_CLASSES.len())
        .flat_map(|c| (0..per_class).map(move |i| (c, i)))
        .collect();
    let bundles = jobs
        .par_iter()
        .map(|&(c, i)| extract_feature_bundle(&sample(c, i, seed, params)))
        .collect::<Result<Vec<_>>>()?;
    let samples = jobs
        .iter()
        .zip(bundles)
        .map(|(&(c, i), b)| LabeledSample {
            id: format!("{}/{i:04}", GLYPH_CLASSES[c]),
            label: c,
            path: PathBuf::new(),
            features: Some(b),
        })
        .collect();
    Ok(Dataset {
        root: PathBuf::new(),
        labels: GLYPH_CLASSES.map(String::from).to_vec(),
        samples,
        skipped: Vec::new(),
    })
}
