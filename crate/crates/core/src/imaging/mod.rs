//! Raster preprocessing: thresholding, cropping and scaling onto the fixed
//! canvas, morphological cleanup, thinning and contour chain coding.

mod binarize;
mod contour;
mod geometry;
pub mod io;
mod morphology;
mod thinning;

pub use binarize::{binarize_dynamic_threshold, Binarization, INITIAL_THRESHOLD, MAX_ITERATIONS};
pub use contour::{extract_contour_mask, trace_chain_codes, ContourChain, Direction};
pub use geometry::{scale_to_canvas, tight_bounding_box};
pub use morphology::{dilate, erode, morph_cleanup};
pub use thinning::{thin_to_skeleton, Skeleton};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of the square canvas every character is normalized onto.
pub const CANVAS_SIZE: usize = 100;

/// 8-neighborhood offsets `(dx, dy)` in Freeman order: E, NE, N, NW, W, SW, S, SE.
/// `y` grows downward, so "north" is `dy = -1`.
pub(crate) const NEIGHBORS8: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// A pixel coordinate; `x` is the column and `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: usize,
    pub y: usize,
}

impl Point {
    pub const fn new(x: usize, y: usize) -> Self {
        Point { x, y }
    }
}

/// An 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// An image filled with a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }
}

/// A binary raster, row-major; `true` is ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    /// An all-background image. Zero dimensions are allowed only as a pair.
    pub fn new(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(BinaryImage {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image with the given foreground points; points outside the
    /// image are ignored.
    pub fn from_points(
        width: usize,
        height: usize,
        points: impl IntoIterator<Item = Point>,
    ) -> Self {
        let mut img = BinaryImage::new(width, height);
        for p in points {
            if p.x < width && p.y < height {
                img.set(p.x, p.y, true);
            }
        }
        img
    }

    /// Parses rows of `#` (ink) and `.` (background). Handy for fixtures.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut pixels = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(Error::InvalidImage("ragged ascii fixture".into()));
            }
            pixels.extend(row.bytes().map(|b| b == b'#'));
        }
        BinaryImage::from_pixels(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Signed lookup; anything outside the image reads as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.pixels[y as usize * self.width + x as usize]
        }
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Foreground pixels in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = Point> + '_ {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| Point::new(i % self.width, i / self.width))
    }

    /// Number of foreground pixels among the 8 neighbors of `(x, y)`.
    pub fn neighbor_count(&self, x: usize, y: usize) -> usize {
        NEIGHBORS8
            .iter()
            .filter(|(dx, dy)| self.get_signed(x as i64 + dx, y as i64 + dy))
            .count()
    }

    /// Number of 8-connected foreground components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.pixels.len()];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..self.pixels.len() {
            if !self.pixels[start] || seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = ((i % self.width) as i64, (i / self.width) as i64);
                for (dx, dy) in NEIGHBORS8 {
                    let (nx, ny) = (x + dx, y + dy);
                    if self.get_signed(nx, ny) {
                        let j = ny as usize * self.width + nx as usize;
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        components
    }

    /// True when some 2×2 window is entirely foreground.
    pub fn has_full_2x2_block(&self) -> bool {
        self.full_2x2_blocks().next().is_some()
    }

    /// Top-left corners of every all-foreground 2×2 window.
    pub(crate) fn full_2x2_blocks(&self) -> impl Iterator<Item = Point> + '_ {
        let w = self.width.saturating_sub(1);
        let h = self.height.saturating_sub(1);
        (0..h)
            .flat_map(move |y| (0..w).map(move |x| Point::new(x, y)))
            .filter(move |p| {
                self.get(p.x, p.y)
                    && self.get(p.x + 1, p.y)
                    && self.get(p.x, p.y + 1)
                    && self.get(p.x + 1, p.y + 1)
            })
    }

    pub(crate) fn require_canvas(&self) -> Result<()> {
        if self.width != CANVAS_SIZE || self.height != CANVAS_SIZE {
            return Err(Error::InvalidImage(format!(
                "expected a {CANVAS_SIZE}x{CANVAS_SIZE} canvas, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// An axis-aligned rectangle in pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub left: usize,
    pub top: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub const fn new(left: usize, top: usize, width: usize, height: usize) -> Self {
        Rect {
            left,
            top,
            width,
            height,
        }
    }

    pub fn right(&self) -> usize {
        self.left + self.width
    }

    pub fn bottom(&self) -> usize {
        self.top + self.height
    }

    pub fn fits_inside(&self, width: usize, height: usize) -> bool {
        self.width >= 1 && self.height >= 1 && self.right() <= width && self.bottom() <= height
    }
}
