//! Reading PNG / PGM scans and writing PGM debug dumps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Decodes a PNG or PGM (P2 or P5) file to 8-bit grayscale. Color input is
/// converted by luma.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let unreadable = |reason: String| Error::UnreadableImage {
        path: path.to_path_buf(),
        reason,
    };
    let decoded = image::ImageReader::open(path)
        .map_err(|e| unreadable(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?
        .decode()
        .map_err(|e| unreadable(e.to_string()))?
        .into_luma8();
    let (w, h) = decoded.dimensions();
    GrayImage::new(w as usize, h as usize, decoded.into_raw())
        .map_err(|e| unreadable(e.to_string()))
}

/// Writes a binary P5 PGM.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(img.pixels())?;
    out.flush()?;
    Ok(())
}

/// Renders ink as black on white.
pub fn binary_to_gray(img: &BinaryImage) -> GrayImage {
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| if p { 0 } else { 255 })
        .collect();
    GrayImage::new(img.width().max(1), img.height().max(1), pixels)
        .expect("binary image dimensions are consistent")
}

pub fn write_binary_pgm(path: &Path, img: &BinaryImage) -> Result<()> {
    write_pgm(path, &binary_to_gray(img))
}
