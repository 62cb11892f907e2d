use super::{BinaryImage, Rect, CANVAS_SIZE};
use crate::error::{Error, Result};

/// Smallest axis-aligned rectangle containing every foreground pixel.
pub fn tight_bounding_box(img: &BinaryImage) -> Result<Rect> {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for p in img.foreground() {
        bounds = Some(match bounds {
            None => (p.x, p.y, p.x, p.y),
            Some((l, t, r, b)) => (l.min(p.x), t.min(p.y), r.max(p.x), b.max(p.y)),
        });
    }
    let (l, t, r, b) = bounds.ok_or(Error::NoForeground)?;
    Ok(Rect::new(l, t, r - l + 1, b - t + 1))
}

/// Crops `img` to `rect` and stretches the crop onto the square canvas with
/// nearest-neighbor sampling. Aspect ratio is not preserved.
///
/// Output pixel `ox` samples source column `left + floor((ox + 0.5) * w / 100)`,
/// and likewise for rows.
pub fn scale_to_canvas(img: &BinaryImage, rect: Rect) -> Result<BinaryImage> {
    if !rect.fits_inside(img.width(), img.height()) {
        return Err(Error::InvalidImage(format!(
            "{rect:?} does not fit inside a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    let source_index = |o: usize, len: usize| ((2 * o + 1) * len) / (2 * CANVAS_SIZE);
    let cols: Vec<usize> = (0..CANVAS_SIZE)
        .map(|ox| rect.left + source_index(ox, rect.width))
        .collect();

    let mut out = BinaryImage::new(CANVAS_SIZE, CANVAS_SIZE);
    for oy in 0..CANVAS_SIZE {
        let sy = rect.top + source_index(oy, rect.height);
        for (ox, &sx) in cols.iter().enumerate() {
            out.set(ox, oy, img.get(sx, sy));
        }
    }
    Ok(out)
}
