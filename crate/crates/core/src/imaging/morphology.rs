use super::{BinaryImage, NEIGHBORS8};

/// Binary dilation with a 3×3 square structuring element.
pub fn dilate(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    for p in img.foreground() {
        for (dx, dy) in NEIGHBORS8 {
            let (x, y) = (p.x as i64 + dx, p.y as i64 + dy);
            if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
                out.set(x as usize, y as usize, true);
            }
        }
    }
    out
}

/// Binary erosion with a 3×3 square structuring element.
///
/// Only in-bounds neighbors are tested, so ink touching the image border is
/// not eaten away and `erode(dilate(x)) ⊇ x` holds everywhere.
pub fn erode(img: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::new(img.width(), img.height());
    for p in img.foreground() {
        let keep = NEIGHBORS8.iter().all(|(dx, dy)| {
            let (x, y) = (p.x as i64 + dx, p.y as i64 + dy);
            let outside = x < 0 || y < 0 || x as usize >= img.width() || y as usize >= img.height();
            outside || img.get(x as usize, y as usize)
        });
        if keep {
            out.set(p.x, p.y, true);
        }
    }
    out
}

/// One closing (dilate, then erode) followed by one more dilation.
pub fn morph_cleanup(img: &BinaryImage) -> BinaryImage {
    let closed = erode(&dilate(img));
    dilate(&closed)
}
