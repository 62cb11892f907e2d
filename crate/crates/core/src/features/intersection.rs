use super::{Family, FeatureVector, SegmentGrid};
use crate::error::{Error, Result};
use crate::imaging::Skeleton;

/// Open-end and junction counts per skeleton segment.
///
/// An open end has exactly one ink 8-neighbor, a junction more than two.
/// Features 0–15 are open-end counts, 16–31 junction counts, both row-major.
pub fn intersection_features(sk: &Skeleton, grid: SegmentGrid) -> Result<FeatureVector> {
    let img = sk.image();
    img.require_canvas()?;
    grid.check_canvas()?;
    let cells = grid.cells();
    if 2 * cells != Family::Intersection.len() {
        return Err(Error::InvalidConfig(format!(
            "intersection features need a 4x4 grid, got {}x{}",
            grid.rows, grid.cols
        )));
    }
    let mut out = FeatureVector::zeros(Family::Intersection);
    for p in img.foreground() {
        let cell = grid.cell_of(p);
        match img.neighbor_count(p.x, p.y) {
            1 => out.values_mut()[cell] += 1.0,
            n if n > 2 => out.values_mut()[cells + cell] += 1.0,
            _ => {}
        }
    }
    Ok(out)
}
