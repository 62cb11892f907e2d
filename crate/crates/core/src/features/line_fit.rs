use super::{Family, FeatureVector, SegmentGrid};
use crate::error::{Error, Result};
use crate::imaging::{Point, Skeleton};

/// Least-squares fit of `y = a + b·x` over one segment.
///
/// The slope is reported through `f1 = 2b / (1 + b²)` and
/// `f2 = (1 − b²) / (1 + b²)`, i.e. `(sin 2θ, cos 2θ)` for the line angle θ,
/// so slopes near `+∞` and `−∞` map to nearby points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFitResult {
    pub a: f64,
    pub f1: f64,
    pub f2: f64,
    pub n: usize,
}

impl LineFitResult {
    /// Fewer than two points: `a = f1 = f2 = 0`, which lies off the unit circle.
    pub const fn sentinel(n: usize) -> Self {
        LineFitResult {
            a: 0.0,
            f1: 0.0,
            f2: 0.0,
            n,
        }
    }

    fn from_slope(a: f64, b: f64, n: usize) -> Self {
        let d = 1.0 + b * b;
        LineFitResult {
            a,
            f1: 2.0 * b / d,
            f2: (1.0 - b * b) / d,
            n,
        }
    }

    /// All points share one `x`: the `b → ∞` limit, with `a` set to that `x`.
    fn vertical(x: f64, n: usize) -> Self {
        LineFitResult {
            a: x,
            f1: 0.0,
            f2: -1.0,
            n,
        }
    }
}

/// Fits pixel coordinates (`x` = column, `y` = row) using exact integer sums.
pub fn line_fit_segment(points: &[Point]) -> LineFitResult {
    let n = points.len();
    if n < 2 {
        return LineFitResult::sentinel(n);
    }
    let (mut sx, mut sy, mut sxx, mut sxy) = (0i64, 0i64, 0i64, 0i64);
    for p in points {
        let (x, y) = (p.x as i64, p.y as i64);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let n_i = n as i64;
    let slope_den = n_i * sxx - sx * sx;
    if slope_den == 0 {
        return LineFitResult::vertical(points[0].x as f64, n);
    }
    let b = (sxy * n_i - sx * sy) as f64 / slope_den as f64;
    let a = (sxy * sx - sxx * sy) as f64 / (sx * sx - n_i * sxx) as f64;
    LineFitResult::from_slope(a, b, n)
}

/// Same fit over real-valued points.
pub fn line_fit_points(points: &[(f64, f64)]) -> LineFitResult {
    let n = points.len();
    if n < 2 {
        return LineFitResult::sentinel(n);
    }
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n as f64;
    let slope_den = nf * sxx - sx * sx;
    if slope_den.abs() <= 1e-12 * (nf * sxx).max(1.0) {
        return LineFitResult::vertical(sx / nf, n);
    }
    let b = (sxy * nf - sx * sy) / slope_den;
    let a = (sxy * sx - sxx * sy) / (sx * sx - nf * sxx);
    LineFitResult::from_slope(a, b, n)
}

/// 48 features from a 4×4 segmentation of the skeleton: intercepts (0–15),
/// then `f1` (16–31), then `f2` (32–47), each row-major. Coordinates are local
/// to the segment's top-left corner.
pub fn line_fitting_features(sk: &Skeleton, grid: SegmentGrid) -> Result<FeatureVector> {
    let img = sk.image();
    img.require_canvas()?;
    grid.check_canvas()?;
    let cells = grid.cells();
    if 3 * cells != Family::LineFit.len() {
        return Err(Error::InvalidConfig(format!(
            "line-fit features need a 4x4 grid, got {}x{}",
            grid.rows, grid.cols
        )));
    }
    let mut per_cell: Vec<Vec<Point>> = vec![Vec::new(); cells];
    for p in img.foreground() {
        per_cell[grid.cell_of(p)].push(grid.local(p));
    }
    let mut out = FeatureVector::zeros(Family::LineFit);
    let values = out.values_mut();
    for (cell, points) in per_cell.iter().enumerate() {
        let fit = line_fit_segment(points);
        values[cell] = fit.a;
        values[cells + cell] = fit.f1;
        values[2 * cells + cell] = fit.f2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::BinaryImage;

    fn pts(v: &[(usize, usize)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn skeleton(points: impl IntoIterator<Item = (usize, usize)>) -> Skeleton {
        let img =
            BinaryImage::from_points(100, 100, points.into_iter().map(|(x, y)| Point::new(x, y)));
        Skeleton::from_image(img).unwrap()
    }

    #[test]
    fn horizontal_points() {
        let r = line_fit_segment(&pts(&[(0, 10), (5, 10), (12, 10)]));
        assert_eq!((r.a, r.f1, r.f2, r.n), (10.0, 0.0, 1.0, 3));
    }

    #[test]
    fn diagonal_points() {
        let r = line_fit_segment(&pts(&[(0, 0), (7, 7), (13, 13)]));
        assert_eq!((r.a, r.f1, r.f2), (0.0, 1.0, 0.0));
    }

    #[test]
    fn vertical_points() {
        let r = line_fit_segment(&pts(&[(6, 0), (6, 9), (6, 20)]));
        assert_eq!((r.a, r.f1, r.f2), (6.0, 0.0, -1.0));
    }

    #[test]
    fn empty_and_singleton_are_sentinels() {
        assert_eq!(line_fit_segment(&[]), LineFitResult::sentinel(0));
        assert_eq!(
            line_fit_segment(&pts(&[(3, 4)])),
            LineFitResult::sentinel(1)
        );
    }

    #[test]
    fn integer_and_real_paths_agree() {
        let p = pts(&[(0, 3), (2, 4), (5, 9), (9, 10), (11, 17)]);
        let r: Vec<(f64, f64)> = p.iter().map(|p| (p.x as f64, p.y as f64)).collect();
        let (a, b) = (line_fit_segment(&p), line_fit_points(&r));
        assert!((a.a - b.a).abs() < 1e-12);
        assert!((a.f1 - b.f1).abs() < 1e-12);
        assert!((a.f2 - b.f2).abs() < 1e-12);
    }

    #[test]
    fn empty_skeleton_gives_zeros() {
        let f = line_fitting_features(&skeleton([]), SegmentGrid::SKELETON).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn horizontal_line_fills_row_two() {
        let f = line_fitting_features(&skeleton((0..100).map(|x| (x, 50))), SegmentGrid::SKELETON)
            .unwrap();
        let v = f.values();
        for cell in 0..16 {
            if cell / 4 == 2 {
                assert_eq!((v[cell], v[16 + cell], v[32 + cell]), (0.0, 0.0, 1.0));
            } else {
                assert_eq!((v[cell], v[16 + cell], v[32 + cell]), (0.0, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn main_diagonal_hits_diagonal_cells() {
        let f = line_fitting_features(&skeleton((0..100).map(|i| (i, i))), SegmentGrid::SKELETON)
            .unwrap();
        let v = f.values();
        for cell in 0..16 {
            let expected = if cell % 5 == 0 {
                (0.0, 1.0, 0.0)
            } else {
                (0.0, 0.0, 0.0)
            };
            assert_eq!(
                (v[cell], v[16 + cell], v[32 + cell]),
                expected,
                "cell {cell}"
            );
        }
    }
}
