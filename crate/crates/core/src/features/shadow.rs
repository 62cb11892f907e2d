use super::{Family, FeatureVector};
use crate::error::Result;
use crate::imaging::{BinaryImage, CANVAS_SIZE};

const HALF: usize = CANVAS_SIZE / 2;

/// Octants of a pixel center. Both diagonals, the vertical midline and the
/// horizontal midline cut the canvas into 8 triangles, numbered clockwise from
/// the upper-left triangle touching the top edge. Centers never land on a
/// midline; a center on a diagonal lies in both triangles sharing that edge.
fn octants_of(x: usize, y: usize) -> (usize, Option<usize>) {
    // Doubled offsets from the canvas center; always odd, never zero.
    let u = 2 * x as i64 + 1 - CANVAS_SIZE as i64;
    let v = 2 * y as i64 + 1 - CANVAS_SIZE as i64;
    let (au, av) = (u.abs(), v.abs());
    // (octant nearer the horizontal edge, octant nearer the vertical edge)
    let (edge_h, edge_v) = match (u < 0, v < 0) {
        (true, true) => (0, 7),
        (false, true) => (1, 2),
        (false, false) => (4, 3),
        (true, false) => (5, 6),
    };
    match av.cmp(&au) {
        std::cmp::Ordering::Greater => (edge_h, None),
        std::cmp::Ordering::Less => (edge_v, None),
        std::cmp::Ordering::Equal => (edge_h, Some(edge_v)),
    }
}

/// 16 shadow features: for each octant, the fraction of its canvas half-edge
/// and of its half-midline covered by the perpendicular projection of the
/// octant's ink. Layout is `[octant 0 edge, octant 0 midline, octant 1 edge, ...]`.
pub fn shadow_features(img: &BinaryImage) -> Result<FeatureVector> {
    img.require_canvas()?;
    // covered[octant][side][coordinate]
    let mut covered = [[[false; CANVAS_SIZE]; 2]; 8];
    for p in img.foreground() {
        let (a, b) = octants_of(p.x, p.y);
        for octant in std::iter::once(a).chain(b) {
            // Octants touching the top or bottom edge project columns onto that
            // edge and rows onto the vertical midline; the others the reverse.
            let (edge_coord, mid_coord) = if matches!(octant, 0 | 1 | 4 | 5) {
                (p.x, p.y)
            } else {
                (p.y, p.x)
            };
            covered[octant][0][edge_coord] = true;
            covered[octant][1][mid_coord] = true;
        }
    }
    let mut out = FeatureVector::zeros(Family::Shadow);
    for (octant, sides) in covered.iter().enumerate() {
        for (side, marks) in sides.iter().enumerate() {
            let n = marks.iter().filter(|&&m| m).count();
            out.values_mut()[2 * octant + side] = n as f64 / HALF as f64;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Point;

    /// Octant triangles as vertex lists, clockwise from the upper-left one.
    fn triangles() -> [[(f64, f64); 3]; 8] {
        let c = (50.0, 50.0);
        [
            [(0.0, 0.0), (50.0, 0.0), c],
            [(50.0, 0.0), (100.0, 0.0), c],
            [(100.0, 0.0), (100.0, 50.0), c],
            [(100.0, 50.0), (100.0, 100.0), c],
            [(100.0, 100.0), (50.0, 100.0), c],
            [(50.0, 100.0), (0.0, 100.0), c],
            [(0.0, 100.0), (0.0, 50.0), c],
            [(0.0, 50.0), (0.0, 0.0), c],
        ]
    }

    fn inside(t: &[(f64, f64); 3], (px, py): (f64, f64)) -> bool {
        let cross =
            |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (py - a.1) - (b.1 - a.1) * (px - a.0);
        let d = [cross(t[0], t[1]), cross(t[1], t[2]), cross(t[2], t[0])];
        d.iter().all(|&v| v >= 0.0) || d.iter().all(|&v| v <= 0.0)
    }

    /// Brute-force reference: sample each ink pixel on a 5×5 sub-grid, assign
    /// samples to closed triangles, and project the pixel onto the first two
    /// triangle vertices' edge (the canvas side) and onto the midline side.
    fn oracle(img: &BinaryImage) -> Vec<f64> {
        let tris = triangles();
        let mut covered = vec![
            [
                std::collections::BTreeSet::new(),
                std::collections::BTreeSet::new()
            ];
            8
        ];
        for p in img.foreground() {
            for sy in 0..5 {
                for sx in 0..5 {
                    let s = (
                        p.x as f64 + 0.1 + 0.2 * sx as f64,
                        p.y as f64 + 0.1 + 0.2 * sy as f64,
                    );
                    for (k, t) in tris.iter().enumerate() {
                        if inside(t, s) {
                            let edge_horizontal = t[0].1 == t[1].1;
                            let (edge, mid) = if edge_horizontal {
                                (p.x, p.y)
                            } else {
                                (p.y, p.x)
                            };
                            covered[k][0].insert(edge);
                            covered[k][1].insert(mid);
                        }
                    }
                }
            }
        }
        covered
            .iter()
            .flat_map(|s| [s[0].len() as f64 / 50.0, s[1].len() as f64 / 50.0])
            .collect()
    }

    #[test]
    fn empty_canvas_is_all_zero() {
        let f = shadow_features(&BinaryImage::new(100, 100)).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_canvas_saturates() {
        let img = BinaryImage::from_pixels(100, 100, vec![true; 10_000]).unwrap();
        let f = shadow_features(&img).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0), "{:?}", f.values());
    }

    #[test]
    fn single_interior_pixel_touches_one_octant() {
        let img = BinaryImage::from_points(100, 100, [Point::new(10, 30)]);
        let f = shadow_features(&img).unwrap();
        let nonzero: Vec<(usize, f64)> = f
            .values()
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, v)| *v != 0.0)
            .collect();
        assert_eq!(nonzero, vec![(14, 0.02), (15, 0.02)]);
        assert_eq!(f.values(), oracle(&img).as_slice());
    }

    #[test]
    fn every_single_pixel_matches_oracle() {
        for y in (0..100).step_by(7) {
            for x in 0..100 {
                let img = BinaryImage::from_points(100, 100, [Point::new(x, y)]);
                assert_eq!(
                    shadow_features(&img).unwrap().values(),
                    oracle(&img).as_slice(),
                    "pixel ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn diagonal_pixel_feeds_both_neighbors() {
        let img = BinaryImage::from_points(100, 100, [Point::new(20, 20)]);
        let f = shadow_features(&img).unwrap();
        let nonzero = f.values().iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, 4);
        assert_eq!(f.values(), oracle(&img).as_slice());
    }

    #[test]
    fn rejects_non_canvas_input() {
        assert!(shadow_features(&BinaryImage::new(50, 50)).is_err());
    }
}
