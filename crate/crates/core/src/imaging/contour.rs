use serde::{Deserialize, Serialize};

use super::{BinaryImage, Point, NEIGHBORS8};

/// Freeman direction codes. Codes grow counterclockwise in 45° steps from east;
/// `y` points down, so `North` moves to the row above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Direction {
    East = 0,
    NorthEast = 1,
    North = 2,
    NorthWest = 3,
    West = 4,
    SouthWest = 5,
    South = 6,
    SouthEast = 7,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::East,
        Direction::NorthEast,
        Direction::North,
        Direction::NorthWest,
        Direction::West,
        Direction::SouthWest,
        Direction::South,
        Direction::SouthEast,
    ];

    pub fn from_code(code: u8) -> Option<Direction> {
        Direction::ALL.get(code as usize).copied()
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn offset(self) -> (i64, i64) {
        NEIGHBORS8[self as usize]
    }

    pub fn opposite(self) -> Direction {
        Direction::ALL[(self as usize + 4) % 8]
    }

    /// One 45° step clockwise (as seen on screen).
    pub fn clockwise(self) -> Direction {
        Direction::ALL[(self as usize + 7) % 8]
    }

    /// Applies this step to `p`, or `None` if it would leave a `width`×`height` image.
    pub fn step(self, p: Point, width: usize, height: usize) -> Option<Point> {
        let (dx, dy) = self.offset();
        let (x, y) = (p.x as i64 + dx, p.y as i64 + dy);
        (x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
            .then(|| Point::new(x as usize, y as usize))
    }
}

/// One traced contour: a start pixel and the Freeman steps that follow it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourChain {
    pub start: Point,
    pub codes: Vec<Direction>,
    /// The final step returns to `start`.
    pub closed: bool,
}

impl ContourChain {
    /// Every pixel the chain visits, beginning with `start`. A closed chain
    /// ends with `start` again.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.codes.len() + 1);
        let mut p = self.start;
        out.push(p);
        for d in &self.codes {
            let (dx, dy) = d.offset();
            p = Point::new((p.x as i64 + dx) as usize, (p.y as i64 + dy) as usize);
            out.push(p);
        }
        out
    }

    /// `(source pixel, direction)` for each step.
    pub fn steps(&self) -> impl Iterator<Item = (Point, Direction)> + '_ {
        let points = self.points();
        self.codes
            .iter()
            .enumerate()
            .map(move |(i, &d)| (points[i], d))
    }

    /// Distinct pixels covered by the chain.
    pub fn pixel_count(&self) -> usize {
        if self.closed {
            self.codes.len().max(1)
        } else {
            self.codes.len() + 1
        }
    }
}

/// Marks ink pixels that have at least one background 4-neighbor. Pixels off
/// the image count as background.
pub fn extract_contour_mask(img: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::new(img.width(), img.height());
    for p in img.foreground() {
        let (x, y) = (p.x as i64, p.y as i64);
        let edge = [(1, 0), (0, -1), (-1, 0), (0, 1)]
            .iter()
            .any(|(dx, dy)| !img.get_signed(x + dx, y + dy));
        if edge {
            out.set(p.x, p.y, true);
        }
    }
    out
}

/// Chain-codes every pixel of a contour mask.
///
/// Chains start at the top-most, then left-most, untraced pixel and walk
/// clockwise: from each pixel the neighbors are scanned clockwise starting just
/// past the direction the walk came from, and the first untraced mask pixel is
/// taken. At a start pixel the scan begins at east, code 0. When no untraced
/// neighbor remains the chain closes if it has at least three pixels and its
/// start is adjacent; otherwise it ends open. Pixels a walk could not reach
/// seed further chains, so every mask pixel lies on exactly one chain.
pub fn trace_chain_codes(mask: &BinaryImage) -> Vec<ContourChain> {
    let (w, h) = (mask.width(), mask.height());
    let mut traced = BinaryImage::new(w, h);
    let mut chains = Vec::new();

    for start in mask.foreground() {
        if traced.get(start.x, start.y) {
            continue;
        }
        traced.set(start.x, start.y, true);
        let mut codes = Vec::new();
        let mut current = start;
        // Pretend we arrived heading east so the first scan starts at east.
        let mut back = Direction::West;
        let mut closed = false;

        loop {
            let mut dir = back;
            let next = (0..7).find_map(|_| {
                dir = dir.clockwise();
                dir.step(current, w, h)
                    .filter(|q| mask.get(q.x, q.y) && !traced.get(q.x, q.y))
                    .map(|q| (dir, q))
            });
            match next {
                Some((d, q)) => {
                    codes.push(d);
                    traced.set(q.x, q.y, true);
                    current = q;
                    back = d.opposite();
                }
                None => {
                    if codes.len() >= 2 {
                        if let Some(home) = Direction::ALL
                            .iter()
                            .find(|d| d.step(current, w, h) == Some(start))
                        {
                            codes.push(*home);
                            closed = true;
                        }
                    } else if codes.is_empty() {
                        closed = true;
                    }
                    break;
                }
            }
        }
        chains.push(ContourChain {
            start,
            codes,
            closed,
        });
    }
    chains
}
