use super::{BinaryImage, Point, NEIGHBORS8};
use crate::error::{Error, Result};

/// A one-pixel-wide thinned character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    image: BinaryImage,
}

impl Skeleton {
    /// Wraps an image that is already thin. Fails if any 2×2 window is
    /// entirely ink.
    pub fn from_image(image: BinaryImage) -> Result<Self> {
        if image.has_full_2x2_block() {
            return Err(Error::InvalidImage(
                "skeleton contains a 2x2 foreground block".into(),
            ));
        }
        Ok(Skeleton { image })
    }

    pub fn image(&self) -> &BinaryImage {
        &self.image
    }

    pub fn into_image(self) -> BinaryImage {
        self.image
    }
}

/// Thins `img` to a one-pixel-wide skeleton.
///
/// Zhang–Suen passes run first, with every scheduled deletion re-checked
/// sequentially so that only simple, non-end pixels are removed. A redundant
/// pixel pass then drops any remaining simple pixel with at least two ink
/// neighbors (staircase corners and leftover 2×2 blocks). Blocks where every
/// pixel is a cut point get a one-pixel shift that keeps the component count.
/// The three stages repeat until none of them changes the image, so the result
/// is a fixed point and re-thinning is a no-op.
pub fn thin_to_skeleton(img: &BinaryImage) -> Skeleton {
    let mut work = img.clone();
    loop {
        let mut changed = false;
        while zhang_suen_pass(&mut work, SubIteration::First)
            | zhang_suen_pass(&mut work, SubIteration::Second)
        {
            changed = true;
        }
        while remove_redundant(&mut work) {
            changed = true;
        }
        if resolve_blocks(&mut work) {
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Skeleton { image: work }
}

#[derive(Clone, Copy)]
enum SubIteration {
    First,
    Second,
}

/// The 8 neighbors in Freeman order (E, NE, N, NW, W, SW, S, SE).
fn ring(img: &BinaryImage, x: usize, y: usize) -> [bool; 8] {
    let mut out = [false; 8];
    for (slot, (dx, dy)) in out.iter_mut().zip(NEIGHBORS8) {
        *slot = img.get_signed(x as i64 + dx, y as i64 + dy);
    }
    out
}

/// Yokoi 8-connectivity number; a border pixel is simple iff this is 1.
fn connectivity_number(n: &[bool; 8]) -> u32 {
    let c = |i: usize| u32::from(!n[i % 8]);
    [0, 2, 4, 6]
        .iter()
        .map(|&k| c(k) - c(k) * c(k + 1) * c(k + 2))
        .sum()
}

fn deletable(img: &BinaryImage, x: usize, y: usize) -> bool {
    let n = ring(img, x, y);
    n.iter().filter(|&&b| b).count() >= 2 && connectivity_number(&n) == 1
}

fn zhang_suen_pass(img: &mut BinaryImage, step: SubIteration) -> bool {
    let mut candidates = Vec::new();
    for p in img.foreground() {
        let n = ring(img, p.x, p.y);
        // Classic naming: P2 = N, then clockwise to P9 = NW.
        let (p2, p3, p4, p5, p6, p7, p8, p9) = (n[2], n[1], n[0], n[7], n[6], n[5], n[4], n[3]);
        let seq = [p2, p3, p4, p5, p6, p7, p8, p9, p2];
        let b = n.iter().filter(|&&v| v).count();
        let a = seq.windows(2).filter(|w| !w[0] && w[1]).count();
        if !(2..=6).contains(&b) || a != 1 {
            continue;
        }
        let ok = match step {
            SubIteration::First => !(p2 && p4 && p6) && !(p4 && p6 && p8),
            SubIteration::Second => !(p2 && p4 && p8) && !(p2 && p6 && p8),
        };
        if ok {
            candidates.push(p);
        }
    }
    let mut changed = false;
    for p in candidates {
        if deletable(img, p.x, p.y) {
            img.set(p.x, p.y, false);
            changed = true;
        }
    }
    changed
}

fn remove_redundant(img: &mut BinaryImage) -> bool {
    let mut changed = false;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) && deletable(img, x, y) {
                img.set(x, y, false);
                changed = true;
            }
        }
    }
    changed
}

/// Breaks 2×2 blocks whose four pixels are all local cut points.
fn resolve_blocks(img: &mut BinaryImage) -> bool {
    let mut changed = false;
    loop {
        let blocks: Vec<Point> = img.full_2x2_blocks().collect();
        if blocks.is_empty() {
            return changed;
        }
        let components = img.component_count();
        let fixed = blocks
            .iter()
            .any(|&corner| break_block(img, corner, components));
        if !fixed {
            return changed;
        }
        changed = true;
    }
}

fn break_block(img: &mut BinaryImage, corner: Point, components: usize) -> bool {
    let (x, y) = (corner.x as i64, corner.y as i64);
    // Each block pixel with the two outward 4-neighbors flanking its outer diagonal.
    let members = [
        ((x, y), [(x - 1, y), (x, y - 1)]),
        ((x + 1, y), [(x + 2, y), (x + 1, y - 1)]),
        ((x, y + 1), [(x - 1, y + 1), (x, y + 2)]),
        ((x + 1, y + 1), [(x + 2, y + 1), (x + 1, y + 2)]),
    ];

    for &((px, py), flanks) in &members {
        for (qx, qy) in flanks {
            if qx < 0 || qy < 0 || qx as usize >= img.width() || qy as usize >= img.height() {
                continue;
            }
            let (q, p) = (
                Point::new(qx as usize, qy as usize),
                Point::new(px as usize, py as usize),
            );
            if img.get(q.x, q.y) {
                continue;
            }
            img.set(p.x, p.y, false);
            img.set(q.x, q.y, true);
            if !touches_block(img, q) && img.component_count() == components {
                return true;
            }
            img.set(q.x, q.y, false);
            img.set(p.x, p.y, true);
        }
    }

    for &((px, py), _) in &members {
        let p = Point::new(px as usize, py as usize);
        img.set(p.x, p.y, false);
        if img.component_count() == components {
            return true;
        }
        img.set(p.x, p.y, true);
    }
    false
}

fn touches_block(img: &BinaryImage, q: Point) -> bool {
    let (x, y) = (q.x as i64, q.y as i64);
    [(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)]
        .iter()
        .any(|&(cx, cy)| {
            img.get_signed(cx, cy)
                && img.get_signed(cx + 1, cy)
                && img.get_signed(cx, cy + 1)
                && img.get_signed(cx + 1, cy + 1)
        })
}
