use super::{Family, FeatureVector, SegmentGrid};
use crate::error::{Error, Result};
use crate::imaging::{ContourChain, CANVAS_SIZE};

/// Per-block Freeman direction counts. Each step is charged to the block of
/// its source pixel; index = `8 * block + code` with blocks row-major.
pub fn chain_code_histogram(chains: &[ContourChain], grid: SegmentGrid) -> Result<FeatureVector> {
    grid.check_canvas()?;
    if grid.cells() * 8 != Family::ChainCode.len() {
        return Err(Error::InvalidConfig(format!(
            "chain-code histogram needs a 5x5 grid, got {}x{}",
            grid.rows, grid.cols
        )));
    }
    let mut out = FeatureVector::zeros(Family::ChainCode);
    for chain in chains {
        for (src, dir) in chain.steps() {
            if src.x >= CANVAS_SIZE || src.y >= CANVAS_SIZE {
                return Err(Error::InvalidImage(format!(
                    "chain leaves the canvas at {src:?}"
                )));
            }
            out.values_mut()[8 * grid.cell_of(src) + dir.code() as usize] += 1.0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{trace_chain_codes, BinaryImage, Direction, Point};

    fn hollow_square(x0: usize, y0: usize, side: usize) -> BinaryImage {
        let mut img = BinaryImage::new(100, 100);
        for i in 0..side {
            img.set(x0 + i, y0, true);
            img.set(x0 + i, y0 + side - 1, true);
            img.set(x0, y0 + i, true);
            img.set(x0 + side - 1, y0 + i, true);
        }
        img
    }

    #[test]
    fn no_chains_no_counts() {
        let f = chain_code_histogram(&[], SegmentGrid::CONTOUR).unwrap();
        assert_eq!(f.values().len(), 200);
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn total_equals_chain_length() {
        let chains = trace_chain_codes(&hollow_square(3, 7, 30));
        assert_eq!(chains.len(), 1);
        let f = chain_code_histogram(&chains, SegmentGrid::CONTOUR).unwrap();
        assert_eq!(f.values().iter().sum::<f64>(), chains[0].codes.len() as f64);
    }

    #[test]
    fn centered_square_lands_in_middle_block() {
        let chains = trace_chain_codes(&hollow_square(45, 45, 10));
        assert_eq!(chains.len(), 1);
        assert!(chains[0].closed);
        let f = chain_code_histogram(&chains, SegmentGrid::CONTOUR).unwrap();
        let block = 2 * 5 + 2;
        let mut expected = vec![0.0; 200];
        for d in [
            Direction::East,
            Direction::South,
            Direction::West,
            Direction::North,
        ] {
            expected[8 * block + d.code() as usize] = 9.0;
        }
        assert_eq!(f.values(), expected.as_slice());
    }

    #[test]
    fn steps_are_charged_to_source_block() {
        // One step east across the block boundary at x = 20.
        let chain = ContourChain {
            start: Point::new(19, 0),
            codes: vec![Direction::East],
            closed: false,
        };
        let f = chain_code_histogram(&[chain], SegmentGrid::CONTOUR).unwrap();
        assert_eq!(f.values()[0], 1.0);
        assert_eq!(f.values()[8], 0.0);
    }

    #[test]
    fn wrong_grid_is_rejected() {
        assert!(chain_code_histogram(&[], SegmentGrid::SKELETON).is_err());
    }
}
