//! Runs 3-fold cross-validation on an in-memory synthetic corpus and prints
//! the report: `synth_benchmark [PER_CLASS] [EPOCHS] [SEED]`.

use std::time::Instant;

use glyph_core::dataset::{cross_validate, Protocol, TrainingOptions};
use glyph_core::synth::{in_memory_dataset, SynthParams};
use glyph_core::FusionMode;

fn main() -> glyph_core::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("numeric argument"));
    let per_class = args.next().unwrap_or(60) as usize;
    let opts = TrainingOptions {
        max_epochs: args.next().unwrap_or(200) as usize,
        seed: args.next().unwrap_or(0),
        ..TrainingOptions::default()
    };
    let start = Instant::now();
    let ds = in_memory_dataset(per_class, opts.seed, &SynthParams::default())?;
    let extracted = start.elapsed();
    let cv = cross_validate(&ds, Protocol::ThreeFold, &opts, FusionMode::ConfidenceSum)?;
    print!("{}", cv.report.to_text());
    println!();
    println!(
        "extraction {:.2?}, total {:.2?}",
        extracted,
        start.elapsed()
    );
    Ok(())
}
