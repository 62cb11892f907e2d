//! Writes a synthetic glyph corpus: `synth_corpus DIR [PER_CLASS] [SEED]`.

use std::path::PathBuf;

use glyph_core::synth::{write_corpus, SynthParams};

fn main() -> glyph_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(dir) = args.next().map(PathBuf::from) else {
        eprintln!("usage: synth_corpus DIR [PER_CLASS] [SEED]");
        std::process::exit(2);
    };
    let per_class = args
        .next()
        .map_or(Ok(60), |s| s.parse())
        .expect("PER_CLASS must be a number");
    let seed = args
        .next()
        .map_or(Ok(0), |s| s.parse())
        .expect("SEED must be a number");
    let n = write_corpus(&dir, per_class, seed, &SynthParams::default())?;
    println!("wrote {n} images to {}", dir.display());
    Ok(())
}
