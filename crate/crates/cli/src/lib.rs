//! `glyph` command line: feature extraction, training, evaluation and prediction.

mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use glyph_core::dataset::{
    cross_validate, evaluate_dataset, load_dataset, train_ensemble, Protocol, TrainingOptions,
};
use glyph_core::ensemble::rank_top_k;
use glyph_core::features::csv::{write_features, FeatureRecord};
use glyph_core::features::{run_pipeline, Family};
use glyph_core::imaging::io::{read_gray, write_binary_pgm};
use glyph_core::{EnsembleModel, Error, FusionMode};

pub use config::ConfigFile;

/// Set to `1` to write every preprocessing stage as PGM into `glyph-debug/`.
pub const DEBUG_DUMP_VAR: &str = "GLYPH_DEBUG_DUMP";
pub const DEBUG_DUMP_DIR: &str = "glyph-debug";
/// Seed stream of the ensemble trained on all data after cross-validation.
const FINAL_STREAM: u64 = 1 << 20;

#[derive(Debug, Parser)]
#[command(
    name = "glyph",
    version,
    about = "Handwritten character recognition with a fused MLP ensemble"
)]
struct Cli {
    /// Flat key = value settings file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the feature CSV of a dataset.
    Extract {
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Train the four classifiers and write models, manifest and report.
    Train {
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// 3fold or holdout.
        #[arg(long)]
        protocol: Option<String>,
        /// Fusion used for the training report: vote or confsum.
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Evaluate a trained ensemble on a dataset.
    Eval {
        #[arg(long, value_name = "DIR")]
        models: PathBuf,
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        /// vote or confsum.
        #[arg(long)]
        mode: Option<String>,
        /// Also write the report as JSON.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Classify one image and print the best classes.
    Predict {
        #[arg(long, value_name = "DIR")]
        models: PathBuf,
        image: PathBuf,
        #[arg(long)]
        top: Option<usize>,
        /// vote or confsum.
        #[arg(long)]
        mode: Option<String>,
    },
}

#[derive(Debug, Args)]
struct LoadArgs {
    /// Skip images that cannot be decoded instead of failing.
    #[arg(long)]
    skip_unreadable: bool,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or values: exit 2.
    Usage(String),
    /// Data or model problems: exit 1.
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(msg) => CliError::Usage(msg),
            other => CliError::Data(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

/// Resolved settings: flags over config file over defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub training: TrainingOptions,
    pub protocol: Protocol,
    pub mode: FusionMode,
    pub top: usize,
    pub skip_unreadable: bool,
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, CliError> {
    s.parse::<T>().map_err(CliError::from)
}

impl RunConfig {
    fn resolve(
        file: &ConfigFile,
        seed: Option<u64>,
        epochs: Option<usize>,
        protocol: Option<&str>,
        mode: Option<&str>,
        top: Option<usize>,
        skip_unreadable: bool,
    ) -> Result<Self, CliError> {
        let mut t = TrainingOptions::default();
        t.seed = seed
            .or(file.get("seed").map_err(CliError::Usage)?)
            .unwrap_or(t.seed);
        t.max_epochs = epochs
            .or(file.get("epochs").map_err(CliError::Usage)?)
            .unwrap_or(t.max_epochs);
        t.learning_rate = file
            .get("learning_rate")
            .map_err(CliError::Usage)?
            .unwrap_or(t.learning_rate);
        t.momentum = file
            .get("momentum")
            .map_err(CliError::Usage)?
            .unwrap_or(t.momentum);
        t.target_sse = file
            .get("target_sse")
            .map_err(CliError::Usage)?
            .unwrap_or(t.target_sse);
        for f in Family::ALL {
            if let Some(h) = file
                .get(&ConfigFile::hidden_key(f))
                .map_err(CliError::Usage)?
            {
                t.hidden_sizes[f.index()] = h;
            }
        }

        let protocol_name = match protocol {
            Some(p) => Some(p.to_string()),
            None => file.get::<String>("protocol").map_err(CliError::Usage)?,
        };
        let mut protocol = protocol_name
            .as_deref()
            .map(parse_with::<Protocol>)
            .transpose()?
            .unwrap_or(Protocol::ThreeFold);
        if let Protocol::Holdout { train_fraction } = &mut protocol {
            if let Some(f) = file.get("holdout_fraction").map_err(CliError::Usage)? {
                *train_fraction = f;
            }
        }
        let mode_name = match mode {
            Some(m) => Some(m.to_string()),
            None => file.get::<String>("mode").map_err(CliError::Usage)?,
        };
        // Top-k reporting defaults to confidence sums; binary votes leave at most four nonzero scores.
        let mode = mode_name
            .as_deref()
            .map(parse_with::<FusionMode>)
            .transpose()?
            .unwrap_or(FusionMode::ConfidenceSum);
        let top = top
            .or(file.get("top").map_err(CliError::Usage)?)
            .unwrap_or(5);
        let skip_unreadable = skip_unreadable
            || file
                .get("skip_unreadable")
                .map_err(CliError::Usage)?
                .unwrap_or(false);

        // Surface invalid hyperparameters as usage errors before any work starts.
        for f in Family::ALL {
            let mut c = glyph_core::MlpConfig::new(f.len(), t.hidden_sizes[f.index()], 2);
            c.learning_rate = t.learning_rate;
            c.momentum = t.momentum;
            c.target_sse = t.target_sse;
            c.max_epochs = t.max_epochs;
            c.validate()?;
        }
        Ok(RunConfig {
            training: t,
            protocol,
            mode,
            top,
            skip_unreadable,
        })
    }
}

fn debug_dump_enabled() -> bool {
    std::env::var(DEBUG_DUMP_VAR).is_ok_and(|v| v == "1")
}

fn dump_stages(image: &Path, tag: &str) -> Result<(), CliError> {
    let stages = run_pipeline(&read_gray(image)?)?;
    let dir = Path::new(DEBUG_DUMP_DIR);
    fs::create_dir_all(dir)?;
    let tag = tag.replace(['/', '\\'], "_");
    for (name, img) in [
        ("binary", &stages.binary),
        ("scaled", &stages.scaled),
        ("cleaned", &stages.cleaned),
        ("contour", &stages.contour),
        ("skeleton", stages.skeleton.image()),
    ] {
        write_binary_pgm(&dir.join(format!("{tag}-{name}.pgm")), img)?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)?;
    Ok(())
}

fn extract(data: &Path, out: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let ds = load_dataset(data, cfg.skip_unreadable)?;
    if debug_dump_enabled() {
        for s in &ds.samples {
            dump_stages(
                &s.path,
                &Path::new(&s.id).with_extension("").to_string_lossy(),
            )?;
        }
    }
    let records: Vec<FeatureRecord> = ds
        .samples
        .iter()
        .map(|s| FeatureRecord {
            sample_id: s.id.clone(),
            label: ds.labels[s.label].clone(),
            features: s.features.clone().expect("extracted"),
        })
        .collect();
    let mut w = BufWriter::new(File::create(out)?);
    write_features(&mut w, &records)?;
    w.flush()?;
    println!("wrote {} samples to {}", records.len(), out.display());
    Ok(())
}

fn train(data: &Path, out: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let ds = load_dataset(data, cfg.skip_unreadable)?;
    let cv = cross_validate(&ds, cfg.protocol, &cfg.training, cfg.mode)?;
    let mut ensemble = match cfg.protocol {
        Protocol::ThreeFold => {
            let all: Vec<usize> = (0..ds.len()).collect();
            train_ensemble(&ds, &all, &cfg.training, FINAL_STREAM)?.0
        }
        Protocol::Holdout { .. } => cv.ensembles.into_iter().next().expect("one split"),
    };
    ensemble.mode = cfg.mode;
    ensemble.save(out)?;
    let text = cv.report.to_text();
    write_text(&out.join("report.txt"), &text)?;
    write_text(&out.join("report.json"), &cv.report.to_json()?)?;
    println!("protocol: {}", cfg.protocol);
    print!("{text}");
    println!("models written to {}", out.display());
    Ok(())
}

fn eval(models: &Path, data: &Path, json: Option<&Path>, cfg: &RunConfig) -> Result<(), CliError> {
    let ensemble = EnsembleModel::load(models)?;
    let ds = load_dataset(data, cfg.skip_unreadable)?;
    let report = evaluate_dataset(&ensemble, &ds, cfg.mode)?;
    if let Some(path) = json {
        write_text(path, &report.to_json()?)?;
    }
    print!("{}", report.to_text());
    Ok(())
}

fn predict(models: &Path, image: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let ensemble = EnsembleModel::load(models)?;
    if debug_dump_enabled() {
        dump_stages(
            image,
            &image
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        )?;
    }
    let decision = ensemble.classify_image(&read_gray(image)?, cfg.mode)?;
    let k = cfg.top.min(ensemble.class_count());
    for (rank, class) in rank_top_k(&decision, k)?.into_iter().enumerate() {
        println!(
            "{} {} {:.6}",
            rank + 1,
            ensemble.labels[class],
            decision.scores[class]
        );
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path).map_err(CliError::Usage)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Extract { data, out, load } => {
            let cfg =
                RunConfig::resolve(&file, None, None, None, None, None, load.skip_unreadable)?;
            extract(&data, &out, &cfg)
        }
        Command::Train {
            data,
            out,
            seed,
            epochs,
            protocol,
            mode,
            load,
        } => {
            let cfg = RunConfig::resolve(
                &file,
                seed,
                epochs,
                protocol.as_deref(),
                mode.as_deref(),
                None,
                load.skip_unreadable,
            )?;
            train(&data, &out, &cfg)
        }
        Command::Eval {
            models,
            data,
            mode,
            json,
            load,
        } => {
            let cfg = RunConfig::resolve(
                &file,
                None,
                None,
                None,
                mode.as_deref(),
                None,
                load.skip_unreadable,
            )?;
            eval(&models, &data, json.as_deref(), &cfg)
        }
        Command::Predict {
            models,
            image,
            top,
            mode,
        } => {
            let cfg = RunConfig::resolve(&file, None, None, None, mode.as_deref(), top, false)?;
            if cfg.top == 0 {
                return Err(CliError::Usage("--top must be at least 1".into()));
            }
            predict(&models, &image, &cfg)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file =
            ConfigFile::parse("seed = 5\nepochs = 30\nmode = vote\nhidden.shadow = 9").unwrap();
        let cfg = RunConfig::resolve(&file, Some(8), None, None, None, None, false).unwrap();
        assert_eq!(cfg.training.seed, 8);
        assert_eq!(cfg.training.max_epochs, 30);
        assert_eq!(cfg.mode, FusionMode::Vote);
        assert_eq!(cfg.training.hidden_sizes, [70, 20, 9, 40]);
        let cfg = RunConfig::resolve(&ConfigFile::default(), None, None, None, None, None, false)
            .unwrap();
        assert_eq!(cfg.training, TrainingOptions::default());
        assert_eq!(cfg.mode, FusionMode::ConfidenceSum);
        assert_eq!(cfg.protocol, Protocol::ThreeFold);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let file = ConfigFile::parse("learning_rate = -1").unwrap();
        let err = RunConfig::resolve(&file, None, None, None, None, None, false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = RunConfig::resolve(
            &ConfigFile::default(),
            None,
            None,
            Some("5fold"),
            None,
            None,
            false,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn holdout_fraction_from_file() {
        let file = ConfigFile::parse("protocol = holdout\nholdout_fraction = 0.5").unwrap();
        let cfg = RunConfig::resolve(&file, None, None, None, None, None, false).unwrap();
        assert_eq!(
            cfg.protocol,
            Protocol::Holdout {
                train_fraction: 0.5
            }
        );
    }
}
