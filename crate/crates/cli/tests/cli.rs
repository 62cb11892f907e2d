use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use glyph_core::imaging::io::write_pgm;
use glyph_core::imaging::GrayImage;
use glyph_core::synth::{write_corpus, SynthParams};

fn glyph(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glyph"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GLYPH_DEBUG_DUMP")
        .output()
        .expect("run glyph")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small corpus plus a quickly trained ensemble under `root/models`.
fn trained(root: &Path) {
    write_corpus(&root.join("data"), 6, 3, &SynthParams::default()).unwrap();
    let o = glyph(
        &[
            "train", "--data", "data", "--out", "models", "--epochs", "15", "--seed", "4",
        ],
        root,
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn train_eval_predict() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    trained(root);
    for f in [
        "ensemble.json",
        "normalizer.json",
        "chain-code.json",
        "line-fit.json",
        "report.txt",
        "report.json",
    ] {
        assert!(root.join("models").join(f).is_file(), "{f}");
    }

    let o = glyph(
        &[
            "eval",
            "--models",
            "models",
            "--data",
            "data",
            "--json",
            "eval.json",
        ],
        root,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let keys: Vec<usize> = [
        "chain-code",
        "intersection",
        "shadow",
        "line-fit",
        "top-1",
        "top-2",
        "top-3",
        "top-4",
        "top-5",
        "union",
    ]
    .iter()
    .map(|k| {
        text.find(&format!("  {k} "))
            .unwrap_or_else(|| panic!("{k} missing"))
    })
    .collect();
    assert!(
        keys.windows(2).all(|w| w[0] < w[1]),
        "rows out of order:\n{text}"
    );
    assert!(text.contains("fusion mode: confsum"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("eval.json")).unwrap()).unwrap();
    let top: Vec<f64> = json["ensemble_top_k"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(top.windows(2).all(|w| w[0] <= w[1]));

    let o = glyph(
        &[
            "predict",
            "--models",
            "models",
            "--top",
            "3",
            "data/ring/0000.pgm",
        ],
        root,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("1 "));

    let vote = glyph(
        &[
            "eval", "--models", "models", "--data", "data", "--mode", "vote",
        ],
        root,
    );
    assert!(stdout(&vote).contains("fusion mode: vote"));
}

#[test]
fn predict_blank_image_reports_no_foreground() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    trained(root);
    write_pgm(
        &root.join("blank.pgm"),
        &GrayImage::filled(32, 32, 255).unwrap(),
    )
    .unwrap();
    let o = glyph(&["predict", "--models", "models", "blank.pgm"], root);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NoForeground"), "{}", stderr(&o));
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(&root.join("data"), 4, 1, &SynthParams::default()).unwrap();
    fs::write(
        root.join("glyph.conf"),
        "epochs = 8\nseed = 2\nprotocol = holdout\n",
    )
    .unwrap();
    for out in ["a", "b"] {
        let o = glyph(
            &[
                "--config",
                "glyph.conf",
                "train",
                "--data",
                "data",
                "--out",
                out,
            ],
            root,
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in [
        "ensemble.json",
        "normalizer.json",
        "chain-code.json",
        "intersection.json",
        "shadow.json",
        "line-fit.json",
        "report.json",
    ] {
        assert_eq!(
            fs::read(root.join("a").join(f)).unwrap(),
            fs::read(root.join("b").join(f)).unwrap(),
            "{f} differs"
        );
    }
    assert!(stdout(&glyph(
        &[
            "--config",
            "glyph.conf",
            "train",
            "--data",
            "data",
            "--out",
            "c"
        ],
        root
    ))
    .contains("protocol: holdout"));
}

#[test]
fn extract_writes_four_rows_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(&root.join("data"), 2, 0, &SynthParams::default()).unwrap();
    let o = glyph(
        &["extract", "--data", "data", "--out", "features.csv"],
        root,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(root.join("features.csv")).unwrap();
    assert!(csv.starts_with("sample_id,label,family,i0,"));
    assert_eq!(csv.lines().count(), 1 + 4 * 20);
    let back = glyph_core::features::csv::read_features(csv.as_bytes()).unwrap();
    assert_eq!(back.len(), 20);
}

#[test]
fn debug_dump_writes_stage_images() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(&root.join("data"), 1, 0, &SynthParams::default()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_glyph"))
        .args(["extract", "--data", "data", "--out", "f.csv"])
        .current_dir(root)
        .env("GLYPH_DEBUG_DUMP", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    for stage in ["binary", "scaled", "cleaned", "contour", "skeleton"] {
        assert!(
            root.join("glyph-debug")
                .join(format!("ring_0000-{stage}.pgm"))
                .is_file(),
            "{stage}"
        );
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_eq!(glyph(&["frobnicate"], root).status.code(), Some(2));
    assert_eq!(
        glyph(&["train", "--data", "x"], root).status.code(),
        Some(2)
    );
    let o = glyph(
        &["eval", "--models", "m", "--data", "d", "--mode", "borda"],
        root,
    );
    assert_eq!(o.status.code(), Some(2));
    fs::write(root.join("bad.conf"), "colour = red\n").unwrap();
    assert_eq!(
        glyph(
            &["--config", "bad.conf", "predict", "--models", "m", "x.png"],
            root
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn missing_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = glyph(
        &["extract", "--data", "nowhere", "--out", "f.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EmptyDataset"));
}
