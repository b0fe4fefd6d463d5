//! End-to-end runs of the command-line tool on a tiny configuration.

use std::path::Path;
use std::process::{Command, Output};

use lexcat::harness::{decode_checkpoint, encode_checkpoint, read_results_csv, ExperimentKind};

const TINY: &str = r#"
seeds = [1, 2]
pairs = ["noun-verb", "adj-adverb"]
words_per_category = 10
n_sentences = 300
heldout_items = 50
d_model = 16
n_layers = 1
n_heads = 2
epochs = 1
test_items_per_category = 8
n_novel_per_category = 3
"#;

fn lexcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexcat")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn run_all(dir: &Path) -> Output {
    let cfg = dir.join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let out = dir.join("out");
    lexcat(&["all", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn all_produces_artifacts_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_all(a.path());
    assert!(ra.status.success(), "{}", stderr(&ra));
    let rb = run_all(b.path());
    assert!(rb.status.success(), "{}", stderr(&rb));

    let out = a.path().join("out");
    for f in [
        "config.toml",
        "lexicon.json",
        "corpus.txt",
        "heldout.tsv",
        "model.ckpt",
        "train_report.json",
        "results.csv",
        "summary.md",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let csv_a = std::fs::read(out.join("results.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("out/results.csv")).unwrap();
    assert_eq!(csv_a, csv_b);

    let table = read_results_csv(&out.join("results.csv")).unwrap();
    assert_eq!(table.len(), 8);
    assert_eq!(table.of_kind(ExperimentKind::Ks).count(), 4);
    assert!(table.of_kind(ExperimentKind::Ks).all(|r| r.rel_movement_mean.is_some()));
    assert!(table.of_kind(ExperimentKind::Projection).all(|r| r.rel_movement_mean.is_none()));

    let figures: Vec<_> = std::fs::read_dir(out.join("figures")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(figures.len(), 6, "two movement plots and one region plot per pair");
    for f in figures {
        let text = std::fs::read_to_string(&f).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert!(doc.root_element().has_tag_name("svg"), "{}", f.display());
    }

    let bytes = std::fs::read(out.join("model.ckpt")).unwrap();
    assert_eq!(encode_checkpoint(&decode_checkpoint(&bytes).unwrap()), bytes);

    // Stages re-run from disk reproduce the same table.
    let rerun =
        lexcat(&["report", "--config", a.path().join("tiny.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(rerun.status.success(), "{}", stderr(&rerun));
    assert_eq!(std::fs::read(out.join("results.csv")).unwrap(), csv_a);
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let o = lexcat(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_prints_usage() {
    let o = lexcat(&["gen", "--frobnicate"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn report_names_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = lexcat(&["report", "--out", dir.path().to_str().unwrap(), "--pairs", "noun-verb", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("noun-verb__seed4.json"), "{msg}");
}

#[test]
fn train_without_gen_names_missing_lexicon() {
    let dir = tempfile::tempdir().unwrap();
    let o = lexcat(&["train", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lexicon.json"));
}

#[test]
fn bad_config_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "epochs = \"many\"\n").unwrap();
    let o = lexcat(&["gen", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invalid config"));
}
