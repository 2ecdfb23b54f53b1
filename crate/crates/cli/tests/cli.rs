use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use multimeta_core::corpus::{load_annotations, write_annotations};

const BIN: &str = env!("CARGO_BIN_EXE_multimeta");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert!(
        o.status.success(),
        "multimeta {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CONFIG: &str = r#"{
  "seed": 3,
  "paths": {"corpus_dir": "corpus", "checkpoints_dir": "ck"},
  "embed_dim": 8,
  "nlp": {"hidden": 4, "train": {"iterations": 3, "batch_size_tokens": 300}},
  "vision": {"hidden": 4, "train": {"iterations": 3, "batch_size_tokens": 300}},
  "fusion": {"hidden": 3, "train": {"iterations": 3, "batch_size_tokens": 300}}
}"#;

fn corpus(dir: &Path, per_template: usize) {
    ok(dir, &["gen-records", "--count", "3", "--seed", "1", "--out", "records.jsonl"]);
    let n = per_template.to_string();
    ok(
        dir,
        &["gen-corpus", "--records", "records.jsonl", "--per-template", &n, "--seed", "1", "--out", "corpus"],
    );
    fs::write(dir.join("run.json"), CONFIG).unwrap();
}

fn csvs(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn gen_corpus_writes_one_file_per_document_and_is_repeatable() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 2);
    let files = csvs(&d.path().join("corpus"));
    assert_eq!(files.len(), 10);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("corpus/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["total"], 10);
    assert_eq!(manifest["documents"].as_array().unwrap().len(), 10);
    assert_eq!(manifest["seed"], 1);

    let first = fs::read(d.path().join("corpus").join(&files[3])).unwrap();
    ok(
        d.path(),
        &["gen-corpus", "--records", "records.jsonl", "--per-template", "2", "--seed", "1", "--out", "again"],
    );
    assert_eq!(fs::read(d.path().join("again").join(&files[3])).unwrap(), first);
}

#[test]
fn bad_records_report_file_and_line() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("r.jsonl"), "{\"title\": \"A\"}\n{not json}\n").unwrap();
    let o = run(d.path(), &["gen-corpus", "--records", "r.jsonl", "--per-template", "1", "--out", "c"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("r.jsonl: line 2"), "{}", stderr(&o));
}

#[test]
fn fusion_training_names_the_missing_checkpoint() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 1);
    let o = run(d.path(), &["train", "--model", "fusion", "--config", "run.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nlp.ckpt"), "{}", stderr(&o));
}

#[test]
fn training_is_seeded_and_writes_its_artifacts() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 2);
    let out = ok(d.path(), &["train", "--model", "vision", "--config", "run.json"]);
    assert!(out.contains("validation micro F1"), "{out}");
    let ck = d.path().join("ck");
    let first = fs::read(ck.join("vision.ckpt")).unwrap();
    let metrics = fs::read_to_string(ck.join("vision.metrics.jsonl")).unwrap();
    assert_eq!(metrics.lines().count(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ck.join("vision.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["checkpoint"], "vision.ckpt");

    ok(d.path(), &["train", "--model", "vision", "--config", "run.json"]);
    assert_eq!(fs::read(ck.join("vision.ckpt")).unwrap(), first);
}

#[test]
fn diverging_training_exits_with_code_two() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 1);
    let cfg = CONFIG.replace(
        r#""nlp": {"hidden": 4, "train": {"iterations": 3, "batch_size_tokens": 300}}"#,
        r#""nlp": {"hidden": 4, "train": {"iterations": 3, "batch_size_tokens": 300, "learning_rate": 1e308}}"#,
    );
    assert_ne!(cfg, CONFIG);
    fs::write(d.path().join("run.json"), cfg).unwrap();
    let o = run(d.path(), &["train", "--model", "nlp", "--config", "run.json"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("numerical"), "{}", stderr(&o));
}

#[test]
fn extract_without_checkpoints_fails() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 1);
    let doc = format!("corpus/{}", csvs(&d.path().join("corpus"))[0]);
    let o = run(d.path(), &["extract", "--doc", &doc, "--checkpoints", "nowhere", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere/nlp.ckpt"), "{}", stderr(&o));
}

#[test]
fn extract_is_deterministic_and_rejects_foreign_predictions() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 2);
    for m in ["nlp", "vision", "fusion"] {
        ok(d.path(), &["train", "--model", m, "--config", "run.json"]);
    }
    let names = csvs(&d.path().join("corpus"));
    let doc = format!("corpus/{}", names[0]);
    let printed = ok(d.path(), &["extract", "--doc", &doc, "--config", "run.json", "--out", "a/out.csv"]);
    ok(d.path(), &["extract", "--doc", &doc, "--config", "run.json", "--out", "b/out.csv"]);
    for f in ["out.csv", "out.record.json"] {
        assert_eq!(
            fs::read(d.path().join("a").join(f)).unwrap(),
            fs::read(d.path().join("b").join(f)).unwrap()
        );
    }
    let rec: serde_json::Value = serde_json::from_str(&printed).unwrap();
    assert!(rec.get("title").is_some());
    let (labeled, pred) = multimeta_core::corpus::read_annotations(
        fs::File::open(d.path().join("a/out.csv")).unwrap(),
        "out.csv",
    )
    .unwrap();
    assert_eq!(pred.unwrap().len(), labeled.len());

    // A page prediction for another document.
    let other = &names[1];
    let other_id = other.trim_end_matches(".csv");
    let page = format!(
        "{{\"doc_id\": \"{other_id}\", \"page_width_pt\": 595, \"page_height_pt\": 842, \"boxes\": []}}\n"
    );
    fs::write(d.path().join("pages.jsonl"), page).unwrap();
    let o = run(
        d.path(),
        &["extract", "--doc", &doc, "--config", "run.json", "--vision-pred", "pages.jsonl", "--out", "c.csv"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("doc_id mismatch"), "{}", stderr(&o));
}

fn gold_as_predictions(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for name in csvs(from) {
        let doc = load_annotations(from.join(&name)).unwrap();
        let f = fs::File::create(to.join(&name)).unwrap();
        write_annotations(f, &doc, Some(&doc.labels)).unwrap();
    }
}

#[test]
fn eval_of_gold_against_itself_is_perfect() {
    let d = tempfile::tempdir().unwrap();
    // Two records per template so that every class occurs.
    corpus(d.path(), 2);
    gold_as_predictions(&d.path().join("corpus"), &d.path().join("pred"));
    ok(d.path(), &["eval", "--pred", "pred", "--gold", "corpus", "--mode", "token", "--out", "o"]);
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("o/reports/token_report.json")).unwrap()).unwrap();
    assert_eq!(r["micro"]["f1"], 1.0);
    assert_eq!(r["macro"]["f1"], 1.0);

    ok(d.path(), &["eval", "--pred", "pred", "--gold", "corpus", "--mode", "field", "--out", "o"]);
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("o/reports/field_report.json")).unwrap()).unwrap();
    assert_eq!(r["macro_f1"], 1.0);
    assert!(d.path().join("o/reports/field_report.txt").is_file());
}

#[test]
fn misaligned_corpora_are_listed_by_doc_id() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 1);
    gold_as_predictions(&d.path().join("corpus"), &d.path().join("pred"));
    let names = csvs(&d.path().join("pred"));
    fs::remove_file(d.path().join("pred").join(&names[0])).unwrap();
    let o = run(d.path(), &["eval", "--pred", "pred", "--gold", "corpus", "--mode", "token"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(names[0].trim_end_matches(".csv")), "{}", stderr(&o));
    // Restricted to the documents that were predicted, the rest still scores.
    ok(d.path(), &["eval", "--pred", "pred", "--gold", "corpus", "--mode", "token", "--subset"]);
}

#[test]
fn compare_builds_one_column_per_run() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 1);
    gold_as_predictions(&d.path().join("corpus"), &d.path().join("p1"));
    gold_as_predictions(&d.path().join("corpus"), &d.path().join("p2"));
    let out = ok(d.path(), &["compare", "--runs", "one=p1", "two=p2", "--gold", "corpus"]);
    let header = out.lines().next().unwrap();
    assert!(header.contains("one") && header.contains("two"), "{out}");
    let t: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("reports/comparison.json")).unwrap()).unwrap();
    assert_eq!(t["runs"].as_array().unwrap().len(), 2);
    let o = run(d.path(), &["compare", "--runs", "broken", "--gold", "corpus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gradcheck_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["gradcheck", "--models", "4"]);
    assert!(out.contains("max relative error"), "{out}");
}

#[test]
fn feature_dump_has_one_row_per_token() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 1);
    let name = &csvs(&d.path().join("corpus"))[0];
    let doc = load_annotations(d.path().join("corpus").join(name)).unwrap();
    let path = format!("corpus/{name}");
    ok(d.path(), &["features", "dump", "--doc", &path, "--config", "run.json", "--out", "f.csv"]);
    let text = fs::read_to_string(d.path().join("f.csv")).unwrap();
    assert_eq!(text.lines().count(), doc.len());
    assert!(text.lines().all(|l| l.split(',').count() == 16 + 8));
}

#[test]
fn usage_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["train", "--model", "cnn", "--config", "x"]).status.code(), Some(1));
    assert_eq!(run(d.path(), &["--help"]).status.code(), Some(0));
}
