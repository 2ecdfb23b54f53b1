use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

use multimeta_core::eval::{compare_extractors, extraction_f1, token_prf};
use multimeta_core::fusion::extract_record;
use multimeta_core::pipeline::gold_records;
use multimeta_core::{LabeledDocument, MetadataRecord};

use crate::extract::record_path;
use crate::files::{read_annotated_dir, write_text, Annotated};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Token,
    Field,
}

/// Predicted documents paired with their gold counterparts, by doc_id.
fn align(pred: Vec<Annotated>, gold: &[LabeledDocument], subset: bool) -> Result<Vec<(Annotated, LabeledDocument)>> {
    let mut by_id: BTreeMap<&str, &LabeledDocument> = gold.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut pairs = Vec::new();
    let (mut unknown, mut differ) = (Vec::new(), Vec::new());
    for p in pred {
        match by_id.remove(p.doc.doc_id.as_str()) {
            None => unknown.push(p.doc.doc_id.clone()),
            Some(g) if g.texts() != p.doc.texts() => differ.push(p.doc.doc_id.clone()),
            Some(g) => pairs.push((p, g.clone())),
        }
    }
    let missing: Vec<&str> = if subset { vec![] } else { by_id.into_keys().collect() };
    if !(unknown.is_empty() && differ.is_empty() && missing.is_empty()) {
        let mut msg = String::from("misaligned corpora");
        if !missing.is_empty() {
            msg += &format!("; no prediction for: {}", missing.join(", "));
        }
        if !unknown.is_empty() {
            msg += &format!("; not in gold: {}", unknown.join(", "));
        }
        if !differ.is_empty() {
            msg += &format!("; tokens differ: {}", differ.join(", "));
        }
        bail!(msg);
    }
    if pairs.is_empty() {
        bail!("no documents to evaluate");
    }
    Ok(pairs)
}

/// Extracted record of a prediction: its `.record.json` when present, else rebuilt from labels.
fn extraction(p: &Annotated) -> Result<(String, MetadataRecord)> {
    let rp = record_path(&p.path);
    let rec = if rp.is_file() {
        let text = std::fs::read_to_string(&rp).with_context(|| format!("reading {}", rp.display()))?;
        let rec: MetadataRecord = serde_json::from_str(&text).with_context(|| format!("parsing {}", rp.display()))?;
        rec.validate().with_context(|| rp.display().to_string())?;
        rec
    } else {
        let Some(labels) = &p.predicted else {
            bail!("{}: no predicted_label column and no record file", p.path.display());
        };
        extract_record(&p.doc, labels)?
    };
    Ok((p.doc.doc_id.clone(), rec))
}

fn run_extractions(dir: &Path, gold: &[LabeledDocument], subset: bool) -> Result<(Vec<(String, MetadataRecord)>, Vec<(String, MetadataRecord)>)> {
    let pairs = align(read_annotated_dir(dir)?, gold, subset)?;
    let ex = pairs.iter().map(|(p, _)| extraction(p)).collect::<Result<Vec<_>>>()?;
    let g: Vec<LabeledDocument> = pairs.into_iter().map(|(_, g)| g).collect();
    Ok((ex, gold_records(&g)?))
}

fn reports_dir(out: &Path) -> PathBuf {
    out.join("reports")
}

fn load_gold(gold: &Path) -> Result<Vec<LabeledDocument>> {
    Ok(read_annotated_dir(gold)?.into_iter().map(|a| a.doc).collect())
}

pub fn eval(pred: &Path, gold: &Path, mode: Mode, threshold: f64, exclude_date_doi: bool, subset: bool, out: &Path) -> Result<()> {
    let gold_docs = load_gold(gold)?;
    let dir = reports_dir(out);
    let (json, text, stem) = match mode {
        Mode::Token => {
            let pairs = align(read_annotated_dir(pred)?, &gold_docs, subset)?;
            let mut p = Vec::with_capacity(pairs.len());
            let mut g = Vec::with_capacity(pairs.len());
            for (a, gd) in pairs {
                let Some(labels) = a.predicted else {
                    bail!("{}: no predicted_label column", a.path.display());
                };
                p.push(labels);
                g.push(gd.labels);
            }
            let r = token_prf(&p, &g)?;
            (r.to_json(), r.to_text(), "token_report")
        }
        Mode::Field => {
            let (ex, g) = run_extractions(pred, &gold_docs, subset)?;
            let r = extraction_f1(&ex, &g, threshold, exclude_date_doi)?;
            (r.to_json(), r.to_text(), "field_report")
        }
    };
    write_text(&dir.join(format!("{stem}.json")), &json)?;
    write_text(&dir.join(format!("{stem}.txt")), &text)?;
    print!("{text}");
    Ok(())
}

pub fn compare(runs: &[String], gold: &Path, threshold: f64, exclude_date_doi: bool, subset: bool, out: &Path) -> Result<()> {
    let gold_docs = load_gold(gold)?;
    let mut named = Vec::new();
    let mut gold_ref: Option<Vec<(String, MetadataRecord)>> = None;
    for spec in runs {
        let Some((name, dir)) = spec.split_once('=') else {
            bail!("--runs entry {spec:?} is not NAME=DIR");
        };
        if name.is_empty() || named.iter().any(|(n, _)| n == name) {
            bail!("--runs entry {spec:?}: names must be non-empty and distinct");
        }
        let (ex, g) = run_extractions(Path::new(dir), &gold_docs, subset).with_context(|| format!("run {name}"))?;
        match &gold_ref {
            None => gold_ref = Some(g),
            Some(prev) if *prev != g => bail!("run {name} covers different documents than the first run"),
            Some(_) => {}
        }
        named.push((name.to_string(), ex));
    }
    let g = gold_ref.expect("at least one run");
    let (table, reports) = compare_extractors(&named, &g, threshold, exclude_date_doi)?;
    let dir = reports_dir(out);
    write_text(&dir.join("comparison.json"), &table.to_json())?;
    write_text(&dir.join("comparison.txt"), &table.to_text())?;
    for ((name, _), r) in named.iter().zip(&reports) {
        write_text(&dir.join(format!("{name}.field_report.json")), &r.to_json())?;
    }
    print!("{}", table.to_text());
    Ok(())
}
