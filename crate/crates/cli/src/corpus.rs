use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use multimeta_core::corpus::{
    builtin_templates, generate_corpus, load_records, load_templates_dir, save_annotations, save_records,
    synthesize_records, CorpusManifest, Label,
};

use crate::files::{sha256_file, write_json};

pub fn gen_records(count: usize, seed: u64, out: &Path) -> Result<()> {
    if count == 0 {
        bail!("--count must be positive");
    }
    crate::files::create_parent(out)?;
    save_records(&synthesize_records(count, seed), out)?;
    println!("wrote {count} records to {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct GenerationManifest<'a> {
    records: String,
    records_sha256: String,
    templates: String,
    #[serde(flatten)]
    corpus: &'a CorpusManifest,
    /// doc_id -> classes that did not fit their regions.
    truncated: Vec<(String, Vec<Label>)>,
}

pub fn gen_corpus(records: &Path, templates: Option<&Path>, per_template: usize, seed: u64, out: &Path) -> Result<()> {
    let recs = load_records(records)?;
    if recs.is_empty() {
        bail!("{}: no records", records.display());
    }
    let (tmpl, tmpl_name) = match templates {
        Some(dir) => (load_templates_dir(dir)?, dir.display().to_string()),
        None => (builtin_templates(), "builtin".to_string()),
    };
    if tmpl.is_empty() {
        bail!("no templates found in {tmpl_name}");
    }
    let (docs, manifest) = generate_corpus(&recs, &tmpl, &vec![per_template; tmpl.len()], seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut truncated = Vec::new();
    for g in &docs {
        save_annotations(&g.document, out.join(format!("{}.csv", g.document.doc_id)))?;
        if !g.report.truncated.is_empty() {
            truncated.push((g.document.doc_id.clone(), g.report.truncated.clone()));
        }
    }
    write_json(
        &out.join("manifest.json"),
        &GenerationManifest {
            records: records.display().to_string(),
            records_sha256: sha256_file(records)?,
            templates: tmpl_name,
            corpus: &manifest,
            truncated,
        },
    )?;
    println!(
        "wrote {} documents ({} templates x {per_template}) to {}; {} warnings",
        manifest.total,
        tmpl.len(),
        out.display(),
        manifest.warnings.len()
    );
    Ok(())
}
