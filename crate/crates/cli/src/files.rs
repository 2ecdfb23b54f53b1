use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use multimeta_core::corpus::read_annotations;
use multimeta_core::{Label, LabeledDocument};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `*.csv` files of a directory in name order.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    out.sort();
    Ok(out)
}

pub struct Annotated {
    pub doc: LabeledDocument,
    pub predicted: Option<Vec<Label>>,
    pub path: PathBuf,
}

pub fn read_annotated(path: &Path) -> Result<Annotated> {
    let name = path.display().to_string();
    let f = File::open(path).with_context(|| format!("opening {name}"))?;
    let (doc, predicted) = read_annotations(f, &name)?;
    Ok(Annotated {
        doc,
        predicted,
        path: path.to_path_buf(),
    })
}

/// Annotation files of a directory, sorted by doc_id; duplicate ids are an error.
pub fn read_annotated_dir(dir: &Path) -> Result<Vec<Annotated>> {
    let mut docs = csv_files(dir)?
        .iter()
        .map(|p| read_annotated(p))
        .collect::<Result<Vec<_>>>()?;
    docs.sort_by(|a, b| a.doc.doc_id.cmp(&b.doc.doc_id));
    for w in docs.windows(2) {
        if w[0].doc.doc_id == w[1].doc.doc_id {
            bail!(
                "duplicate doc_id {:?} in {} and {}",
                w[0].doc.doc_id,
                w[0].path.display(),
                w[1].path.display()
            );
        }
    }
    Ok(docs)
}
