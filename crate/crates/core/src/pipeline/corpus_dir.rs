use std::path::Path;

use super::config::RunConfig;
use crate::corpus::{load_annotations, split_corpus};
use crate::{Error, LabeledDocument, Result};

/// Every `*.csv` annotation file in `dir`, sorted by doc_id.
pub fn load_corpus_dir(dir: impl AsRef<Path>) -> Result<Vec<LabeledDocument>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::invalid("corpus", format!("{}: {e}", dir.display())))?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut docs = paths
        .iter()
        .map(load_annotations)
        .collect::<Result<Vec<_>>>()?;
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    for w in docs.windows(2) {
        if w[0].doc_id == w[1].doc_id {
            return Err(Error::invalid("corpus", format!("duplicate doc_id {:?}", w[0].doc_id)));
        }
    }
    Ok(docs)
}

/// Loads the configured corpus and splits it into (train, val, test).
pub fn load_split(cfg: &RunConfig) -> Result<(Vec<LabeledDocument>, Vec<LabeledDocument>, Vec<LabeledDocument>)> {
    let docs = load_corpus_dir(&cfg.paths.corpus_dir)?;
    if docs.is_empty() {
        return Err(Error::invalid(
            "corpus",
            format!("no annotation files in {}", cfg.paths.corpus_dir.display()),
        ));
    }
    split_corpus(docs, &cfg.split_spec())
}
