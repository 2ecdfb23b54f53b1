use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use multimeta_core::corpus::{split_corpus, write_annotations};
use multimeta_core::fusion::extract_record;
use multimeta_core::pipeline::{labels_of, Extractor, NlpModel, RunConfig, Stage};
use multimeta_core::vision::{import_page_predictions, word_probability_map, PagePrediction, VisionModel};
use multimeta_core::{Label, LabeledDocument, MetadataRecord};

use crate::files::{create_parent, read_annotated, read_annotated_dir, write_json};
use crate::train::{load_config, load_fusion, load_nlp, load_vision};

pub struct ExtractArgs {
    pub doc: PathBuf,
    pub vision_pred: Option<PathBuf>,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub checkpoints: Option<PathBuf>,
    pub stage: Stage,
    pub split: Option<String>,
}

/// Models needed for one stage's labels.
enum Labeler {
    Nlp(NlpModel),
    Vision(VisionModel),
    Full(Box<Extractor>),
}

impl Labeler {
    fn load(stage: Stage, dir: &Path) -> Result<Self> {
        Ok(match stage {
            Stage::Nlp => Labeler::Nlp(load_nlp(dir)?),
            Stage::Vision => Labeler::Vision(load_vision(dir)?),
            Stage::Fusion => Labeler::Full(Box::new(Extractor {
                nlp: load_nlp(dir)?,
                vision: load_vision(dir)?,
                fusion: load_fusion(dir)?,
            })),
        })
    }

    fn label(&self, doc: &LabeledDocument, imported: Option<&PagePrediction>) -> Result<Vec<Label>> {
        Ok(match self {
            Labeler::Nlp(m) => labels_of(&m.predict(doc)?),
            Labeler::Vision(m) => match imported {
                Some(p) => labels_of(&word_probability_map(p, doc)?),
                None => labels_of(&m.predict(doc)?),
            },
            Labeler::Full(ex) => ex.predict(doc, imported)?.labels,
        })
    }
}

pub fn record_path(csv: &Path) -> PathBuf {
    csv.with_extension("record.json")
}

fn write_outputs(doc: &LabeledDocument, labels: &[Label], csv: &Path) -> Result<MetadataRecord> {
    create_parent(csv)?;
    let f = File::create(csv).with_context(|| format!("creating {}", csv.display()))?;
    write_annotations(BufWriter::new(f), doc, Some(labels))?;
    let record = extract_record(doc, labels)?;
    write_json(&record_path(csv), &record)?;
    Ok(record)
}

fn pick_split(docs: Vec<LabeledDocument>, cfg: &RunConfig, split: &str) -> Result<Vec<LabeledDocument>> {
    let (tr, va, te) = split_corpus(docs, &cfg.split_spec())?;
    Ok(match split {
        "train" => tr,
        "val" => va,
        "test" => te,
        other => bail!("--split {other:?}: expected train, val or test"),
    })
}

pub fn extract(a: &ExtractArgs) -> Result<()> {
    let cfg = a.config.as_deref().map(load_config).transpose()?;
    let ckdir = match (&a.checkpoints, &cfg) {
        (Some(d), _) => d.clone(),
        (None, Some(c)) => c.paths.checkpoints_dir.clone(),
        (None, None) => PathBuf::from("checkpoints"),
    };
    let labeler = Labeler::load(a.stage, &ckdir)?;
    let imported: Option<BTreeMap<String, PagePrediction>> = match &a.vision_pred {
        Some(p) => {
            if a.stage == Stage::Nlp {
                bail!("--vision-pred has no effect on nlp labels");
            }
            let mut map = BTreeMap::new();
            for page in import_page_predictions(p)? {
                if map.insert(page.doc_id.clone(), page).is_some() {
                    bail!("{}: several pages for one doc_id", p.display());
                }
            }
            Some(map)
        }
        None => None,
    };
    let page_for = |doc: &LabeledDocument| -> Result<Option<&PagePrediction>> {
        match &imported {
            None => Ok(None),
            Some(map) => match map.get(&doc.doc_id) {
                Some(p) => Ok(Some(p)),
                None if map.len() == 1 => {
                    let other = map.keys().next().expect("one entry");
                    bail!("doc_id mismatch: document {:?}, prediction {:?}", doc.doc_id, other)
                }
                None => bail!("no imported prediction for document {:?}", doc.doc_id),
            },
        }
    };

    if a.doc.is_dir() {
        let mut docs: Vec<LabeledDocument> = read_annotated_dir(&a.doc)?.into_iter().map(|x| x.doc).collect();
        if let Some(s) = &a.split {
            let Some(c) = &cfg else { bail!("--split needs --config") };
            docs = pick_split(docs, c, s)?;
        }
        fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
        for doc in &docs {
            let labels = labeler.label(doc, page_for(doc)?)?;
            write_outputs(doc, &labels, &a.out.join(format!("{}.csv", doc.doc_id)))?;
        }
        println!("labeled {} documents into {}", docs.len(), a.out.display());
    } else {
        if a.split.is_some() {
            bail!("--split only applies to a directory of documents");
        }
        let doc = read_annotated(&a.doc)?.doc;
        let labels = labeler.label(&doc, page_for(&doc)?)?;
        let record = write_outputs(&doc, &labels, &a.out)?;
        println!("{}", serde_json::to_string_pretty(&record)?);
    }
    Ok(())
}
