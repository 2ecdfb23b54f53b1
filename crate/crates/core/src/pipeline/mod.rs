//! The three trainable stages and the end-to-end extractor built from them.

mod config;
mod corpus_dir;
mod scaler;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{
    stage_seed, PathsConfig, RunConfig, SplitConfig, Stage, StageConfig, StageTrain, Thresholds, VisionStageConfig,
};
pub use corpus_dir::{load_corpus_dir, load_split};
pub use scaler::InputScaler;

use crate::features::{build_feature_sequence, hashing_embedder, Embedder, HashingEmbedder, LAYOUT_DIM};
use crate::fusion::{extract_record, fuse_with, fused_dim, predict_labels, FusedSequence};
use crate::nn::{
    train_with, Architecture, BiLstmLabeler, Mlp, Model, ModelCheckpoint, Sample, StepRecord, TrainConfig,
};
use crate::vision::{region_sample, PagePrediction, SegmentConfig, VisionModel, REGION_FEATURE_DIM};
use crate::{argmax, mix_seed, Error, Label, LabeledDocument, MetadataRecord, ProbDist10, Result};

pub const ROLE_KEY: &str = "role";
pub const SCALER_KEY: &str = "input_scaler";

fn init_rng(train_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(train_seed, 0x696e_6974))
}

fn extra_get<'a>(ck: &'a ModelCheckpoint, key: &str) -> Result<&'a str> {
    ck.extra
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Checkpoint(format!("missing metadata entry {key:?}")))
}

fn extra_parse<T: std::str::FromStr>(ck: &ModelCheckpoint, key: &str) -> Result<T> {
    let s = extra_get(ck, key)?;
    s.parse()
        .map_err(|_| Error::Checkpoint(format!("metadata entry {key:?} has bad value {s:?}")))
}

fn read_scaler(ck: &ModelCheckpoint, dim: usize) -> Result<InputScaler> {
    let sc: InputScaler = serde_json::from_str(extra_get(ck, SCALER_KEY)?)
        .map_err(|e| Error::Checkpoint(format!("input scaler: {e}")))?;
    sc.check()?;
    if sc.dim() != dim {
        return Err(Error::Checkpoint(format!("input scaler has {} dims, model takes {dim}", sc.dim())));
    }
    Ok(sc)
}

fn check_role(ck: &ModelCheckpoint, role: &str, arch: Architecture) -> Result<()> {
    let got = extra_get(ck, ROLE_KEY)?;
    if got != role || ck.architecture != arch {
        return Err(Error::Checkpoint(format!(
            "expected a {role} checkpoint ({arch}), found {got} ({})",
            ck.architecture
        )));
    }
    Ok(())
}

pub fn labels_of(dists: &[ProbDist10]) -> Vec<Label> {
    dists
        .iter()
        .map(|d| Label::from_index(argmax(d)).expect("class index"))
        .collect()
}

/// The text model: hashed trigram embeddings plus layout features into a biLSTM.
#[derive(Debug, Clone, PartialEq)]
pub struct NlpModel {
    pub labeler: BiLstmLabeler,
    pub embedder: HashingEmbedder,
    pub scaler: InputScaler,
}

impl NlpModel {
    pub fn sample(&self, doc: &LabeledDocument) -> Result<Sample> {
        let mut s = nlp_sample(doc, &self.embedder)?;
        self.scaler.apply(&mut s.inputs)?;
        Ok(s)
    }

    pub fn predict(&self, doc: &LabeledDocument) -> Result<Vec<ProbDist10>> {
        let mut x = build_feature_sequence(doc, &self.embedder)?.vectors;
        self.scaler.apply(&mut x)?;
        self.labeler.predict(&x)
    }

    pub fn to_checkpoint(&self, config: TrainConfig, history: Vec<StepRecord>) -> ModelCheckpoint {
        let mut ck = ModelCheckpoint::from_model(&self.labeler, config, history);
        ck.extra.insert(ROLE_KEY.into(), Stage::Nlp.name().into());
        ck.extra.insert("embed_dim".into(), self.embedder.dim().to_string());
        ck.extra.insert("embed_seed".into(), self.embedder.seed().to_string());
        ck.extra.insert(SCALER_KEY.into(), serde_json::to_string(&self.scaler).expect("scaler json"));
        ck
    }

    pub fn from_checkpoint(ck: &ModelCheckpoint) -> Result<Self> {
        check_role(ck, Stage::Nlp.name(), Architecture::BiLstm)?;
        let labeler: BiLstmLabeler = ck.to_model()?;
        let embedder = hashing_embedder(extra_parse(ck, "embed_dim")?, extra_parse(ck, "embed_seed")?)?;
        if labeler.input_dim() != LAYOUT_DIM + embedder.dim() {
            return Err(Error::Checkpoint("labeler input does not match the embedding size".into()));
        }
        let scaler = read_scaler(ck, labeler.input_dim())?;
        Ok(NlpModel { labeler, embedder, scaler })
    }
}

pub fn nlp_sample(doc: &LabeledDocument, embedder: &HashingEmbedder) -> Result<Sample> {
    let seq = build_feature_sequence(doc, embedder)?;
    Sample::new(seq.vectors, doc.labels.clone())
}

/// Trains the text model; initialization and batching follow `cfg.seed`.
pub fn train_nlp(
    train: &[LabeledDocument],
    val: &[LabeledDocument],
    hidden: usize,
    embedder: HashingEmbedder,
    cfg: &TrainConfig,
    on_step: impl FnMut(&StepRecord),
) -> Result<(NlpModel, Vec<StepRecord>)> {
    let dim = LAYOUT_DIM + embedder.dim();
    let mut tr = nonempty(train).map(|d| nlp_sample(d, &embedder)).collect::<Result<Vec<_>>>()?;
    let mut va = nonempty(val).map(|d| nlp_sample(d, &embedder)).collect::<Result<Vec<_>>>()?;
    let scaler = InputScaler::fit(tr.iter().map(|s| &s.inputs), dim)?;
    for s in tr.iter_mut().chain(va.iter_mut()) {
        scaler.apply(&mut s.inputs)?;
    }
    let init = BiLstmLabeler::init(dim, hidden, &mut init_rng(cfg.seed));
    let (labeler, hist) = train_with(init, &tr, &va, cfg, on_step)?;
    Ok((NlpModel { labeler, embedder, scaler }, hist))
}

fn nonempty(docs: &[LabeledDocument]) -> impl Iterator<Item = &LabeledDocument> {
    docs.iter().filter(|d| !d.is_empty())
}

pub fn vision_to_checkpoint(m: &VisionModel, config: TrainConfig, history: Vec<StepRecord>) -> ModelCheckpoint {
    let mut ck = ModelCheckpoint::from_model(&m.classifier, config, history);
    ck.extra.insert(ROLE_KEY.into(), Stage::Vision.name().into());
    ck.extra.insert("split_gap_factor".into(), m.segment.split_gap_factor.to_string());
    ck.extra.insert("merge_gap_factor".into(), m.segment.merge_gap_factor.to_string());
    ck.extra.insert("iou_threshold".into(), m.iou_threshold.to_string());
    ck.extra.insert("keep".into(), m.keep.to_string());
    ck
}

pub fn vision_from_checkpoint(ck: &ModelCheckpoint) -> Result<VisionModel> {
    check_role(ck, Stage::Vision.name(), Architecture::Mlp)?;
    let classifier: Mlp = ck.to_model()?;
    if classifier.input_dim() != REGION_FEATURE_DIM {
        return Err(Error::Checkpoint(format!(
            "region classifier takes {} inputs, expected {REGION_FEATURE_DIM}",
            classifier.input_dim()
        )));
    }
    Ok(VisionModel {
        classifier,
        segment: SegmentConfig {
            split_gap_factor: extra_parse(ck, "split_gap_factor")?,
            merge_gap_factor: extra_parse(ck, "merge_gap_factor")?,
        },
        iou_threshold: extra_parse(ck, "iou_threshold")?,
        keep: extra_parse(ck, "keep")?,
    })
}

/// Trains the region classifier on majority gold labels of segmented regions.
pub fn train_vision(
    train: &[LabeledDocument],
    val: &[LabeledDocument],
    hidden: usize,
    segment: SegmentConfig,
    thresholds: &Thresholds,
    cfg: &TrainConfig,
    on_step: impl FnMut(&StepRecord),
) -> Result<(VisionModel, Vec<StepRecord>)> {
    let tr = nonempty(train).map(|d| region_sample(d, &segment)).collect::<Result<Vec<_>>>()?;
    let va = nonempty(val).map(|d| region_sample(d, &segment)).collect::<Result<Vec<_>>>()?;
    let init = Mlp::init(REGION_FEATURE_DIM, hidden, &mut init_rng(cfg.seed));
    let (classifier, hist) = train_with(init, &tr, &va, cfg, on_step)?;
    Ok((
        VisionModel {
            classifier,
            segment,
            iou_threshold: thresholds.nms_iou,
            keep: thresholds.nms_keep,
        },
        hist,
    ))
}

/// The fusion labeler over concatenated submodel distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub labeler: BiLstmLabeler,
    pub append_confidence: bool,
}

impl FusionModel {
    pub fn to_checkpoint(&self, config: TrainConfig, history: Vec<StepRecord>) -> ModelCheckpoint {
        let mut ck = ModelCheckpoint::from_model(&self.labeler, config, history);
        ck.extra.insert(ROLE_KEY.into(), Stage::Fusion.name().into());
        ck.extra.insert("append_confidence".into(), self.append_confidence.to_string());
        ck
    }

    pub fn from_checkpoint(ck: &ModelCheckpoint) -> Result<Self> {
        check_role(ck, Stage::Fusion.name(), Architecture::BiLstm)?;
        let labeler: BiLstmLabeler = ck.to_model()?;
        let append_confidence: bool = extra_parse(ck, "append_confidence")?;
        if labeler.input_dim() != fused_dim(append_confidence) {
            return Err(Error::Checkpoint(format!(
                "fusion labeler takes {} inputs, expected {}",
                labeler.input_dim(),
                fused_dim(append_confidence)
            )));
        }
        Ok(FusionModel {
            labeler,
            append_confidence,
        })
    }
}

/// Frozen submodel outputs for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodelOutputs {
    pub nlp: Vec<ProbDist10>,
    pub vision: Vec<ProbDist10>,
}

pub fn submodel_outputs(
    nlp: &NlpModel,
    vision: &VisionModel,
    doc: &LabeledDocument,
    imported: Option<&PagePrediction>,
) -> Result<SubmodelOutputs> {
    let v = match imported {
        Some(p) => crate::vision::word_probability_map(p, doc)?,
        None => vision.predict(doc)?,
    };
    Ok(SubmodelOutputs {
        nlp: nlp.predict(doc)?,
        vision: v,
    })
}

fn fusion_sample(out: &SubmodelOutputs, doc: &LabeledDocument, append_confidence: bool) -> Result<Sample> {
    let f = fuse_with(&out.nlp, &out.vision, append_confidence)?;
    Sample::new(f.vectors, doc.labels.clone())
}

/// Trains the fusion labeler on frozen NLP and vision outputs.
#[allow(clippy::too_many_arguments)]
pub fn train_fusion(
    nlp: &NlpModel,
    vision: &VisionModel,
    train: &[LabeledDocument],
    val: &[LabeledDocument],
    hidden: usize,
    append_confidence: bool,
    cfg: &TrainConfig,
    on_step: impl FnMut(&StepRecord),
) -> Result<(FusionModel, Vec<StepRecord>)> {
    let build = |docs: &[LabeledDocument]| {
        nonempty(docs)
            .map(|d| fusion_sample(&submodel_outputs(nlp, vision, d, None)?, d, append_confidence))
            .collect::<Result<Vec<_>>>()
    };
    let (tr, va) = (build(train)?, build(val)?);
    let init = BiLstmLabeler::init(fused_dim(append_confidence), hidden, &mut init_rng(cfg.seed));
    let (labeler, hist) = train_with(init, &tr, &va, cfg, on_step)?;
    Ok((
        FusionModel {
            labeler,
            append_confidence,
        },
        hist,
    ))
}

/// Per-token labels from each stage of the pipeline for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentPrediction {
    pub nlp: Vec<ProbDist10>,
    pub vision: Vec<ProbDist10>,
    pub fused: Vec<ProbDist10>,
    pub labels: Vec<Label>,
}

impl DocumentPrediction {
    pub fn labels_for(&self, stage: Stage) -> Vec<Label> {
        match stage {
            Stage::Nlp => labels_of(&self.nlp),
            Stage::Vision => labels_of(&self.vision),
            Stage::Fusion => self.labels.clone(),
        }
    }
}

/// Full extractor: both submodels and the fusion labeler.
#[derive(Debug, Clone, PartialEq)]
pub struct Extractor {
    pub nlp: NlpModel,
    pub vision: VisionModel,
    pub fusion: FusionModel,
}

impl Extractor {
    pub fn predict(&self, doc: &LabeledDocument, imported: Option<&PagePrediction>) -> Result<DocumentPrediction> {
        let out = submodel_outputs(&self.nlp, &self.vision, doc, imported)?;
        let fused: FusedSequence = fuse_with(&out.nlp, &out.vision, self.fusion.append_confidence)?;
        let (labels, dists): (Vec<Label>, Vec<ProbDist10>) =
            predict_labels(&self.fusion.labeler, &fused)?.into_iter().unzip();
        Ok(DocumentPrediction {
            nlp: out.nlp,
            vision: out.vision,
            fused: dists,
            labels,
        })
    }

    pub fn extract(&self, doc: &LabeledDocument, imported: Option<&PagePrediction>) -> Result<(MetadataRecord, Vec<Label>)> {
        let p = self.predict(doc, imported)?;
        Ok((extract_record(doc, &p.labels)?, p.labels))
    }
}

/// Token labels of `stage` for every document, keyed like the input order.
pub fn predict_stage(
    nlp: Option<&NlpModel>,
    vision: Option<&VisionModel>,
    fusion: Option<&FusionModel>,
    stage: Stage,
    docs: &[LabeledDocument],
) -> Result<Vec<Vec<Label>>> {
    let missing = |what: &str| Error::invalid("models", format!("{what} model required for {stage} predictions"));
    docs.iter()
        .map(|d| match stage {
            Stage::Nlp => Ok(labels_of(&nlp.ok_or_else(|| missing("nlp"))?.predict(d)?)),
            Stage::Vision => Ok(labels_of(&vision.ok_or_else(|| missing("vision"))?.predict(d)?)),
            Stage::Fusion => {
                let n = nlp.ok_or_else(|| missing("nlp"))?;
                let v = vision.ok_or_else(|| missing("vision"))?;
                let f = fusion.ok_or_else(|| missing("fusion"))?;
                let out = submodel_outputs(n, v, d, None)?;
                let fused = fuse_with(&out.nlp, &out.vision, f.append_confidence)?;
                Ok(predict_labels(&f.labeler, &fused)?.into_iter().map(|(l, _)| l).collect())
            }
        })
        .collect()
}

/// Gold field values as visible on the page: the record rebuilt from gold labels.
pub fn gold_records(docs: &[LabeledDocument]) -> Result<Vec<(String, MetadataRecord)>> {
    docs.iter()
        .map(|d| Ok((d.doc_id.clone(), extract_record(d, &d.labels)?)))
        .collect()
}

/// Summary strings of a checkpoint suitable for a manifest.
pub fn checkpoint_summary(ck: &ModelCheckpoint) -> BTreeMap<String, String> {
    let mut m = ck.extra.clone();
    m.insert("architecture".into(), ck.architecture.to_string());
    m.insert("steps".into(), ck.history.len().to_string());
    if let Some(last) = ck.history.last() {
        m.insert("final_train_loss".into(), last.train_loss.to_string());
        if let Some(v) = last.val_loss {
            m.insert("final_val_loss".into(), v.to_string());
        }
    }
    m
}
