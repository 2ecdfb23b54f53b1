use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use multimeta_core::eval::token_prf;
use multimeta_core::features::hashing_embedder;
use multimeta_core::nn::{ModelCheckpoint, StepRecord, TrainConfig};
use multimeta_core::pipeline::{
    load_split, predict_stage, train_fusion, train_nlp, train_vision, vision_from_checkpoint, vision_to_checkpoint,
    FusionModel, NlpModel, RunConfig, Stage,
};
use multimeta_core::vision::VisionModel;
use multimeta_core::LabeledDocument;

use crate::files::{sha256_file, sha256_hex, write_json};

pub fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("loading config {}", path.display()))
}

/// Hash of the resolved configuration, independent of file formatting.
pub fn config_hash(cfg: &RunConfig) -> String {
    sha256_hex(serde_json::to_string(cfg).expect("config json").as_bytes())
}

pub fn require_checkpoint(cfg_dir: &Path, stage: Stage) -> Result<ModelCheckpoint> {
    let path = cfg_dir.join(format!("{}.ckpt", stage.name()));
    if !path.is_file() {
        bail!(
            "missing prerequisite checkpoint {} (run `multimeta train --model {stage}` first)",
            path.display()
        );
    }
    ModelCheckpoint::load(&path).with_context(|| format!("loading {}", path.display()))
}

pub fn load_nlp(dir: &Path) -> Result<NlpModel> {
    Ok(NlpModel::from_checkpoint(&require_checkpoint(dir, Stage::Nlp)?)?)
}

pub fn load_vision(dir: &Path) -> Result<VisionModel> {
    Ok(vision_from_checkpoint(&require_checkpoint(dir, Stage::Vision)?)?)
}

pub fn load_fusion(dir: &Path) -> Result<FusionModel> {
    Ok(FusionModel::from_checkpoint(&require_checkpoint(dir, Stage::Fusion)?)?)
}

#[derive(Serialize)]
struct TrainManifest {
    stage: String,
    config_sha256: String,
    seed: u64,
    train: TrainConfig,
    hidden: usize,
    train_documents: usize,
    val_documents: usize,
    /// File name, relative to this manifest.
    checkpoint: String,
    checkpoint_sha256: String,
    steps: usize,
    final_train_loss: Option<f64>,
    final_val_loss: Option<f64>,
    val_micro_f1: f64,
    val_macro_f1: f64,
}

struct MetricsLog {
    out: BufWriter<File>,
    err: Option<std::io::Error>,
}

impl MetricsLog {
    fn record(&mut self, r: &StepRecord) {
        if self.err.is_some() {
            return;
        }
        let line = serde_json::to_string(r).expect("step json");
        if let Err(e) = writeln!(self.out, "{line}") {
            self.err = Some(e);
        }
        if r.step % 50 == 0 {
            match r.val_loss {
                Some(v) => eprintln!("step {:>4}  train loss {:.5}  val loss {v:.5}", r.step, r.train_loss),
                None => eprintln!("step {:>4}  train loss {:.5}", r.step, r.train_loss),
            }
        }
    }

    fn finish(mut self) -> Result<()> {
        if let Some(e) = self.err {
            return Err(e.into());
        }
        self.out.flush()?;
        Ok(())
    }
}

pub fn train(stage: Stage, config: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let ckdir = &cfg.paths.checkpoints_dir;
    // Prerequisites first, so a missing checkpoint fails before any work.
    let prereq = match stage {
        Stage::Fusion => Some((load_nlp(ckdir)?, load_vision(ckdir)?)),
        _ => None,
    };
    let (tr, va, _) = load_split(&cfg).with_context(|| format!("loading corpus {}", cfg.paths.corpus_dir.display()))?;
    fs::create_dir_all(ckdir).with_context(|| format!("creating {}", ckdir.display()))?;
    let tc = cfg.train_config(stage);
    let metrics_path = cfg.metrics_path(stage);
    let mut log = MetricsLog {
        out: BufWriter::new(File::create(&metrics_path).with_context(|| format!("creating {}", metrics_path.display()))?),
        err: None,
    };
    let on_step = |r: &StepRecord| log.record(r);

    let (ck, hidden, val_labels) = match stage {
        Stage::Nlp => {
            let emb = hashing_embedder(cfg.embed_dim, cfg.embed_seed())?;
            let (m, hist) = train_nlp(&tr, &va, cfg.nlp.hidden, emb, &tc, on_step)?;
            let pred = predict_stage(Some(&m), None, None, stage, &va)?;
            (m.to_checkpoint(tc.clone(), hist), cfg.nlp.hidden, pred)
        }
        Stage::Vision => {
            let (m, hist) = train_vision(&tr, &va, cfg.vision.hidden, cfg.vision.segment, &cfg.thresholds, &tc, on_step)?;
            let pred = predict_stage(None, Some(&m), None, stage, &va)?;
            (vision_to_checkpoint(&m, tc.clone(), hist), cfg.vision.hidden, pred)
        }
        Stage::Fusion => {
            let (nlp, vis) = prereq.expect("loaded above");
            let (m, hist) = train_fusion(&nlp, &vis, &tr, &va, cfg.fusion.hidden, cfg.fusion.append_confidence, &tc, on_step)?;
            let pred = predict_stage(Some(&nlp), Some(&vis), Some(&m), stage, &va)?;
            (m.to_checkpoint(tc.clone(), hist), cfg.fusion.hidden, pred)
        }
    };
    log.finish()?;

    let ck_path = cfg.checkpoint_path(stage);
    ck.save(&ck_path).with_context(|| format!("writing {}", ck_path.display()))?;
    let (micro, macro_) = val_f1(&va, &val_labels)?;
    let last = ck.history.last();
    write_json(
        &ckdir.join(format!("{}.manifest.json", stage.name())),
        &TrainManifest {
            stage: stage.name().into(),
            config_sha256: config_hash(&cfg),
            seed: cfg.seed,
            train: tc,
            hidden,
            train_documents: tr.len(),
            val_documents: va.len(),
            checkpoint: ck_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            checkpoint_sha256: sha256_file(&ck_path)?,
            steps: ck.history.len(),
            final_train_loss: last.map(|r| r.train_loss),
            final_val_loss: last.and_then(|r| r.val_loss),
            val_micro_f1: micro,
            val_macro_f1: macro_,
        },
    )?;
    println!("{stage}: validation micro F1 {micro:.4}, macro F1 {macro_:.4}");
    println!("checkpoint {}", ck_path.display());
    Ok(())
}

fn val_f1(va: &[LabeledDocument], pred: &[Vec<multimeta_core::Label>]) -> Result<(f64, f64)> {
    if va.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let gold: Vec<_> = va.iter().map(|d| d.labels.clone()).collect();
    let r = token_prf(pred, &gold)?;
    Ok((r.micro.f1, r.macro_.f1))
}
