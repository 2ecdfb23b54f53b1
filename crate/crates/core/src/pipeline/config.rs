use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::SplitSpec;
use crate::eval::DEFAULT_MATCH_THRESHOLD;
use crate::nn::{OptimizerKind, TrainConfig};
use crate::vision::{SegmentConfig, DEFAULT_IOU_THRESHOLD, DEFAULT_KEEP, VISION_HIDDEN};
use crate::{Error, Result};

/// Pipeline stages that draw their own seed from the global one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Nlp,
    Vision,
    Fusion,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Nlp => "nlp",
            Stage::Vision => "vision",
            Stage::Fusion => "fusion",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nlp" => Ok(Stage::Nlp),
            "vision" => Ok(Stage::Vision),
            "fusion" => Ok(Stage::Fusion),
            other => Err(Error::invalid("model", format!("{other:?} (expected nlp, vision or fusion)"))),
        }
    }
}

/// Fixed offsets added to the global seed.
pub mod seed_offset {
    pub const SPLIT: u64 = 1;
    pub const EMBED: u64 = 2;
    pub const NLP: u64 = 3;
    pub const VISION: u64 = 4;
    pub const FUSION: u64 = 5;
}

pub fn stage_seed(global: u64, offset: u64) -> u64 {
    global.wrapping_add(offset)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub corpus_dir: PathBuf,
    pub checkpoints_dir: PathBuf,
    pub reports_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            corpus_dir: "corpus".into(),
            checkpoints_dir: "checkpoints".into(),
            reports_dir: "reports".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let d = SplitSpec::default();
        SplitConfig {
            train_frac: d.train_frac,
            val_frac: d.val_frac,
            test_frac: d.test_frac,
        }
    }
}

/// Training settings of one stage; the seed comes from the global seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageTrain {
    pub iterations: usize,
    pub batch_size_tokens: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub clip_norm: f64,
}

impl Default for StageTrain {
    fn default() -> Self {
        let d = TrainConfig::default();
        StageTrain {
            iterations: d.iterations,
            batch_size_tokens: d.batch_size_tokens,
            learning_rate: d.learning_rate,
            optimizer: d.optimizer,
            clip_norm: d.clip_norm,
        }
    }
}

impl StageTrain {
    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            iterations: self.iterations,
            batch_size_tokens: self.batch_size_tokens,
            learning_rate: self.learning_rate,
            optimizer: self.optimizer,
            seed,
            clip_norm: self.clip_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    pub hidden: usize,
    /// Fusion only: append each submodel's top probability to the fused vector.
    pub append_confidence: bool,
    pub train: StageTrain,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            hidden: 256,
            append_confidence: false,
            train: StageTrain::default(),
        }
    }
}

impl StageConfig {
    /// Fusion inputs are near one-hot and learn slowly at the text model's rate.
    pub fn fusion_default() -> Self {
        StageConfig {
            train: StageTrain {
                learning_rate: 1e-2,
                ..StageTrain::default()
            },
            ..StageConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisionStageConfig {
    pub hidden: usize,
    pub segment: SegmentConfig,
    pub train: StageTrain,
}

impl Default for VisionStageConfig {
    fn default() -> Self {
        VisionStageConfig {
            hidden: VISION_HIDDEN,
            segment: SegmentConfig::default(),
            train: StageTrain {
                learning_rate: 1e-2,
                ..StageTrain::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub cosine: f64,
    pub nms_iou: f64,
    pub nms_keep: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            cosine: DEFAULT_MATCH_THRESHOLD,
            nms_iou: DEFAULT_IOU_THRESHOLD,
            nms_keep: DEFAULT_KEEP,
        }
    }
}

/// Everything a pipeline run depends on besides its input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub split: SplitConfig,
    pub embed_dim: usize,
    pub nlp: StageConfig,
    pub vision: VisionStageConfig,
    #[serde(default = "StageConfig::fusion_default", deserialize_with = "fusion_over_defaults")]
    pub fusion: StageConfig,
    pub thresholds: Thresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            paths: PathsConfig::default(),
            split: SplitConfig::default(),
            embed_dim: 64,
            nlp: StageConfig::default(),
            vision: VisionStageConfig::default(),
            fusion: StageConfig::fusion_default(),
            thresholds: Thresholds::default(),
        }
    }
}

/// A partial fusion section keeps the fusion defaults for the fields it omits.
fn fusion_over_defaults<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<StageConfig, D::Error> {
    fn overlay(base: &mut serde_json::Value, patch: serde_json::Value) {
        match (base, patch) {
            (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
                for (k, v) in p {
                    match b.get_mut(&k) {
                        Some(slot) => overlay(slot, v),
                        None => {
                            b.insert(k, v);
                        }
                    }
                }
            }
            (slot, v) => *slot = v,
        }
    }
    let patch = serde_json::Value::deserialize(d)?;
    let mut base = serde_json::to_value(StageConfig::fusion_default()).map_err(serde::de::Error::custom)?;
    overlay(&mut base, patch);
    serde_json::from_value(base).map_err(serde::de::Error::custom)
}

impl RunConfig {
    /// Reads a JSON config; relative paths are resolved against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.paths.corpus_dir,
            &mut cfg.paths.checkpoints_dir,
            &mut cfg.paths.reports_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.split_spec().validate()?;
        if self.embed_dim == 0 {
            return Err(Error::invalid("config", "embed_dim must be positive"));
        }
        for (name, h) in [("nlp", self.nlp.hidden), ("vision", self.vision.hidden), ("fusion", self.fusion.hidden)] {
            if h == 0 {
                return Err(Error::invalid("config", format!("{name}.hidden must be positive")));
            }
        }
        if self.nlp.append_confidence {
            return Err(Error::invalid("config", "append_confidence only applies to fusion"));
        }
        for stage in [Stage::Nlp, Stage::Vision, Stage::Fusion] {
            self.train_config(stage).validate()?;
        }
        let t = &self.thresholds;
        if !(t.cosine > 0.0 && t.cosine <= 1.0) {
            return Err(Error::invalid("config", format!("thresholds.cosine {} not in (0, 1]", t.cosine)));
        }
        if !(0.0..=1.0).contains(&t.nms_iou) || t.nms_keep == 0 {
            return Err(Error::invalid("config", "thresholds.nms_iou must be in [0, 1] and nms_keep positive"));
        }
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_frac: self.split.train_frac,
            val_frac: self.split.val_frac,
            test_frac: self.split.test_frac,
            seed: stage_seed(self.seed, seed_offset::SPLIT),
        }
    }

    pub fn embed_seed(&self) -> u64 {
        stage_seed(self.seed, seed_offset::EMBED)
    }

    pub fn train_config(&self, stage: Stage) -> TrainConfig {
        match stage {
            Stage::Nlp => self.nlp.train.with_seed(stage_seed(self.seed, seed_offset::NLP)),
            Stage::Vision => self.vision.train.with_seed(stage_seed(self.seed, seed_offset::VISION)),
            Stage::Fusion => self.fusion.train.with_seed(stage_seed(self.seed, seed_offset::FUSION)),
        }
    }

    pub fn checkpoint_path(&self, stage: Stage) -> PathBuf {
        self.paths.checkpoints_dir.join(format!("{}.ckpt", stage.name()))
    }

    pub fn metrics_path(&self, stage: Stage) -> PathBuf {
        self.paths.checkpoints_dir.join(format!("{}.metrics.jsonl", stage.name()))
    }
}
