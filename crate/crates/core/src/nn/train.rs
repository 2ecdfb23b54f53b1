use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::ModelCheckpoint;
use super::loss::token_loss;
use super::matrix::Matrix;
use super::model::Model;
use super::optim::{Optimizer, OptimizerKind};
use crate::{Error, Label, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Optimizer steps.
    pub iterations: usize,
    /// Minimum tokens per step; whole documents are added until it is reached.
    pub batch_size_tokens: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Global L2 norm the averaged gradient is clipped to.
    pub clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 300,
            batch_size_tokens: 2000,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            clip_norm: 5.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("train config", "iterations must be positive"));
        }
        if self.batch_size_tokens == 0 {
            return Err(Error::invalid("train config", "batch_size_tokens must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::invalid(
                "train config",
                format!("learning_rate {} must be finite and >= 0", self.learning_rate),
            ));
        }
        if !(self.clip_norm.is_finite() && self.clip_norm > 0.0) {
            return Err(Error::invalid(
                "train config",
                format!("clip_norm {} must be positive", self.clip_norm),
            ));
        }
        Ok(())
    }
}

/// One training sequence: input rows and their gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub inputs: Matrix,
    pub gold: Vec<Label>,
}

impl Sample {
    pub fn new(inputs: Matrix, gold: Vec<Label>) -> Result<Self> {
        if inputs.rows() != gold.len() {
            return Err(Error::Length(format!(
                "{} input rows, {} labels",
                inputs.rows(),
                gold.len()
            )));
        }
        Ok(Sample { inputs, gold })
    }

    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Mean token loss of the batch, before the update.
    pub train_loss: f64,
    /// Mean token loss on the fixed validation subset, after the update.
    pub val_loss: Option<f64>,
    /// Global norm of the averaged gradient before clipping.
    pub grad_norm: f64,
    pub tokens: usize,
}

/// Trains `model` and wraps the result in a checkpoint.
pub fn train<M: Model>(model: M, train_set: &[Sample], val_set: &[Sample], cfg: &TrainConfig) -> Result<ModelCheckpoint> {
    let (model, history) = train_with(model, train_set, val_set, cfg, |_| {})?;
    Ok(ModelCheckpoint::from_model(&model, cfg.clone(), history))
}

/// Trains in place, reporting every step to `on_step`.
pub fn train_with<M: Model>(
    mut model: M,
    train_set: &[Sample],
    val_set: &[Sample],
    cfg: &TrainConfig,
    mut on_step: impl FnMut(&StepRecord),
) -> Result<(M, Vec<StepRecord>)> {
    cfg.validate()?;
    let docs: Vec<usize> = (0..train_set.len()).filter(|&i| !train_set[i].is_empty()).collect();
    if docs.is_empty() {
        return Err(Error::invalid("training set", "no non-empty sequences"));
    }
    let val_subset = validation_subset(val_set, cfg.batch_size_tokens);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = docs.clone();
    order.shuffle(&mut rng);
    let mut cursor = 0;

    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, &model.tensors());
    let mut grads = model.zeros_like();
    let mut history = Vec::with_capacity(cfg.iterations);

    for step in 1..=cfg.iterations {
        for g in grads.tensors_mut() {
            g.fill(0.0);
        }
        let mut tokens = 0;
        let mut loss = 0.0;
        let mut used = 0;
        while tokens < cfg.batch_size_tokens && used < docs.len() {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let s = &train_set[order[cursor]];
            cursor += 1;
            used += 1;
            loss += model.accumulate_gradients(&s.inputs, &s.gold, &mut grads)?;
            tokens += s.len();
        }
        let train_loss = loss / tokens as f64;
        if !train_loss.is_finite() {
            return Err(Error::Numerical {
                step,
                msg: format!("training loss is {train_loss}"),
            });
        }

        let inv = 1.0 / tokens as f64;
        let mut norm_sq = 0.0;
        for g in grads.tensors_mut() {
            g.scale(inv);
            norm_sq += g.norm_sq();
        }
        let grad_norm = norm_sq.sqrt();
        if !grad_norm.is_finite() {
            return Err(Error::Numerical {
                step,
                msg: format!("gradient norm is {grad_norm}"),
            });
        }
        if grad_norm > cfg.clip_norm {
            let s = cfg.clip_norm / grad_norm;
            for g in grads.tensors_mut() {
                g.scale(s);
            }
        }
        opt.apply(model.tensors_mut(), &grads.tensors());

        let val_loss = if val_subset.is_empty() {
            None
        } else {
            let v = mean_token_loss(&model, val_subset.iter().map(|&i| &val_set[i]))?;
            if !v.is_finite() {
                return Err(Error::Numerical {
                    step,
                    msg: format!("validation loss is {v}"),
                });
            }
            Some(v)
        };
        let rec = StepRecord {
            step,
            train_loss,
            val_loss,
            grad_norm,
            tokens,
        };
        on_step(&rec);
        history.push(rec);
    }
    Ok((model, history))
}

/// Leading validation sequences whose total length stays within `budget` (at least one).
fn validation_subset(val: &[Sample], budget: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut tokens = 0;
    for (i, s) in val.iter().enumerate() {
        if s.is_empty() {
            continue;
        }
        if !out.is_empty() && tokens + s.len() > budget {
            break;
        }
        tokens += s.len();
        out.push(i);
    }
    out
}

/// Mean cross-entropy over all tokens of `samples`.
pub fn mean_token_loss<'a, M: Model>(model: &M, samples: impl IntoIterator<Item = &'a Sample>) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in samples {
        if s.is_empty() {
            continue;
        }
        for (p, &g) in model.predict(&s.inputs)?.iter().zip(&s.gold) {
            sum += token_loss(p, g);
        }
        n += s.len();
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{BiLstmLabeler, Mlp};

    fn toy_data(n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                let len = 3 + k % 4;
                let x = Matrix::uniform(len, 4, 1.0, &mut rng);
                let gold = (0..len)
                    .map(|r| if x.get(r, 0) > 0.0 { Label::Title } else { Label::Author })
                    .collect();
                Sample::new(x, gold).unwrap()
            })
            .collect()
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            iterations: 12,
            batch_size_tokens: 20,
            learning_rate: 1e-2,
            seed: 7,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!(c.iterations, 300);
        assert_eq!(c.batch_size_tokens, 2000);
        assert_eq!(c.optimizer, OptimizerKind::Adam);
        assert_eq!(c.clip_norm, 5.0);
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for c in [
            TrainConfig { iterations: 0, ..TrainConfig::default() },
            TrainConfig { batch_size_tokens: 0, ..TrainConfig::default() },
            TrainConfig { learning_rate: -1.0, ..TrainConfig::default() },
            TrainConfig { clip_norm: 0.0, ..TrainConfig::default() },
        ] {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let data = toy_data(10, 1);
        let m = BiLstmLabeler::init(4, 3, &mut ChaCha8Rng::seed_from_u64(2));
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let cfg = TrainConfig {
                learning_rate: 0.0,
                optimizer: kind,
                ..small_cfg()
            };
            let (out, hist) = train_with(m.clone(), &data, &[], &cfg, |_| {}).unwrap();
            assert_eq!(out, m);
            assert_eq!(hist.len(), 12);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = toy_data(10, 1);
        let m = BiLstmLabeler::init(4, 3, &mut ChaCha8Rng::seed_from_u64(2));
        let a = train(m.clone(), &data, &data[..3], &small_cfg()).unwrap();
        let b = train(m, &data, &data[..3], &small_cfg()).unwrap();
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
    }

    #[test]
    fn batches_reach_the_token_budget_without_splitting() {
        let data = toy_data(10, 1);
        let m = Mlp::init(4, 5, &mut ChaCha8Rng::seed_from_u64(2));
        let (_, hist) = train_with(m, &data, &[], &small_cfg(), |_| {}).unwrap();
        for r in &hist {
            assert!(r.tokens >= 20 && r.tokens < 20 + 6, "{}", r.tokens);
            assert!(r.val_loss.is_none());
        }
    }

    #[test]
    fn learns_a_separable_toy_task() {
        let data = toy_data(40, 3);
        let m = Mlp::init(4, 8, &mut ChaCha8Rng::seed_from_u64(4));
        let cfg = TrainConfig {
            iterations: 200,
            learning_rate: 0.05,
            ..small_cfg()
        };
        let (_, hist) = train_with(m, &data, &data[..5], &cfg, |_| {}).unwrap();
        assert!(hist.last().unwrap().val_loss.unwrap() < 0.2 * hist[0].val_loss.unwrap());
    }

    #[test]
    fn nan_input_aborts_with_step() {
        let mut data = toy_data(4, 1);
        data[0].inputs.set(0, 0, f64::NAN);
        data[1].inputs.set(0, 0, f64::NAN);
        data[2].inputs.set(0, 0, f64::NAN);
        data[3].inputs.set(0, 0, f64::NAN);
        let m = Mlp::init(4, 5, &mut ChaCha8Rng::seed_from_u64(2));
        let err = train_with(m, &data, &[], &small_cfg(), |_| {}).unwrap_err();
        assert!(matches!(err, Error::Numerical { step: 1, .. }), "{err}");
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let m = Mlp::init(4, 5, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(train_with(m, &[], &[], &small_cfg(), |_| {}).is_err());
    }
}
