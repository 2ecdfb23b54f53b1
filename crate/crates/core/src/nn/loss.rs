use crate::{Error, Label, ProbDist10, Result, NUM_CLASSES};

/// Probabilities are floored here before taking the log.
pub const LOSS_FLOOR: f64 = 1e-12;

pub fn softmax(scores: &[f64]) -> ProbDist10 {
    debug_assert_eq!(scores.len(), NUM_CLASSES);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; NUM_CLASSES];
    let mut sum = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
    out
}

pub fn token_loss(p: &ProbDist10, gold: Label) -> f64 {
    let q = p[gold.index()];
    if q.is_nan() {
        return f64::NAN;
    }
    -q.max(LOSS_FLOOR).ln()
}

/// Mean negative log-likelihood of the gold labels.
pub fn cross_entropy(probs: &[ProbDist10], gold: &[Label]) -> Result<f64> {
    if probs.len() != gold.len() {
        return Err(Error::Length(format!(
            "{} distributions for {} labels",
            probs.len(),
            gold.len()
        )));
    }
    if probs.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = probs.iter().zip(gold).map(|(p, &g)| token_loss(p, g)).sum();
    Ok(sum / probs.len() as f64)
}

/// d(token_loss)/d(scores) for softmax probabilities `p`.
pub(crate) fn score_gradient(p: &ProbDist10, gold: Label) -> ProbDist10 {
    let mut d = *p;
    if p[gold.index()] < LOSS_FLOOR {
        // The floor is active: the loss is locally constant.
        return [0.0; NUM_CLASSES];
    }
    d[gold.index()] -= 1.0;
    d
}
