use std::fmt::Write as _;

use serde::Serialize;

use crate::{Error, Label, Result, NUM_CLASSES};

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassPrf {
    pub label: Label,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Averages {
    pub mode: &'static str,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// One row per class (all ten), plus micro and macro averages over the nine
/// metadata classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrfReport {
    pub classes: Vec<ClassPrf>,
    pub micro: Averages,
    #[serde(rename = "macro")]
    pub macro_: Averages,
}

impl PrfReport {
    pub fn class(&self, label: Label) -> &ClassPrf {
        &self.classes[label.index()]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for a in [&self.micro, &self.macro_] {
            let _ = writeln!(
                s,
                "{:<14} {:>9.3} {:>9.3} {:>9.3} {:>8}",
                format!("overall/{}", a.mode),
                a.precision,
                a.recall,
                a.f1,
                ""
            );
        }
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<14} {:>9.3} {:>9.3} {:>9.3} {:>8}",
                c.label.name(),
                c.precision,
                c.recall,
                c.f1,
                c.support
            );
        }
        s
    }
}

pub fn token_prf(pred: &[Vec<Label>], gold: &[Vec<Label>]) -> Result<PrfReport> {
    if pred.len() != gold.len() {
        return Err(Error::Length(format!("{} predicted documents, {} gold", pred.len(), gold.len())));
    }
    let mut tp = [0usize; NUM_CLASSES];
    let mut fp = [0usize; NUM_CLASSES];
    let mut fn_ = [0usize; NUM_CLASSES];
    for (k, (p, g)) in pred.iter().zip(gold).enumerate() {
        if p.len() != g.len() {
            return Err(Error::Length(format!(
                "document {k}: {} predicted labels, {} gold",
                p.len(),
                g.len()
            )));
        }
        for (&a, &b) in p.iter().zip(g) {
            if a == b {
                tp[a.index()] += 1;
            } else {
                fp[a.index()] += 1;
                fn_[b.index()] += 1;
            }
        }
    }
    let classes: Vec<ClassPrf> = Label::ALL
        .iter()
        .map(|&l| {
            let i = l.index();
            let precision = ratio(tp[i], tp[i] + fp[i]);
            let recall = ratio(tp[i], tp[i] + fn_[i]);
            ClassPrf {
                label: l,
                tp: tp[i],
                fp: fp[i],
                fn_: fn_[i],
                support: tp[i] + fn_[i],
                precision,
                recall,
                f1: f1(precision, recall),
            }
        })
        .collect();
    let meta: Vec<&ClassPrf> = Label::METADATA.iter().map(|l| &classes[l.index()]).collect();
    let (stp, sfp, sfn) = meta
        .iter()
        .fold((0, 0, 0), |(a, b, c), r| (a + r.tp, b + r.fp, c + r.fn_));
    let (mp, mr) = (ratio(stp, stp + sfp), ratio(stp, stp + sfn));
    let n = meta.len() as f64;
    Ok(PrfReport {
        micro: Averages {
            mode: "micro",
            precision: mp,
            recall: mr,
            f1: f1(mp, mr),
        },
        macro_: Averages {
            mode: "macro",
            precision: meta.iter().map(|r| r.precision).sum::<f64>() / n,
            recall: meta.iter().map(|r| r.recall).sum::<f64>() / n,
            f1: meta.iter().map(|r| r.f1).sum::<f64>() / n,
        },
        classes,
    })
}
