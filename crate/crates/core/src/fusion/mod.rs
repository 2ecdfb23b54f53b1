//! Late fusion: per token, the NLP and vision distributions are concatenated and
//! relabeled by a second biLSTM.

use crate::nn::{bilstm_forward, BiLstmLabeler, Matrix};
use crate::{argmax, Error, Label, LabeledDocument, MetadataRecord, ProbDist10, Result, NUM_CLASSES};

pub const FUSED_DIM: usize = 2 * NUM_CLASSES;

/// Per-token `[nlp ; vision]` vectors, optionally followed by the two halves'
/// maximum probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedSequence {
    pub vectors: Matrix,
}

impl FusedSequence {
    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn nlp(&self, t: usize) -> ProbDist10 {
        self.vectors.row(t)[..NUM_CLASSES].try_into().expect("ten entries")
    }

    pub fn vision(&self, t: usize) -> ProbDist10 {
        self.vectors.row(t)[NUM_CLASSES..FUSED_DIM].try_into().expect("ten entries")
    }
}

pub fn fused_dim(append_confidence: bool) -> usize {
    if append_confidence {
        FUSED_DIM + 2
    } else {
        FUSED_DIM
    }
}

pub fn fuse(nlp: &[ProbDist10], vision: &[ProbDist10]) -> Result<FusedSequence> {
    fuse_with(nlp, vision, false)
}

pub fn fuse_with(nlp: &[ProbDist10], vision: &[ProbDist10], append_confidence: bool) -> Result<FusedSequence> {
    if nlp.len() != vision.len() {
        return Err(Error::Length(format!(
            "{} NLP distributions, {} vision distributions",
            nlp.len(),
            vision.len()
        )));
    }
    let dim = fused_dim(append_confidence);
    let mut vectors = Matrix::zeros(nlp.len(), dim);
    for (t, (a, b)) in nlp.iter().zip(vision).enumerate() {
        let row = vectors.row_mut(t);
        row[..NUM_CLASSES].copy_from_slice(a);
        row[NUM_CLASSES..FUSED_DIM].copy_from_slice(b);
        if append_confidence {
            row[FUSED_DIM] = a.iter().copied().fold(0.0, f64::max);
            row[FUSED_DIM + 1] = b.iter().copied().fold(0.0, f64::max);
        }
    }
    Ok(FusedSequence { vectors })
}

/// Runs the fusion labeler; labels are argmax with ties to the lowest class.
pub fn predict_labels(p: &BiLstmLabeler, fused: &FusedSequence) -> Result<Vec<(Label, ProbDist10)>> {
    Ok(bilstm_forward(p, &fused.vectors)?
        .probs
        .into_iter()
        .map(|d| (Label::from_index(argmax(&d)).expect("class index"), d))
        .collect())
}

/// Builds a record from token labels. Maximal runs of one label (in reading
/// order) are joined with single spaces; each run of a list-valued class is its
/// own entry, runs of a scalar class are concatenated.
pub fn extract_record(doc: &LabeledDocument, labels: &[Label]) -> Result<MetadataRecord> {
    if labels.len() != doc.len() {
        return Err(Error::Length(format!(
            "{}: {} tokens but {} labels",
            doc.doc_id,
            doc.len(),
            labels.len()
        )));
    }
    let mut rec = MetadataRecord::default();
    let mut t = 0;
    while t < labels.len() {
        let l = labels[t];
        let start = t;
        while t < labels.len() && labels[t] == l {
            t += 1;
        }
        if l != Label::Unclassified {
            let words: Vec<&str> = doc.tokens[start..t].iter().map(|k| k.text.as_str()).collect();
            rec.push(l, words.join(" "));
        }
    }
    Ok(rec)
}
