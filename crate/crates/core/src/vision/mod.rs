//! Page-geometry classifier: whitespace segmentation into regions, a small
//! feed-forward classifier per region, non-maximum suppression, and the mapping
//! from region distributions back onto words.
//!
//! External detectors plug in through [`import_page_predictions`]; everything
//! downstream only sees a [`PagePrediction`].

mod interchange;
mod segment;

use serde::{Deserialize, Serialize};

pub use interchange::{
    export_page_predictions, import_page_predictions, read_page_predictions, write_page_predictions,
};
pub use segment::{segment_regions, Segment, SegmentConfig};

use crate::corpus::{Rect, Token};
use crate::features::DocumentStats;
use crate::nn::{Matrix, Mlp, Model, Sample};
use crate::{argmax, one_hot, Error, Label, LabeledDocument, ProbDist10, Result, NUM_CLASSES};

pub const REGION_FEATURE_DIM: usize = 12;
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
pub const DEFAULT_KEEP: usize = 100;

/// Class evidence attached to a region.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionScores {
    /// Non-negative per-class scores in class index order; normalized on use.
    Scores(ProbDist10),
    /// A single detection; the remaining mass is spread over the other classes.
    Single { label: Label, confidence: f64 },
}

impl RegionScores {
    pub fn distribution(&self) -> ProbDist10 {
        match *self {
            RegionScores::Scores(s) => {
                let sum: f64 = s.iter().sum();
                if sum > 0.0 {
                    s.map(|v| v / sum)
                } else {
                    crate::UNIFORM
                }
            }
            RegionScores::Single { label, confidence } => {
                let rest = (1.0 - confidence) / (NUM_CLASSES - 1) as f64;
                let mut d = [rest; NUM_CLASSES];
                d[label.index()] = confidence;
                d
            }
        }
    }

    /// Ranking score for suppression: the largest normalized class probability.
    pub fn max_score(&self) -> f64 {
        self.distribution().iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Native,
    Imported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub rect: Rect,
    pub scores: RegionScores,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PagePrediction {
    pub doc_id: String,
    pub page_width_pt: f64,
    pub page_height_pt: f64,
    pub regions: Vec<Region>,
    pub detector: String,
}

pub type RegionFeatures = [f64; REGION_FEATURE_DIM];

fn token_rect(t: &Token) -> Rect {
    Rect::new(t.x, t.y, t.width, t.height)
}

/// Geometry and typography summary of one segment:
/// center x, center y, width, height, area, ln(1 + tokens), mean font size
/// relative to the modal size, bold fraction, italic fraction, digit fraction of
/// characters, '@' presence, and lines spanned over total page lines.
pub fn region_features(doc: &LabeledDocument, stats: &DocumentStats, seg: &Segment) -> RegionFeatures {
    let r = seg.rect;
    let n = seg.tokens.len().max(1) as f64;
    let mut font = 0.0;
    let (mut bold, mut italic, mut digits, mut chars) = (0.0, 0.0, 0usize, 0usize);
    let mut at = false;
    let mut lines: Vec<usize> = Vec::new();
    for &i in &seg.tokens {
        let t = &doc.tokens[i];
        font += t.font_size / stats.modal_font_size;
        bold += f64::from(u8::from(t.bold));
        italic += f64::from(u8::from(t.italic));
        for c in t.text.chars() {
            chars += 1;
            digits += usize::from(c.is_ascii_digit());
            at |= c == '@';
        }
        lines.push(t.line_index);
    }
    lines.sort_unstable();
    lines.dedup();
    [
        r.x + r.w / 2.0,
        r.y + r.h / 2.0,
        r.w,
        r.h,
        r.area(),
        (1.0 + seg.tokens.len() as f64).ln(),
        font / n,
        bold / n,
        italic / n,
        if chars == 0 { 0.0 } else { digits as f64 / chars as f64 },
        f64::from(u8::from(at)),
        lines.len() as f64 / stats.line_count.max(1) as f64,
    ]
}

/// Most frequent gold label inside the segment; ties go to the lowest class index.
pub fn majority_label(labels: &[Label], seg: &Segment) -> Label {
    let mut counts = [0.0; NUM_CLASSES];
    for &i in &seg.tokens {
        counts[labels[i].index()] += 1.0;
    }
    Label::from_index(argmax(&counts)).expect("argmax is a class index")
}

pub fn classify_region(m: &Mlp, f: &RegionFeatures) -> Result<ProbDist10> {
    m.forward(f)
}

/// One training sample per document: a row of region features per segment,
/// labeled with the segment's majority gold label.
pub fn region_sample(doc: &LabeledDocument, cfg: &SegmentConfig) -> Result<Sample> {
    let segs = segment_regions(doc, cfg);
    let stats = DocumentStats::new(doc);
    let mut x = Matrix::zeros(segs.len(), REGION_FEATURE_DIM);
    let mut gold = Vec::with_capacity(segs.len());
    for (k, s) in segs.iter().enumerate() {
        x.row_mut(k).copy_from_slice(&region_features(doc, &stats, s));
        gold.push(majority_label(&doc.labels, s));
    }
    Sample::new(x, gold)
}

/// Greedy non-maximum suppression by descending max-class score (ties keep the
/// earlier region). Regions overlapping a kept one with IoU above `iou_threshold`
/// are dropped; at most `keep` survive, in score order.
pub fn suppress(regions: Vec<Region>, iou_threshold: f64, keep: usize) -> Vec<Region> {
    let mut order: Vec<(f64, usize)> = regions.iter().map(|r| r.scores.max_score()).zip(0..).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut slots: Vec<Option<Region>> = regions.into_iter().map(Some).collect();
    let mut kept: Vec<Region> = Vec::new();
    for (_, i) in order {
        if kept.len() == keep {
            break;
        }
        let r = slots[i].take().expect("each index visited once");
        if kept.iter().all(|k| k.rect.iou(&r.rect) <= iou_threshold) {
            kept.push(r);
        }
    }
    kept
}

/// Per-token distribution: the overlap-area-weighted mean of the normalized
/// distributions of all regions touching the token box. Uncovered tokens get a
/// one-hot unclassified distribution.
pub fn word_probability_map(pred: &PagePrediction, doc: &LabeledDocument) -> Result<Vec<ProbDist10>> {
    if pred.doc_id != doc.doc_id {
        return Err(Error::invalid(
            "prediction",
            format!("doc_id {:?} does not match document {:?}", pred.doc_id, doc.doc_id),
        ));
    }
    let dists: Vec<ProbDist10> = pred.regions.iter().map(|r| r.scores.distribution()).collect();
    Ok(doc
        .tokens
        .iter()
        .map(|t| {
            let tr = token_rect(t);
            let mut acc = [0.0; NUM_CLASSES];
            let mut total = 0.0;
            for (r, d) in pred.regions.iter().zip(&dists) {
                let a = tr.intersection_area(&r.rect);
                if a > 0.0 {
                    total += a;
                    for (o, v) in acc.iter_mut().zip(d) {
                        *o += a * v;
                    }
                }
            }
            if total > 0.0 {
                acc.map(|v| v / total)
            } else {
                one_hot(Label::Unclassified)
            }
        })
        .collect())
}

/// The native surrogate detector: segmentation plus a region classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct VisionModel {
    pub classifier: Mlp,
    pub segment: SegmentConfig,
    pub iou_threshold: f64,
    pub keep: usize,
}

pub const VISION_HIDDEN: usize = 32;
pub const DETECTOR_NATIVE: &str = "native-surrogate";

impl VisionModel {
    pub fn new(classifier: Mlp) -> Self {
        VisionModel {
            classifier,
            segment: SegmentConfig::default(),
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            keep: DEFAULT_KEEP,
        }
    }

    pub fn predict_page(&self, doc: &LabeledDocument) -> Result<PagePrediction> {
        let stats = DocumentStats::new(doc);
        let mut regions = Vec::new();
        for s in segment_regions(doc, &self.segment) {
            let p = classify_region(&self.classifier, &region_features(doc, &stats, &s))?;
            regions.push(Region {
                rect: s.rect,
                scores: RegionScores::Scores(p),
                provenance: Provenance::Native,
            });
        }
        Ok(PagePrediction {
            doc_id: doc.doc_id.clone(),
            page_width_pt: doc.page_width_pt,
            page_height_pt: doc.page_height_pt,
            regions: suppress(regions, self.iou_threshold, self.keep),
            detector: DETECTOR_NATIVE.to_string(),
        })
    }

    pub fn predict(&self, doc: &LabeledDocument) -> Result<Vec<ProbDist10>> {
        word_probability_map(&self.predict_page(doc)?, doc)
    }

    /// Fraction of segments whose argmax class equals their majority gold label.
    pub fn region_accuracy(&self, docs: &[LabeledDocument]) -> Result<f64> {
        let (mut hit, mut n) = (0usize, 0usize);
        for d in docs {
            let s = region_sample(d, &self.segment)?;
            for (p, g) in self.classifier.predict(&s.inputs)?.iter().zip(&s.gold) {
                hit += usize::from(argmax(p) == g.index());
                n += 1;
            }
        }
        Ok(if n == 0 { 0.0 } else { hit as f64 / n as f64 })
    }
}

#[cfg(test)]
mod tests;
