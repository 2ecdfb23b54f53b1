use serde::{Deserialize, Serialize};

use crate::corpus::Rect;
use crate::LabeledDocument;

/// Whitespace segmentation thresholds, both in units of font size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    /// A line is cut where the horizontal gap exceeds this many font sizes.
    pub split_gap_factor: f64,
    /// Vertically adjacent pieces merge when their gap is below this multiple of
    /// the median gap.
    pub merge_gap_factor: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            split_gap_factor: 1.5,
            merge_gap_factor: 1.8,
        }
    }
}

/// A group of token indices (ascending) and their bounding rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub tokens: Vec<usize>,
    pub rect: Rect,
}

struct Piece {
    tokens: Vec<usize>,
    rect: Rect,
    line: usize,
    font: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Splits lines at wide horizontal gaps, then merges each piece with the nearest
/// horizontally overlapping piece above it when their vertical whitespace,
/// measured in font sizes, is below `merge_gap_factor` times the page median.
/// Every token lands in exactly one segment; segments are in reading order.
pub fn segment_regions(doc: &LabeledDocument, cfg: &SegmentConfig) -> Vec<Segment> {
    let toks = &doc.tokens;
    let mut pieces: Vec<Piece> = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        let rect = Rect::new(t.x, t.y, t.width, t.height);
        if let Some(p) = pieces.last_mut() {
            let prev = &toks[*p.tokens.last().expect("pieces are non-empty")];
            let gap_pt = (t.x - prev.right()) * doc.page_width_pt;
            if prev.line_index == t.line_index && gap_pt <= cfg.split_gap_factor * prev.font_size.max(t.font_size) {
                p.tokens.push(i);
                p.rect = p.rect.union(&rect);
                p.font = p.font.max(t.font_size);
                continue;
            }
        }
        pieces.push(Piece {
            tokens: vec![i],
            rect,
            line: t.line_index,
            font: t.font_size,
        });
    }

    // Nearest overlapping piece above each piece, with the normalized gap.
    let mut links: Vec<(usize, usize, f64)> = Vec::new();
    for (j, pj) in pieces.iter().enumerate() {
        let mut best: Option<usize> = None;
        for (i, pi) in pieces.iter().enumerate() {
            let overlaps = pi.rect.x < pj.rect.right() && pj.rect.x < pi.rect.right();
            if pi.line >= pj.line || !overlaps {
                continue;
            }
            if best.is_none_or(|b| pi.rect.bottom() > pieces[b].rect.bottom()) {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            let pi = &pieces[i];
            let gap_pt = (pj.rect.y - pi.rect.bottom()) * doc.page_height_pt;
            links.push((i, j, gap_pt / ((pi.font + pj.font) / 2.0)));
        }
    }
    let mut parent: Vec<usize> = (0..pieces.len()).collect();
    if !links.is_empty() {
        let mut gaps: Vec<f64> = links.iter().map(|l| l.2).collect();
        gaps.sort_by(f64::total_cmp);
        let m = gaps.len();
        let median = if m % 2 == 1 {
            gaps[m / 2]
        } else {
            (gaps[m / 2 - 1] + gaps[m / 2]) / 2.0
        };
        let limit = cfg.merge_gap_factor * median;
        for &(i, j, g) in &links {
            if g < limit {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut groups: Vec<Option<Segment>> = (0..pieces.len()).map(|_| None).collect();
    for (k, p) in pieces.into_iter().enumerate() {
        let root = find(&mut parent, k);
        match &mut groups[root] {
            Some(s) => {
                s.tokens.extend(p.tokens);
                s.rect = s.rect.union(&p.rect);
            }
            slot => {
                *slot = Some(Segment {
                    tokens: p.tokens,
                    rect: p.rect,
                })
            }
        }
    }
    let mut out: Vec<Segment> = groups.into_iter().flatten().collect();
    for s in &mut out {
        s.tokens.sort_unstable();
    }
    out.sort_by_key(|s| s.tokens[0]);
    out
}
