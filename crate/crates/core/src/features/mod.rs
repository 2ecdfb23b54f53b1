//! Per-token input vectors for the NLP labeler: 16 layout features followed by a
//! word embedding.
//!
//! Layout feature order:
//!
//! | # | feature |
//! |---|---------|
//! | 0 | horizontal gap to the previous token on the same line / page width |
//! | 1 | vertical gap to the previous line / page height |
//! | 2 | font size / modal font size of the document |
//! | 3 | line index / number of lines |
//! | 4 | left x |
//! | 5 | top y |
//! | 6 | bold |
//! | 7 | italic |
//! | 8 | digits / characters |
//! | 9 | uppercase letters / characters |
//! | 10 | count of `@` |
//! | 11 | count of `.` |
//! | 12 | count of `/` |
//! | 13 | count of `-` |
//! | 14 | date format flag |
//! | 15 | email format flag |
//!
//! Continuous entries are clamped to `[-1, 2]`. Normalizers (modal font size, line
//! count) are computed per document.

mod embed;

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;

use regex::Regex;

use crate::corpus::LabeledDocument;
use crate::nn::Matrix;
use crate::{Error, Result};

pub use embed::{hashing_embedder, Embedder, HashingEmbedder};

pub const LAYOUT_DIM: usize = 16;

pub type LayoutFeatures = [f64; LAYOUT_DIM];

/// Per-document normalizers shared by all tokens.
#[derive(Debug, Clone)]
pub struct DocumentStats {
    pub modal_font_size: f64,
    pub line_count: usize,
    line_bottoms: BTreeMap<usize, f64>,
}

impl DocumentStats {
    pub fn new(doc: &LabeledDocument) -> Self {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        let mut line_bottoms: BTreeMap<usize, f64> = BTreeMap::new();
        for t in &doc.tokens {
            *counts.entry(t.font_size.to_bits()).or_default() += 1;
            let b = line_bottoms.entry(t.line_index).or_insert(f64::NEG_INFINITY);
            *b = b.max(t.bottom());
        }
        // Most frequent size; ties go to the smaller size.
        let modal_font_size = counts
            .iter()
            .map(|(&bits, &n)| (f64::from_bits(bits), n))
            .fold(None, |best: Option<(f64, usize)>, (fs, n)| match best {
                Some((bfs, bn)) if bn > n || (bn == n && bfs <= fs) => Some((bfs, bn)),
                _ => Some((fs, n)),
            })
            .map_or(1.0, |(fs, _)| fs);
        DocumentStats {
            modal_font_size,
            line_count: doc.line_count(),
            line_bottoms,
        }
    }

    fn previous_line_bottom(&self, line: usize) -> Option<f64> {
        self.line_bottoms.range(..line).next_back().map(|(_, &b)| b)
    }
}

fn date_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(?:\d{1,2}[./-]\d{1,2}[./-]\d{2,4}|(?:18|19|20)\d{2})$").expect("date regex")
    })
}

fn email_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\S+@\S+\.\S+$").expect("email regex"))
}

const TRIM: &[char] = &[',', ';', ':', '(', ')', '[', ']', '"', '\''];

pub fn is_date(text: &str) -> bool {
    date_regex().is_match(text.trim_matches(TRIM))
}

pub fn is_email(text: &str) -> bool {
    email_regex().is_match(text.trim_matches(TRIM))
}

fn clamp(v: f64) -> f64 {
    if v.is_finite() {
        v.clamp(-1.0, 2.0)
    } else {
        0.0
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// The 16 layout features of token `i`. Panics if `i` is out of range.
pub fn extract_layout_features(doc: &LabeledDocument, i: usize) -> LayoutFeatures {
    layout_features_with(doc, &DocumentStats::new(doc), i)
}

pub fn layout_features_with(doc: &LabeledDocument, stats: &DocumentStats, i: usize) -> LayoutFeatures {
    let t = &doc.tokens[i];
    let prev_same_line = i
        .checked_sub(1)
        .map(|p| &doc.tokens[p])
        .filter(|p| p.line_index == t.line_index);
    let h_gap = prev_same_line.map_or(0.0, |p| t.x - p.right());
    let v_gap = stats
        .previous_line_bottom(t.line_index)
        .map_or(0.0, |b| t.y - b);
    let rel_font = t.font_size / stats.modal_font_size;
    let rel_line = if stats.line_count == 0 {
        0.0
    } else {
        t.line_index as f64 / stats.line_count as f64
    };

    let n_chars = t.text.chars().count().max(1) as f64;
    let digits = t.text.chars().filter(char::is_ascii_digit).count() as f64;
    let upper = t.text.chars().filter(|c| c.is_uppercase()).count() as f64;
    let count = |ch: char| t.text.chars().filter(|&c| c == ch).count() as f64;

    [
        clamp(h_gap),
        clamp(v_gap),
        clamp(rel_font),
        clamp(rel_line),
        clamp(t.x),
        clamp(t.y),
        flag(t.bold),
        flag(t.italic),
        clamp(digits / n_chars),
        clamp(upper / n_chars),
        clamp(count('@')),
        clamp(count('.')),
        clamp(count('/')),
        clamp(count('-')),
        flag(is_date(&t.text)),
        flag(is_email(&t.text)),
    ]
}

/// Per-token vectors of dimension `16 + E`, one row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub vectors: Matrix,
}

impl FeatureSequence {
    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }
}

pub fn build_feature_sequence(doc: &LabeledDocument, emb: &dyn Embedder) -> Result<FeatureSequence> {
    if doc.is_empty() {
        return Err(Error::invalid("document", format!("{}: no tokens", doc.doc_id)));
    }
    let stats = DocumentStats::new(doc);
    let texts = doc.texts();
    let dim = LAYOUT_DIM + emb.dim();
    let mut data = Vec::with_capacity(doc.len() * dim);
    for i in 0..doc.len() {
        data.extend_from_slice(&layout_features_with(doc, &stats, i));
        let e = emb.embed(texts[i], &texts[..i], &texts[i + 1..]);
        debug_assert_eq!(e.len(), emb.dim());
        data.extend(e);
    }
    Ok(FeatureSequence {
        vectors: Matrix::from_vec(doc.len(), dim, data)?,
    })
}

/// One row per token, comma separated.
pub fn write_feature_dump<W: Write>(mut out: W, seq: &FeatureSequence) -> Result<()> {
    for r in 0..seq.len() {
        let row: Vec<String> = seq.vectors.row(r).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
