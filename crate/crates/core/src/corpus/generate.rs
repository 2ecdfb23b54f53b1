//! Template-driven synthesis of labeled first pages.
//!
//! Geometry uses a fixed character model: every character is `0.5 * font_size` points
//! wide, lines are `1.2 * font_size` points apart, and words are separated by one
//! character width.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::template::Align;
use super::words::FILLER;
use super::{Label, LabeledDocument, LayoutTemplate, MetadataRecord, Token};
use crate::{mix_seed, Error, Result};

const CHAR_WIDTH: f64 = 0.5;
const LINE_HEIGHT: f64 = 1.2;
const FIT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub doc_id: String,
    pub template_id: String,
    pub warnings: Vec<String>,
    /// Classes whose content did not fully fit into their regions.
    pub truncated: Vec<Label>,
    /// Classes with non-empty record content that the template places.
    pub placed: Vec<Label>,
}

impl GenerationReport {
    pub fn placed_untruncated(&self, label: Label) -> bool {
        self.placed.contains(&label) && !self.truncated.contains(&label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDocument {
    pub document: LabeledDocument,
    pub report: GenerationReport,
}

struct Word {
    text: String,
    label: Label,
    marker: bool,
    /// Force a line break after this word.
    break_after: bool,
}

fn words_of(s: &str, label: Label) -> impl Iterator<Item = Word> + '_ {
    s.split_whitespace().map(move |w| Word {
        text: w.to_string(),
        label,
        marker: false,
        break_after: false,
    })
}

fn filler_text<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut since_stop = 0;
    for i in 0..n {
        let mut w = FILLER.choose(rng).copied().unwrap_or("und").to_string();
        if since_stop == 0 {
            let mut cs = w.chars();
            if let Some(c) = cs.next() {
                w = c.to_uppercase().chain(cs).collect();
            }
        }
        since_stop += 1;
        if i + 1 == n || (since_stop >= 6 && rng.gen_bool(0.25)) {
            w.push('.');
            since_stop = 0;
        }
        out.push(w);
    }
    out
}

/// Splits `items` into `k` contiguous chunks whose sizes differ by at most one.
fn chunks<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let n = items.len();
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = n / k + usize::from(i < n % k);
        out.push(items[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Lays out `record` on `template`. The result depends only on the three arguments.
pub fn generate_document(
    record: &MetadataRecord,
    template: &LayoutTemplate,
    seed: u64,
) -> Result<GeneratedDocument> {
    template.validate()?;
    record.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc_id = format!("{}-{seed:016x}", template.template_id);
    let mut report = GenerationReport {
        doc_id: doc_id.clone(),
        template_id: template.template_id.clone(),
        ..Default::default()
    };

    // Shift the whole layout, keeping every region on the page.
    let (mut dx, mut dy) = (0.0, 0.0);
    if template.jitter > 0.0 {
        let min_x = template.regions.iter().map(|r| r.rect.x).fold(f64::INFINITY, f64::min);
        let max_r = template.regions.iter().map(|r| r.rect.right()).fold(0.0, f64::max);
        let min_y = template.regions.iter().map(|r| r.rect.y).fold(f64::INFINITY, f64::min);
        let max_b = template.regions.iter().map(|r| r.rect.bottom()).fold(0.0, f64::max);
        let j = template.jitter;
        dx = rng.gen_range(-j..=j).clamp(-min_x, 1.0 - max_r);
        dy = rng.gen_range(-j..=j).clamp(-min_y, 1.0 - max_b);
    }

    // Distribute each field over the regions that carry its class, in fill order.
    let order = template.fill_order();
    let mut region_words: Vec<Vec<Word>> = (0..template.regions.len()).map(|_| Vec::new()).collect();
    for label in Label::METADATA {
        let regions: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| template.regions[i].label == label)
            .collect();
        let values = record.values(label);
        if values.is_empty() || regions.is_empty() {
            continue;
        }
        report.placed.push(label);
        let parts: Vec<Vec<String>> = if label.is_list_valued() {
            chunks(&values.iter().map(|v| v.to_string()).collect::<Vec<_>>(), regions.len())
        } else {
            let ws: Vec<String> = values[0].split_whitespace().map(str::to_string).collect();
            chunks(&ws, regions.len())
                .into_iter()
                .map(|c| if c.is_empty() { vec![] } else { vec![c.join(" ")] })
                .collect()
        };
        for (&ri, part) in regions.iter().zip(parts) {
            let sep = &template.regions[ri].separator;
            for (k, value) in part.iter().enumerate() {
                if k > 0 && !sep.is_empty() {
                    region_words[ri].push(Word {
                        text: sep.clone(),
                        label: Label::Unclassified,
                        marker: false,
                        break_after: false,
                    });
                }
                region_words[ri].extend(words_of(value, label));
            }
        }
    }
    for &ri in &order {
        let region = &template.regions[ri];
        if let (Label::Unclassified, Some([lo, hi])) = (region.label, region.filler_words) {
            let n = rng.gen_range(lo..=hi);
            region_words[ri] = filler_text(&mut rng, n)
                .into_iter()
                .map(|text| Word {
                    text,
                    label: Label::Unclassified,
                    marker: false,
                    break_after: false,
                })
                .collect();
        }
        if let Some(marker) = &region.marker {
            if !region_words[ri].is_empty() {
                let mut m: Vec<Word> = words_of(marker, Label::Unclassified)
                    .map(|mut w| {
                        w.marker = true;
                        w
                    })
                    .collect();
                if let Some(last) = m.last_mut() {
                    last.break_after = !region.marker_inline;
                }
                m.append(&mut region_words[ri]);
                region_words[ri] = m;
            }
        }
    }

    let pw = template.page_width_pt;
    let ph = template.page_height_pt;
    let mut tokens: Vec<(Token, Label)> = Vec::new();
    for &ri in &order {
        let region = &template.regions[ri];
        let words = std::mem::take(&mut region_words[ri]);
        if words.is_empty() {
            continue;
        }
        let rect = region.rect;
        let fs = region.font_size;
        let cw = CHAR_WIDTH * fs / pw;
        let th = fs / ph;
        let lh = LINE_HEIGHT * fs / ph;
        let fits_line = |k: usize| k as f64 * lh + th <= rect.h + FIT_EPS;

        // (word, offset within line, width) per line
        let mut lines: Vec<Vec<(Word, f64, f64)>> = vec![Vec::new()];
        let mut line_w = 0.0;
        let mut force_break = false;
        let mut stopped_at: Option<Label> = None;
        for word in words {
            let w = word.text.chars().count() as f64 * cw;
            let cur_empty = lines.last().is_some_and(|l| l.is_empty());
            if !cur_empty && (force_break || line_w + cw + w > rect.w + FIT_EPS) {
                lines.push(Vec::new());
                line_w = 0.0;
            }
            if w > rect.w + FIT_EPS || !fits_line(lines.len() - 1) {
                stopped_at = Some(word.label);
                break;
            }
            let line = lines.last_mut().expect("at least one line");
            let offset = if line.is_empty() { 0.0 } else { line_w + cw };
            line_w = offset + w;
            force_break = word.break_after;
            line.push((word, offset, w));
        }
        if let Some(stop) = stopped_at {
            let label = if stop == Label::Unclassified { region.label } else { stop };
            let label = if label == Label::Unclassified {
                // filler overflow is silent
                None
            } else {
                Some(label)
            };
            if let Some(label) = label {
                if !report.truncated.contains(&label) {
                    report.truncated.push(label);
                }
                report.warnings.push(format!(
                    "region {ri} ({label}): content does not fit, truncated"
                ));
            }
        }
        for (k, line) in lines.into_iter().enumerate() {
            let used = line.last().map_or(0.0, |(_, o, w)| o + w);
            let shift = match region.align {
                Align::Left => 0.0,
                Align::Center => (rect.w - used) / 2.0,
                Align::Right => rect.w - used,
            }
            .max(0.0);
            let y = rect.y + dy + k as f64 * lh;
            for (word, offset, w) in line {
                tokens.push((
                    Token {
                        x: rect.x + dx + shift + offset,
                        y,
                        width: w,
                        height: th,
                        font_size: fs,
                        bold: region.bold || word.marker,
                        italic: region.italic && !word.marker,
                        line_index: 0,
                        text: word.text,
                    },
                    word.label,
                ));
            }
        }
    }

    for label in report.placed.clone() {
        if !tokens.iter().any(|(_, l)| *l == label) {
            report
                .warnings
                .push(format!("{label}: region too small, nothing placed"));
        }
    }

    // Lines are the distinct token tops; reading order is (line, x).
    let mut tops: Vec<f64> = tokens.iter().map(|(t, _)| t.y).collect();
    tops.sort_by(f64::total_cmp);
    tops.dedup();
    for (t, _) in &mut tokens {
        t.line_index = tops.partition_point(|&y| y < t.y);
    }
    tokens.sort_by(|(a, _), (b, _)| {
        a.line_index
            .cmp(&b.line_index)
            .then(a.x.total_cmp(&b.x))
    });

    let (tokens, labels): (Vec<Token>, Vec<Label>) = tokens.into_iter().unzip();
    let document = LabeledDocument {
        doc_id,
        page_width_pt: pw,
        page_height_pt: ph,
        tokens,
        labels,
        template_id: Some(template.template_id.clone()),
    };
    document.validate()?;
    Ok(GeneratedDocument { document, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub seed: u64,
    /// (template_id, documents generated)
    pub per_template: Vec<(String, usize)>,
    pub total: usize,
    pub documents: Vec<String>,
    pub warnings: Vec<(String, String)>,
}

/// Generates `counts[t]` documents for template `t`. Document `j` of every template
/// uses record `j mod |records|`, and ids are `<template_id>-<j:05>`.
pub fn generate_corpus(
    records: &[MetadataRecord],
    templates: &[LayoutTemplate],
    counts: &[usize],
    seed: u64,
) -> Result<(Vec<GeneratedDocument>, CorpusManifest)> {
    if records.is_empty() {
        return Err(Error::invalid("corpus", "no records"));
    }
    if counts.len() != templates.len() {
        return Err(Error::Length(format!(
            "{} counts for {} templates",
            counts.len(),
            templates.len()
        )));
    }
    let mut docs = Vec::with_capacity(counts.iter().sum());
    let mut manifest = CorpusManifest {
        seed,
        per_template: Vec::new(),
        total: 0,
        documents: Vec::new(),
        warnings: Vec::new(),
    };
    for (t, (template, &count)) in templates.iter().zip(counts).enumerate() {
        for j in 0..count {
            let doc_seed = mix_seed(seed, ((t as u64) << 32) | j as u64);
            let mut g = generate_document(&records[j % records.len()], template, doc_seed)?;
            let id = format!("{}-{j:05}", template.template_id);
            g.document.doc_id = id.clone();
            g.report.doc_id = id.clone();
            for w in &g.report.warnings {
                manifest.warnings.push((id.clone(), w.clone()));
            }
            manifest.documents.push(id);
            docs.push(g);
        }
        manifest.per_template.push((template.template_id.clone(), count));
    }
    manifest.total = docs.len();
    Ok((docs, manifest))
}
