use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Label;
use crate::{Error, Result};

/// Axis-aligned rectangle in page-relative coordinates (origin top-left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Smallest rectangle containing both.
    pub fn union(&self, other: &Rect) -> Rect {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        Rect::new(x, y, self.right().max(other.right()) - x, self.bottom().max(other.bottom()) - y)
    }

    pub fn within_unit_page(&self) -> bool {
        const EPS: f64 = 1e-9;
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite())
            && self.x >= -EPS
            && self.y >= -EPS
            && self.w > 0.0
            && self.h > 0.0
            && self.right() <= 1.0 + EPS
            && self.bottom() <= 1.0 + EPS
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Align {
    #[default]
    Left,
    Center,
    Right,
}

fn default_separator() -> String {
    ",".to_string()
}

/// One box of a layout template that receives a record field (or filler text).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateRegion {
    pub label: Label,
    pub rect: Rect,
    pub font_size: f64,
    #[serde(default)]
    pub bold: bool,
    #[serde(default)]
    pub italic: bool,
    /// Words printed (bold, unclassified) before the content, e.g. "Zusammenfassung".
    #[serde(default)]
    pub marker: Option<String>,
    /// Keep the marker on the content's first line instead of its own line.
    #[serde(default)]
    pub marker_inline: bool,
    #[serde(default)]
    pub align: Align,
    /// Unclassified token placed between list entries.
    #[serde(default = "default_separator")]
    pub separator: String,
    /// Inclusive word-count range; only for `unclassified` filler regions.
    #[serde(default)]
    pub filler_words: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutTemplate {
    pub template_id: String,
    pub page_width_pt: f64,
    pub page_height_pt: f64,
    pub regions: Vec<TemplateRegion>,
    /// Region indices in fill order; listed order when absent.
    #[serde(default)]
    pub fill_order: Option<Vec<usize>>,
    /// Maximum seeded shift of the whole layout, page-relative.
    #[serde(default)]
    pub jitter: f64,
}

impl LayoutTemplate {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::invalid("template", format!("{}: {msg}", self.template_id));
        if self.template_id.is_empty() {
            return Err(Error::invalid("template", "empty template_id"));
        }
        if !(self.page_width_pt > 0.0 && self.page_height_pt > 0.0) {
            return Err(bad("page size must be positive".into()));
        }
        if !(0.0..0.2).contains(&self.jitter) {
            return Err(bad(format!("jitter {} outside [0, 0.2)", self.jitter)));
        }
        if self.regions.is_empty() {
            return Err(bad("no regions".into()));
        }
        for (i, r) in self.regions.iter().enumerate() {
            if !r.rect.within_unit_page() {
                return Err(bad(format!("region {i} rectangle leaves the unit page")));
            }
            if !(r.font_size > 0.0) {
                return Err(bad(format!("region {i} font size must be positive")));
            }
            match (r.label, r.filler_words) {
                (Label::Unclassified, Some([lo, hi])) if lo <= hi => {}
                (Label::Unclassified, _) => {
                    return Err(bad(format!("filler region {i} needs filler_words [min, max]")))
                }
                (_, Some(_)) => {
                    return Err(bad(format!("region {i}: filler_words only apply to unclassified")))
                }
                _ => {}
            }
            for (j, s) in self.regions.iter().enumerate().skip(i + 1) {
                let inter = r.rect.intersection_area(&s.rect);
                if inter > 0.01 * r.rect.area().min(s.rect.area()) {
                    return Err(bad(format!("regions {i} and {j} overlap by more than 1%")));
                }
            }
        }
        if let Some(order) = &self.fill_order {
            let mut seen = vec![false; self.regions.len()];
            for &i in order {
                if i >= seen.len() || seen[i] {
                    return Err(bad("fill_order is not a permutation of the regions".into()));
                }
                seen[i] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(bad("fill_order is not a permutation of the regions".into()));
            }
        }
        Ok(())
    }

    pub fn fill_order(&self) -> Vec<usize> {
        self.fill_order
            .clone()
            .unwrap_or_else(|| (0..self.regions.len()).collect())
    }
}

const BUILTIN: [(&str, &str); 5] = [
    ("single_column", include_str!("../../templates/single_column.json")),
    ("two_column", include_str!("../../templates/two_column.json")),
    ("boxed_abstract", include_str!("../../templates/boxed_abstract.json")),
    ("bilingual_abstract", include_str!("../../templates/bilingual_abstract.json")),
    ("footer_journal", include_str!("../../templates/footer_journal.json")),
];

/// The five shipped layouts: single-column header, two-column, boxed abstract,
/// bilingual abstract and footer journal line.
pub fn builtin_templates() -> Vec<LayoutTemplate> {
    BUILTIN
        .iter()
        .map(|(name, src)| {
            let t: LayoutTemplate = serde_json::from_str(src)
                .unwrap_or_else(|e| panic!("builtin template {name}: {e}"));
            t.validate()
                .unwrap_or_else(|e| panic!("builtin template {name}: {e}"));
            t
        })
        .collect()
}

pub fn load_template(path: impl AsRef<Path>) -> Result<LayoutTemplate> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)?;
    let t: LayoutTemplate = serde_json::from_str(&src).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    t.validate()?;
    Ok(t)
}

/// Loads every `*.json` file of a directory, sorted by file name.
pub fn load_templates_dir(dir: impl AsRef<Path>) -> Result<Vec<LayoutTemplate>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths.iter().map(load_template).collect()
}
