//! JSON Lines prediction files: one page object per line,
//!
//! ```json
//! {"doc_id":"d1","page_width_pt":595.0,"page_height_pt":842.0,"detector":"x",
//!  "boxes":[{"x":0.1,"y":0.1,"w":0.5,"h":0.05,"scores":[0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.9,0.1]},
//!           {"x":0.1,"y":0.2,"w":0.5,"h":0.02,"class":"author","confidence":0.8}]}
//! ```
//!
//! Coordinates are page-relative unless the page carries `"units": "pt"`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PagePrediction, Provenance, Region, RegionScores};
use crate::corpus::Rect;
use crate::{Error, Label, Result, NUM_CLASSES};

const EPS: f64 = 1e-9;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageJson {
    doc_id: String,
    page_width_pt: f64,
    page_height_pt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    units: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detector: Option<String>,
    boxes: Vec<BoxJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxJson {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
}

fn convert_box(b: BoxJson, sx: f64, sy: f64) -> std::result::Result<Region, String> {
    let rect = Rect::new(b.x / sx, b.y / sy, b.w / sx, b.h / sy);
    let vals = [rect.x, rect.y, rect.w, rect.h];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err("non-finite coordinate".into());
    }
    if rect.x < 0.0 || rect.y < 0.0 || rect.w <= 0.0 || rect.h <= 0.0 || rect.right() > 1.0 + EPS || rect.bottom() > 1.0 + EPS {
        return Err(format!(
            "box ({}, {}, {}, {}) is not inside the unit page",
            rect.x, rect.y, rect.w, rect.h
        ));
    }
    let scores = match (b.scores, b.class, b.confidence) {
        (Some(s), None, None) => {
            let s: [f64; NUM_CLASSES] = s
                .try_into()
                .map_err(|s: Vec<f64>| format!("scores has {} entries, expected {NUM_CLASSES}", s.len()))?;
            if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err("scores must be finite and non-negative".into());
            }
            if s.iter().sum::<f64>() <= 0.0 {
                return Err("scores sum to zero".into());
            }
            RegionScores::Scores(s)
        }
        (None, Some(c), Some(conf)) => {
            let label: Label = c.parse().map_err(|e: Error| e.to_string())?;
            if !(0.0..=1.0).contains(&conf) {
                return Err(format!("confidence {conf} outside [0, 1]"));
            }
            RegionScores::Single {
                label,
                confidence: conf,
            }
        }
        _ => return Err("a box needs either `scores` or both `class` and `confidence`".into()),
    };
    Ok(Region {
        rect,
        scores,
        provenance: Provenance::Imported,
    })
}

fn convert_page(p: PageJson) -> std::result::Result<PagePrediction, String> {
    if p.doc_id.is_empty() {
        return Err("empty doc_id".into());
    }
    if !(p.page_width_pt > 0.0 && p.page_height_pt > 0.0) {
        return Err("page size must be positive".into());
    }
    let (sx, sy) = match p.units.as_deref() {
        None | Some("page") => (1.0, 1.0),
        Some("pt") => (p.page_width_pt, p.page_height_pt),
        Some(other) => return Err(format!("unknown units {other:?} (expected \"page\" or \"pt\")")),
    };
    let regions = p
        .boxes
        .into_iter()
        .enumerate()
        .map(|(k, b)| convert_box(b, sx, sy).map_err(|e| format!("box {k}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    Ok(PagePrediction {
        doc_id: p.doc_id,
        page_width_pt: p.page_width_pt,
        page_height_pt: p.page_height_pt,
        regions,
        detector: p.detector.unwrap_or_else(|| "imported".to_string()),
    })
}

pub fn read_page_predictions<R: BufRead>(reader: R, name: &str) -> Result<Vec<PagePrediction>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: name.to_string(),
            line: k + 1,
            msg,
        };
        let page: PageJson = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        out.push(convert_page(page).map_err(err)?);
    }
    Ok(out)
}

pub fn import_page_predictions(path: impl AsRef<Path>) -> Result<Vec<PagePrediction>> {
    let path = path.as_ref();
    read_page_predictions(BufReader::new(File::open(path)?), &path.display().to_string())
}

pub fn write_page_predictions<W: Write>(mut out: W, preds: &[PagePrediction]) -> Result<()> {
    for p in preds {
        let page = PageJson {
            doc_id: p.doc_id.clone(),
            page_width_pt: p.page_width_pt,
            page_height_pt: p.page_height_pt,
            units: None,
            detector: Some(p.detector.clone()),
            boxes: p
                .regions
                .iter()
                .map(|r| {
                    let (scores, class, confidence) = match &r.scores {
                        RegionScores::Scores(s) => (Some(s.to_vec()), None, None),
                        RegionScores::Single { label, confidence } => {
                            (None, Some(label.name().to_string()), Some(*confidence))
                        }
                    };
                    BoxJson {
                        x: r.rect.x,
                        y: r.rect.y,
                        w: r.rect.w,
                        h: r.rect.h,
                        scores,
                        class,
                        confidence,
                    }
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &page)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn export_page_predictions(path: impl AsRef<Path>, preds: &[PagePrediction]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_page_predictions(&mut w, preds)?;
    w.flush()?;
    Ok(())
}
