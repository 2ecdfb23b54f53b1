//! Annotation CSV files.
//!
//! ```text
//! # doc_id=<id>;page_width_pt=<f>;page_height_pt=<f>;template_id=<id or empty>
//! doc_id,idx,text,x,y,width,height,font_size,bold,italic,line_index,label[,predicted_label]
//! ```
//!
//! The comment line carries the page-level fields that have no column. Floats are
//! written with 17 significant digits so a save/load cycle is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Label, LabeledDocument, Token};
use crate::{Error, Result};

pub const HEADER: [&str; 12] = [
    "doc_id",
    "idx",
    "text",
    "x",
    "y",
    "width",
    "height",
    "font_size",
    "bold",
    "italic",
    "line_index",
    "label",
];

pub const PREDICTED_COLUMN: &str = "predicted_label";

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `doc`; when `predicted` is given a `predicted_label` column is appended.
pub fn write_annotations<W: Write>(
    mut out: W,
    doc: &LabeledDocument,
    predicted: Option<&[Label]>,
) -> Result<()> {
    if let Some(p) = predicted {
        if p.len() != doc.len() {
            return Err(Error::Length(format!(
                "{}: {} predictions for {} tokens",
                doc.doc_id,
                p.len(),
                doc.len()
            )));
        }
    }
    writeln!(
        out,
        "# doc_id={};page_width_pt={};page_height_pt={};template_id={}",
        doc.doc_id,
        fmt_f64(doc.page_width_pt),
        fmt_f64(doc.page_height_pt),
        doc.template_id.as_deref().unwrap_or("")
    )?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = HEADER.to_vec();
    if predicted.is_some() {
        header.push(PREDICTED_COLUMN);
    }
    w.write_record(&header)?;
    for (i, (t, l)) in doc.tokens.iter().zip(&doc.labels).enumerate() {
        let mut row = vec![
            doc.doc_id.clone(),
            i.to_string(),
            t.text.clone(),
            fmt_f64(t.x),
            fmt_f64(t.y),
            fmt_f64(t.width),
            fmt_f64(t.height),
            fmt_f64(t.font_size),
            u8::from(t.bold).to_string(),
            u8::from(t.italic).to_string(),
            t.line_index.to_string(),
            l.name().to_string(),
        ];
        if let Some(p) = predicted {
            row.push(p[i].name().to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_annotations(doc: &LabeledDocument, path: impl AsRef<Path>) -> Result<()> {
    let f = File::create(path)?;
    let mut buf = std::io::BufWriter::new(f);
    write_annotations(&mut buf, doc, None)?;
    buf.flush()?;
    Ok(())
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<LabeledDocument> {
    let path = path.as_ref();
    let (doc, _) = read_annotations(BufReader::new(File::open(path)?), &path.display().to_string())?;
    Ok(doc)
}

struct PageMeta {
    doc_id: String,
    width: f64,
    height: f64,
    template_id: Option<String>,
}

fn parse_meta(line: &str, name: &str) -> Result<PageMeta> {
    let err = |msg: String| Error::Annotation {
        path: name.to_string(),
        row: 1,
        msg,
    };
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| err("missing '# doc_id=...' page line".into()))?
        .trim();
    let mut meta = PageMeta {
        doc_id: String::new(),
        width: f64::NAN,
        height: f64::NAN,
        template_id: None,
    };
    for part in body.split(';') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| err(format!("bad page field {part:?}")))?;
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| err(format!("bad number {v:?} for {k}")))
        };
        match k {
            "doc_id" => meta.doc_id = v.to_string(),
            "page_width_pt" => meta.width = num(v)?,
            "page_height_pt" => meta.height = num(v)?,
            "template_id" => meta.template_id = (!v.is_empty()).then(|| v.to_string()),
            _ => return Err(err(format!("unknown page field {k:?}"))),
        }
    }
    if meta.doc_id.is_empty() || !(meta.width > 0.0) || !(meta.height > 0.0) {
        return Err(err("page line needs doc_id, page_width_pt, page_height_pt".into()));
    }
    Ok(meta)
}

/// Reads a document plus the optional `predicted_label` column.
pub fn read_annotations<R: Read>(
    input: R,
    name: &str,
) -> Result<(LabeledDocument, Option<Vec<Label>>)> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let meta = parse_meta(first.trim_end_matches(['\n', '\r']), name)?;

    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv.headers()?.clone();
    let with_pred = if headers.iter().eq(HEADER.iter().copied()) {
        false
    } else if headers.len() == HEADER.len() + 1
        && headers.iter().take(HEADER.len()).eq(HEADER.iter().copied())
        && &headers[HEADER.len()] == PREDICTED_COLUMN
    {
        true
    } else {
        return Err(Error::Annotation {
            path: name.to_string(),
            row: 2,
            msg: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    };

    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    let mut predicted = Vec::new();
    for rec in csv.records() {
        let rec = rec?;
        // The page line sits above the csv reader, so shift its line numbers by one.
        let row = rec.position().map_or(0, |p| p.line() + 1);
        let err = |msg: String| Error::Annotation {
            path: name.to_string(),
            row,
            msg,
        };
        let expected = HEADER.len() + usize::from(with_pred);
        if rec.len() != expected {
            return Err(err(format!("expected {expected} fields, found {}", rec.len())));
        }
        if rec[0] != meta.doc_id {
            return Err(err(format!("doc_id {:?} differs from {:?}", &rec[0], meta.doc_id)));
        }
        let idx: usize = rec[1].parse().map_err(|_| err(format!("bad idx {:?}", &rec[1])))?;
        if idx != tokens.len() {
            return Err(err(format!("idx {idx} out of order, expected {}", tokens.len())));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| err(format!("bad {} {:?}", HEADER[i], &rec[i])))
        };
        let flag = |i: usize| -> Result<bool> {
            match &rec[i] {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(err(format!("bad {} {other:?}, expected 0 or 1", HEADER[i]))),
            }
        };
        let token = Token {
            text: rec[2].to_string(),
            x: num(3)?,
            y: num(4)?,
            width: num(5)?,
            height: num(6)?,
            font_size: num(7)?,
            bold: flag(8)?,
            italic: flag(9)?,
            line_index: rec[10]
                .parse()
                .map_err(|_| err(format!("bad line_index {:?}", &rec[10])))?,
        };
        token.validate().map_err(|e| err(e.to_string()))?;
        let label: Label = rec[11].parse().map_err(|e: Error| err(e.to_string()))?;
        if with_pred {
            predicted.push(rec[12].parse().map_err(|e: Error| err(e.to_string()))?);
        }
        tokens.push(token);
        labels.push(label);
    }
    let doc = LabeledDocument {
        doc_id: meta.doc_id,
        page_width_pt: meta.width,
        page_height_pt: meta.height,
        tokens,
        labels,
        template_id: meta.template_id,
    };
    doc.validate().map_err(|e| Error::Annotation {
        path: name.to_string(),
        row: 0,
        msg: e.to_string(),
    })?;
    Ok((doc, with_pred.then_some(predicted)))
}
