use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::token::f1;
use crate::{Error, Label, MetadataRecord, Result};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.85;

/// Lowercased whitespace-separated words with non-alphanumeric characters
/// removed; words that end up empty are dropped.
pub fn normalize_words(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Cosine of the term-frequency vectors of two strings. Two empty strings are
/// identical (1); one empty string matches nothing (0).
pub fn cosine_similarity(a: &str, b: &str) -> f64 {
    let tf = |s: &str| {
        let mut m: BTreeMap<String, u64> = BTreeMap::new();
        for w in normalize_words(s) {
            *m.entry(w).or_default() += 1;
        }
        m
    };
    let (ta, tb) = (tf(a), tf(b));
    match (ta.is_empty(), tb.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let dot: u64 = ta.iter().map(|(w, &n)| n * tb.get(w).copied().unwrap_or(0)).sum();
    let na: u64 = ta.values().map(|n| n * n).sum();
    let nb: u64 = tb.values().map(|n| n * n).sum();
    (dot as f64 / ((na * nb) as f64).sqrt()).min(1.0)
}

/// True iff the similarity is strictly above `threshold`.
pub fn field_match(extracted: &str, gold: &str, threshold: f64) -> bool {
    cosine_similarity(extracted, gold) > threshold
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMatch {
    pub label: Label,
    pub matched: usize,
    pub missed: usize,
    pub spurious: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub threshold: f64,
    pub excluded: Vec<Label>,
    /// Rows for every non-excluded metadata class.
    pub classes: Vec<ClassMatch>,
    /// Mean F1 over classes with at least one gold or extracted field.
    pub macro_f1: f64,
    pub micro_f1: f64,
}

impl MatchReport {
    pub fn class(&self, label: Label) -> Option<&ClassMatch> {
        self.classes.iter().find(|c| c.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9}",
            "class", "matched", "missed", "spurious", "precision", "recall", "f1"
        );
        let _ = writeln!(s, "{:<14} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9.3}", "overall/macro", "", "", "", "", "", self.macro_f1);
        let _ = writeln!(s, "{:<14} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9.3}", "overall/micro", "", "", "", "", "", self.micro_f1);
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<14} {:>8} {:>8} {:>8} {:>9.3} {:>9.3} {:>9.3}",
                c.label.name(),
                c.matched,
                c.missed,
                c.spurious,
                c.precision,
                c.recall,
                c.f1
            );
        }
        s
    }
}

/// Greedy best-first one-to-one matching; returns the number of matched pairs.
fn match_fields(extracted: &[&str], gold: &[&str], threshold: f64) -> usize {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (g, gs) in gold.iter().enumerate() {
        for (e, es) in extracted.iter().enumerate() {
            let sim = cosine_similarity(es, gs);
            if sim > threshold {
                pairs.push((sim, g, e));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_g = vec![false; gold.len()];
    let mut used_e = vec![false; extracted.len()];
    let mut n = 0;
    for (_, g, e) in pairs {
        if !used_g[g] && !used_e[e] {
            used_g[g] = true;
            used_e[e] = true;
            n += 1;
        }
    }
    n
}

fn index_by_id<'a>(what: &str, docs: &'a [(String, MetadataRecord)]) -> Result<BTreeMap<&'a str, &'a MetadataRecord>> {
    let mut m = BTreeMap::new();
    for (id, r) in docs {
        if m.insert(id.as_str(), r).is_some() {
            return Err(Error::invalid("evaluation set", format!("{what}: duplicate doc_id {id:?}")));
        }
    }
    Ok(m)
}

fn check_coverage(a: &BTreeMap<&str, &MetadataRecord>, b: &BTreeMap<&str, &MetadataRecord>, what: &str) -> Result<()> {
    let ka: BTreeSet<&str> = a.keys().copied().collect();
    let kb: BTreeSet<&str> = b.keys().copied().collect();
    if ka == kb {
        return Ok(());
    }
    let missing: Vec<&str> = kb.difference(&ka).copied().collect();
    let extra: Vec<&str> = ka.difference(&kb).copied().collect();
    Err(Error::invalid(
        "evaluation set",
        format!("{what}: missing doc_ids {missing:?}, unexpected doc_ids {extra:?}"),
    ))
}

/// Field-level scores of `extractions` against `gold`, both keyed by doc_id.
/// With `exclude_date_doi` the date and DOI classes are left out.
pub fn extraction_f1(
    extractions: &[(String, MetadataRecord)],
    gold: &[(String, MetadataRecord)],
    threshold: f64,
    exclude_date_doi: bool,
) -> Result<MatchReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid("threshold", format!("{threshold} is not in (0, 1]")));
    }
    let ex = index_by_id("extractions", extractions)?;
    let gd = index_by_id("gold", gold)?;
    check_coverage(&ex, &gd, "extractions")?;
    let excluded: Vec<Label> = if exclude_date_doi {
        vec![Label::Date, Label::Doi]
    } else {
        vec![]
    };
    let mut classes = Vec::new();
    let (mut stp, mut sfp, mut sfn) = (0, 0, 0);
    let mut f1s = Vec::new();
    for l in Label::METADATA.into_iter().filter(|l| !excluded.contains(l)) {
        let (mut tp, mut ne, mut ng) = (0, 0, 0);
        for (id, g) in &gd {
            let gv = g.values(l);
            let ev = ex[id].values(l);
            tp += match_fields(&ev, &gv, threshold);
            ne += ev.len();
            ng += gv.len();
        }
        let precision = if ne == 0 { 0.0 } else { tp as f64 / ne as f64 };
        let recall = if ng == 0 { 0.0 } else { tp as f64 / ng as f64 };
        let c = ClassMatch {
            label: l,
            matched: tp,
            missed: ng - tp,
            spurious: ne - tp,
            precision,
            recall,
            f1: f1(precision, recall),
        };
        if ne + ng > 0 {
            f1s.push(c.f1);
        }
        stp += tp;
        sfp += ne - tp;
        sfn += ng - tp;
        classes.push(c);
    }
    let mp = if stp + sfp == 0 { 0.0 } else { stp as f64 / (stp + sfp) as f64 };
    let mr = if stp + sfn == 0 { 0.0 } else { stp as f64 / (stp + sfn) as f64 };
    Ok(MatchReport {
        threshold,
        excluded,
        classes,
        macro_f1: if f1s.is_empty() { 0.0 } else { f1s.iter().sum::<f64>() / f1s.len() as f64 },
        micro_f1: f1(mp, mr),
    })
}

/// Per-class F1 of several extractors side by side: an overall (macro) row
/// followed by one row per evaluated class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub runs: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub name: String,
    pub f1: Vec<f64>,
}

impl ComparisonTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn to_text(&self) -> String {
        let width = self.runs.iter().map(|r| r.len()).max().unwrap_or(0).max(7);
        let mut s = format!("{:<12}", "");
        for r in &self.runs {
            let _ = write!(s, " {r:>width$}");
        }
        s.push('\n');
        for row in &self.rows {
            let _ = write!(s, "{:<12}", row.name);
            for v in &row.f1 {
                let _ = write!(s, " {v:>width$.3}");
            }
            s.push('\n');
        }
        s
    }

    pub fn column(&self, run: &str) -> Option<Vec<f64>> {
        let k = self.runs.iter().position(|r| r == run)?;
        Some(self.rows.iter().map(|r| r.f1[k]).collect())
    }
}

pub fn compare_extractors(
    runs: &[(String, Vec<(String, MetadataRecord)>)],
    gold: &[(String, MetadataRecord)],
    threshold: f64,
    exclude_date_doi: bool,
) -> Result<(ComparisonTable, Vec<MatchReport>)> {
    let mut reports = Vec::new();
    for (name, ex) in runs {
        let r = extraction_f1(ex, gold, threshold, exclude_date_doi).map_err(|e| match e {
            Error::Invalid { what, msg } => Error::Invalid {
                what,
                msg: format!("run {name}: {msg}"),
            },
            other => other,
        })?;
        reports.push(r);
    }
    let mut rows = vec![ComparisonRow {
        name: "overall".into(),
        f1: reports.iter().map(|r| r.macro_f1).collect(),
    }];
    if let Some(first) = reports.first() {
        for (k, c) in first.classes.iter().enumerate() {
            rows.push(ComparisonRow {
                name: c.label.name().into(),
                f1: reports.iter().map(|r| r.classes[k].f1).collect(),
            });
        }
    }
    Ok((
        ComparisonTable {
            runs: runs.iter().map(|(n, _)| n.clone()).collect(),
            rows,
        },
        reports,
    ))
}
