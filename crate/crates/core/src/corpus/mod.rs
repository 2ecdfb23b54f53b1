//! Documents, metadata records, layout templates and the synthetic corpus generator.

mod annotations;
mod generate;
mod records;
mod split;
mod template;
mod words;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, NUM_CLASSES};

pub use annotations::{load_annotations, read_annotations, save_annotations, write_annotations};
pub use generate::{
    generate_corpus, generate_document, CorpusManifest, GeneratedDocument, GenerationReport,
};
pub use records::{load_records, save_records, synthesize_records};
pub use split::{split_corpus, SplitSpec};
pub use template::{builtin_templates, load_template, load_templates_dir, LayoutTemplate, Rect, TemplateRegion};

/// Token classes in their fixed index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Abstract,
    Author,
    Email,
    Address,
    Date,
    Journal,
    Affiliation,
    Doi,
    Title,
    Unclassified,
}

impl Label {
    pub const ALL: [Label; NUM_CLASSES] = [
        Label::Abstract,
        Label::Author,
        Label::Email,
        Label::Address,
        Label::Date,
        Label::Journal,
        Label::Affiliation,
        Label::Doi,
        Label::Title,
        Label::Unclassified,
    ];

    /// The nine metadata classes (everything but `Unclassified`).
    pub const METADATA: [Label; 9] = [
        Label::Abstract,
        Label::Author,
        Label::Email,
        Label::Address,
        Label::Date,
        Label::Journal,
        Label::Affiliation,
        Label::Doi,
        Label::Title,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Abstract => "abstract",
            Label::Author => "author",
            Label::Email => "email",
            Label::Address => "address",
            Label::Date => "date",
            Label::Journal => "journal",
            Label::Affiliation => "affiliation",
            Label::Doi => "doi",
            Label::Title => "title",
            Label::Unclassified => "unclassified",
        }
    }

    /// Classes whose record field holds a list of values.
    pub fn is_list_valued(self) -> bool {
        matches!(
            self,
            Label::Author | Label::Email | Label::Address | Label::Affiliation
        )
    }

    pub fn legal_names() -> String {
        Label::ALL.map(Label::name).join(", ")
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Exact, case-sensitive match against the ten class names.
    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "label",
                    format!("{s:?} is not one of: {}", Label::legal_names()),
                )
            })
    }
}

/// One word on the page. Coordinates are page-relative, font size in points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub font_size: f64,
    pub bold: bool,
    pub italic: bool,
    pub line_index: usize,
}

const BOUND_EPS: f64 = 1e-9;

impl Token {
    pub fn validate(&self) -> Result<()> {
        if self.text.is_empty() {
            return Err(Error::invalid("token", "empty text"));
        }
        let finite = [self.x, self.y, self.width, self.height, self.font_size]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("token", format!("non-finite geometry for {:?}", self.text)));
        }
        if !(0.0..=1.0).contains(&self.x) || !(0.0..=1.0).contains(&self.y) {
            return Err(Error::invalid("token", format!("position outside page for {:?}", self.text)));
        }
        if !(self.width > 0.0 && self.width <= 1.0 && self.height > 0.0 && self.height <= 1.0) {
            return Err(Error::invalid("token", format!("extent outside (0,1] for {:?}", self.text)));
        }
        if self.x + self.width > 1.0 + BOUND_EPS || self.y + self.height > 1.0 + BOUND_EPS {
            return Err(Error::invalid("token", format!("box leaves the page for {:?}", self.text)));
        }
        if self.font_size <= 0.0 {
            return Err(Error::invalid("token", "font size must be positive"));
        }
        Ok(())
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }
}

/// The first page of one document with a gold label per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub doc_id: String,
    pub page_width_pt: f64,
    pub page_height_pt: f64,
    pub tokens: Vec<Token>,
    pub labels: Vec<Label>,
    pub template_id: Option<String>,
}

impl LabeledDocument {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.page_width_pt > 0.0 && self.page_height_pt > 0.0) {
            return Err(Error::invalid("document", "page size must be positive"));
        }
        if self.labels.len() != self.tokens.len() {
            return Err(Error::Length(format!(
                "{}: {} tokens but {} labels",
                self.doc_id,
                self.tokens.len(),
                self.labels.len()
            )));
        }
        for t in &self.tokens {
            t.validate()?;
        }
        for pair in self.tokens.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if (b.line_index, b.x) < (a.line_index, a.x) {
                return Err(Error::invalid(
                    "document",
                    format!("{}: tokens not in reading order at {:?}", self.doc_id, b.text),
                ));
            }
        }
        Ok(())
    }

    /// Number of distinct lines, taken as the largest line index plus one.
    pub fn line_count(&self) -> usize {
        self.tokens.iter().map(|t| t.line_index + 1).max().unwrap_or(0)
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }
}

/// Bibliographic metadata of one publication.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetadataRecord {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_: String,
    pub authors: Vec<String>,
    pub emails: Vec<String>,
    pub addresses: Vec<String>,
    pub date: String,
    pub journal: String,
    pub affiliations: Vec<String>,
    pub doi: String,
}

impl MetadataRecord {
    /// The values of one class's field; scalar fields yield at most one value.
    pub fn values(&self, label: Label) -> Vec<&str> {
        fn scalar(s: &str) -> Vec<&str> {
            if s.trim().is_empty() {
                vec![]
            } else {
                vec![s]
            }
        }
        fn list(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).filter(|s| !s.trim().is_empty()).collect()
        }
        match label {
            Label::Abstract => scalar(&self.abstract_),
            Label::Author => list(&self.authors),
            Label::Email => list(&self.emails),
            Label::Address => list(&self.addresses),
            Label::Date => scalar(&self.date),
            Label::Journal => scalar(&self.journal),
            Label::Affiliation => list(&self.affiliations),
            Label::Doi => scalar(&self.doi),
            Label::Title => scalar(&self.title),
            Label::Unclassified => vec![],
        }
    }

    /// Appends a value to a class's field; scalar fields are joined with a space.
    pub fn push(&mut self, label: Label, value: String) {
        let join = |s: &mut String, v: String| {
            if s.is_empty() {
                *s = v;
            } else {
                s.push(' ');
                s.push_str(&v);
            }
        };
        match label {
            Label::Abstract => join(&mut self.abstract_, value),
            Label::Author => self.authors.push(value),
            Label::Email => self.emails.push(value),
            Label::Address => self.addresses.push(value),
            Label::Date => join(&mut self.date, value),
            Label::Journal => join(&mut self.journal, value),
            Label::Affiliation => self.affiliations.push(value),
            Label::Doi => join(&mut self.doi, value),
            Label::Title => join(&mut self.title, value),
            Label::Unclassified => {}
        }
    }

    pub fn is_empty(&self) -> bool {
        Label::METADATA.iter().all(|&l| self.values(l).is_empty())
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::invalid("record", "all fields are empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_index_round_trip() {
        for (i, l) in Label::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(Label::from_index(i), Some(*l));
            assert_eq!(l.name().parse::<Label>().unwrap(), *l);
        }
        assert_eq!(Label::from_index(10), None);
    }

    #[test]
    fn label_parse_is_strict() {
        assert!("Title".parse::<Label>().is_err());
        assert!("title ".parse::<Label>().is_err());
        let err = "Headline".parse::<Label>().unwrap_err().to_string();
        assert!(err.contains("unclassified") && err.contains("doi"));
    }

    #[test]
    fn label_serde_uses_names() {
        assert_eq!(serde_json::to_string(&Label::Doi).unwrap(), "\"doi\"");
    }

    #[test]
    fn record_values_and_push() {
        let mut r = MetadataRecord::default();
        assert!(r.is_empty());
        assert!(r.validate().is_err());
        r.push(Label::Title, "Ein".into());
        r.push(Label::Title, "Titel".into());
        r.push(Label::Author, "Anna Müller".into());
        r.push(Label::Author, "Jan Roth".into());
        assert_eq!(r.title, "Ein Titel");
        assert_eq!(r.values(Label::Author), vec!["Anna Müller", "Jan Roth"]);
        assert!(r.values(Label::Doi).is_empty());
        r.validate().unwrap();
    }

    #[test]
    fn record_json_field_names() {
        let r = MetadataRecord {
            abstract_: "x".into(),
            ..Default::default()
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"abstract\":\"x\""));
        assert!(serde_json::from_str::<MetadataRecord>("{\"titel\":\"x\"}").is_err());
    }

    fn tok(text: &str, x: f64, line: usize) -> Token {
        Token {
            text: text.into(),
            x,
            y: 0.1 * line as f64,
            width: 0.05,
            height: 0.01,
            font_size: 10.0,
            bold: false,
            italic: false,
            line_index: line,
        }
    }

    #[test]
    fn document_validation() {
        let mut d = LabeledDocument {
            doc_id: "d".into(),
            page_width_pt: 595.0,
            page_height_pt: 842.0,
            tokens: vec![tok("a", 0.1, 0), tok("b", 0.2, 0), tok("c", 0.1, 1)],
            labels: vec![Label::Title; 3],
            template_id: None,
        };
        d.validate().unwrap();
        assert_eq!(d.line_count(), 2);
        d.tokens.swap(0, 1);
        assert!(d.validate().is_err());
        d.tokens.swap(0, 1);
        d.labels.pop();
        assert!(matches!(d.validate(), Err(Error::Length(_))));
        d.labels.push(Label::Title);
        d.tokens[2].x = 0.97;
        assert!(d.validate().is_err());
        d.tokens[2].x = 0.1;
        d.tokens[2].text.clear();
        assert!(d.validate().is_err());
    }
}
