use super::*;
use crate::corpus::{builtin_templates, generate_document, synthesize_records};
use crate::UNIFORM;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tok(text: &str, x: f64, y: f64, w: f64, line: usize) -> Token {
    Token {
        text: text.into(),
        x,
        y,
        width: w,
        height: 10.0 / 842.0,
        font_size: 10.0,
        bold: false,
        italic: false,
        line_index: line,
    }
}

fn doc(tokens: Vec<Token>) -> LabeledDocument {
    let n = tokens.len();
    LabeledDocument {
        doc_id: "d".into(),
        page_width_pt: 595.0,
        page_height_pt: 842.0,
        tokens,
        labels: vec![Label::Unclassified; n],
        template_id: None,
    }
}

/// Lines of three words each at font size 10 (line pitch 12 pt); `starts` are
/// line tops in points.
fn lines_at(starts: &[f64]) -> LabeledDocument {
    let cw = 5.0 / 595.0;
    let mut t = Vec::new();
    for (l, &top) in starts.iter().enumerate() {
        for k in 0..3 {
            t.push(tok("wort", 0.1 + k as f64 * 5.0 * cw, top / 842.0, 4.0 * cw, l));
        }
    }
    doc(t)
}

fn region(x: f64, y: f64, w: f64, h: f64, scores: ProbDist10) -> Region {
    Region {
        rect: Rect::new(x, y, w, h),
        scores: RegionScores::Scores(scores),
        provenance: Provenance::Imported,
    }
}

fn page(regions: Vec<Region>) -> PagePrediction {
    PagePrediction {
        doc_id: "d".into(),
        page_width_pt: 595.0,
        page_height_pt: 842.0,
        regions,
        detector: "test".into(),
    }
}

fn peaked(k: usize) -> ProbDist10 {
    let mut d = [0.05; NUM_CLASSES];
    d[k] = 0.55;
    d
}

#[test]
fn single_line_is_one_region() {
    let d = lines_at(&[100.0]);
    let segs = segment_regions(&d, &SegmentConfig::default());
    assert_eq!(segs.len(), 1);
    assert_eq!(segs[0].tokens, vec![0, 1, 2]);
}

#[test]
fn wide_paragraph_gap_splits() {
    // Intra-paragraph whitespace 2 pt; the paragraph gap is 10 pt (5x).
    let d = lines_at(&[100.0, 112.0, 124.0, 144.0, 156.0, 168.0]);
    let segs = segment_regions(&d, &SegmentConfig::default());
    assert_eq!(segs.len(), 2);
    assert_eq!(segs[0].tokens, (0..9).collect::<Vec<_>>());
    assert_eq!(segs[1].tokens, (9..18).collect::<Vec<_>>());
}

#[test]
fn wide_horizontal_gap_splits_a_line() {
    let mut d = lines_at(&[100.0]);
    d.tokens[2].x += 30.0 / 595.0;
    assert_eq!(segment_regions(&d, &SegmentConfig::default()).len(), 2);
}

#[test]
fn segments_partition_generated_pages() {
    let recs = synthesize_records(20, 3);
    for t in builtin_templates() {
        for (j, r) in recs.iter().enumerate() {
            let d = generate_document(r, &t, j as u64).unwrap().document;
            let segs = segment_regions(&d, &SegmentConfig::default());
            let mut seen = vec![0usize; d.len()];
            for s in &segs {
                assert!(!s.tokens.is_empty());
                for &i in &s.tokens {
                    seen[i] += 1;
                    let tk = &d.tokens[i];
                    assert!(tk.x >= s.rect.x - 1e-12 && tk.right() <= s.rect.right() + 1e-12);
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "{}", d.doc_id);
            assert!(segs.windows(2).all(|w| w[0].tokens[0] < w[1].tokens[0]));
        }
    }
}

#[test]
fn segments_are_mostly_pure_on_generated_pages() {
    let recs = synthesize_records(20, 4);
    let (mut pure, mut total) = (0usize, 0usize);
    for t in builtin_templates() {
        for (j, r) in recs.iter().enumerate() {
            let d = generate_document(r, &t, j as u64).unwrap().document;
            for s in segment_regions(&d, &SegmentConfig::default()) {
                let m = majority_label(&d.labels, &s);
                let agree = s.tokens.iter().filter(|&&i| d.labels[i] == m).count();
                pure += agree;
                total += s.tokens.len();
            }
        }
    }
    assert!(pure as f64 / total as f64 > 0.95, "{pure}/{total}");
}

#[test]
fn majority_ties_go_low() {
    let mut d = lines_at(&[100.0]);
    d.tokens.pop();
    d.labels = vec![Label::Title, Label::Author];
    let s = Segment {
        tokens: vec![0, 1],
        rect: Rect::new(0.0, 0.0, 0.1, 0.1),
    };
    assert_eq!(majority_label(&d.labels, &s), Label::Author);
}

#[test]
fn region_features_are_finite_and_sized() {
    let d = lines_at(&[100.0, 112.0]);
    let stats = DocumentStats::new(&d);
    let segs = segment_regions(&d, &SegmentConfig::default());
    let f = region_features(&d, &stats, &segs[0]);
    assert_eq!(f.len(), 12);
    assert!(f.iter().all(|v| v.is_finite()));
    assert!((f[5] - 7f64.ln()).abs() < 1e-12);
    assert_eq!(f[6], 1.0);
    assert_eq!(f[11], 1.0);
}

#[test]
fn zero_classifier_is_uniform() {
    let p = classify_region(&Mlp::zeros(12, 32), &[0.4; 12]).unwrap();
    assert!(p.iter().all(|v| (v - 0.1).abs() < 1e-15));
    let m = Mlp::init(12, 32, &mut ChaCha8Rng::seed_from_u64(1));
    let p = classify_region(&m, &[0.4; 12]).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn suppression_rules() {
    let a = region(0.1, 0.1, 0.2, 0.2, peaked(1));
    let kept = suppress(vec![a.clone(), a.clone()], 0.5, 100);
    assert_eq!(kept.len(), 1);

    let disjoint: Vec<Region> = (0..5).map(|k| region(0.1 * k as f64, 0.0, 0.05, 0.05, peaked(k))).collect();
    assert_eq!(suppress(disjoint, 0.5, 100).len(), 5);

    // 150 disjoint boxes with distinct scores: the 100 best survive.
    let many: Vec<Region> = (0..150)
        .map(|k| {
            let mut s = [0.0; NUM_CLASSES];
            s[0] = 1.0 + k as f64;
            s[1] = 1.0;
            region((k % 15) as f64 * 0.06, (k / 15) as f64 * 0.09, 0.05, 0.05, s)
        })
        .collect();
    let kept = suppress(many, 0.5, 100);
    assert_eq!(kept.len(), 100);
    let mut ks: Vec<usize> = kept
        .iter()
        .map(|r| match r.scores {
            RegionScores::Scores(s) => s[0] as usize - 1,
            _ => unreachable!(),
        })
        .collect();
    ks.sort_unstable();
    assert_eq!(ks, (50..150).collect::<Vec<_>>());
}

#[test]
fn overlap_below_threshold_survives() {
    let a = region(0.0, 0.0, 0.2, 0.1, peaked(1));
    let b = region(0.1, 0.0, 0.2, 0.1, peaked(2)); // IoU 1/3
    assert_eq!(suppress(vec![a, b], 0.5, 100).len(), 2);
}

#[test]
fn word_map_inside_outside_and_split() {
    let q = peaked(2);
    let r = peaked(7);
    let mut d = doc(vec![
        tok("a", 0.12, 0.12, 0.02, 0),
        tok("b", 0.6, 0.6, 0.02, 1),
        tok("c", 0.49, 0.3, 0.02, 2),
    ]);
    d.tokens[2].height = 0.01;
    // token c spans x 0.49..0.51: half in each box
    let p = page(vec![
        region(0.1, 0.1, 0.2, 0.2, q),
        region(0.4, 0.29, 0.1, 0.05, q),
        region(0.5, 0.29, 0.1, 0.05, r),
    ]);
    let m = word_probability_map(&p, &d).unwrap();
    for k in 0..NUM_CLASSES {
        assert!((m[0][k] - q[k]).abs() < 1e-15);
        assert!((m[2][k] - (q[k] + r[k]) / 2.0).abs() < 1e-12);
    }
    assert_eq!(m[1], one_hot(Label::Unclassified));
    for dist in &m {
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(dist.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn word_map_ignores_uniform_area_scaling() {
    // Shrinking the page horizontally scales every overlap area by the same factor.
    let at = |s: f64| {
        let d = doc(vec![tok("a", 0.2 * s, 0.2, 0.1 * s, 0)]);
        let p = page(vec![
            region(0.15 * s, 0.15, 0.1 * s, 0.1, peaked(1)),
            region(0.22 * s, 0.15, 0.1 * s, 0.1, peaked(4)),
        ]);
        word_probability_map(&p, &d).unwrap()[0]
    };
    let (a, b) = (at(1.0), at(0.5));
    for k in 0..NUM_CLASSES {
        assert!((a[k] - b[k]).abs() < 1e-12);
    }
    assert!(a[1] != a[4]);
}

#[test]
fn word_map_checks_doc_id() {
    let d = doc(vec![tok("a", 0.2, 0.2, 0.1, 0)]);
    let mut p = page(vec![]);
    p.doc_id = "other".into();
    assert!(word_probability_map(&p, &d).is_err());
}

#[test]
fn single_detection_expands() {
    let s = RegionScores::Single {
        label: Label::Doi,
        confidence: 0.55,
    };
    let d = s.distribution();
    assert_eq!(d[Label::Doi.index()], 0.55);
    assert!((d[0] - 0.05).abs() < 1e-15);
    assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(RegionScores::Scores([0.0; 10]).distribution(), UNIFORM);
}

const SAMPLE: &str = r#"{"doc_id":"d1","page_width_pt":595.0,"page_height_pt":842.0,"detector":"ext","boxes":[{"x":0.1,"y":0.1,"w":0.5,"h":0.05,"scores":[0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.9,0.1]},{"x":0.1,"y":0.2,"w":0.5,"h":0.02,"class":"author","confidence":0.8}]}"#;

#[test]
fn interchange_round_trip() {
    let preds = read_page_predictions(SAMPLE.as_bytes(), "s").unwrap();
    assert_eq!(preds.len(), 1);
    assert_eq!(preds[0].regions.len(), 2);
    let mut buf = Vec::new();
    write_page_predictions(&mut buf, &preds).unwrap();
    assert_eq!(String::from_utf8(buf.clone()).unwrap().trim(), SAMPLE);
    assert_eq!(read_page_predictions(&buf[..], "s").unwrap(), preds);
}

#[test]
fn interchange_points_are_normalized() {
    let line = r#"{"doc_id":"d","page_width_pt":500.0,"page_height_pt":1000.0,"units":"pt","boxes":[{"x":50,"y":100,"w":250,"h":50,"class":"title","confidence":1.0}]}"#;
    let p = &read_page_predictions(line.as_bytes(), "s").unwrap()[0];
    assert_eq!(p.regions[0].rect, Rect::new(0.1, 0.1, 0.5, 0.05));
    assert_eq!(p.detector, "imported");
}

#[test]
fn interchange_validation_errors() {
    let bad_conf = SAMPLE.replace("0.8}", "1.2}");
    let e = read_page_predictions(bad_conf.as_bytes(), "p.jsonl").unwrap_err().to_string();
    assert!(e.contains("p.jsonl") && e.contains("line 1") && e.contains("confidence"), "{e}");

    let bad_class = SAMPLE.replace("\"author\"", "\"Headline\"");
    let e = read_page_predictions(bad_class.as_bytes(), "p").unwrap_err().to_string();
    assert!(e.contains("Headline"), "{e}");
    for l in Label::ALL {
        assert!(e.contains(l.name()), "{e}");
    }

    let no_id = SAMPLE.replace("\"doc_id\":\"d1\",", "");
    let e = read_page_predictions(format!("\n{no_id}").as_bytes(), "p").unwrap_err().to_string();
    assert!(e.contains("doc_id") && e.contains("line 2"), "{e}");

    let outside = SAMPLE.replace("\"w\":0.5,\"h\":0.05", "\"w\":0.95,\"h\":0.05");
    assert!(read_page_predictions(outside.as_bytes(), "p").is_err());
    let negative = SAMPLE.replace("0.9,0.1", "0.9,-0.1");
    assert!(read_page_predictions(negative.as_bytes(), "p").is_err());
    let both = SAMPLE.replace("\"class\":\"author\"", "\"scores\":[1,0,0,0,0,0,0,0,0,0],\"class\":\"author\"");
    assert!(read_page_predictions(both.as_bytes(), "p").is_err());
}

#[test]
fn native_prediction_covers_every_token() {
    let r = &synthesize_records(1, 9)[0];
    let d = generate_document(r, &builtin_templates()[0], 1).unwrap().document;
    let m = VisionModel::new(Mlp::init(12, VISION_HIDDEN, &mut ChaCha8Rng::seed_from_u64(0)));
    let page = m.predict_page(&d).unwrap();
    assert!(page.regions.len() <= DEFAULT_KEEP);
    let probs = m.predict(&d).unwrap();
    assert_eq!(probs.len(), d.len());
    for p in probs {
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
