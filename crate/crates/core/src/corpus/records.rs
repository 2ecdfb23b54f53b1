use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::words::*;
use super::MetadataRecord;
use crate::{Error, Result};

/// Reads a record file: one JSON object per non-blank line.
pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<MetadataRecord>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg,
        };
        let rec: MetadataRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        rec.validate().map_err(|e| parse_err(e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn save_records(records: &[MetadataRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().unwrap_or_default()
}

fn ascii_fold(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            'ä' | 'Ä' => out.push_str("ae"),
            'ö' | 'Ö' => out.push_str("oe"),
            'ü' | 'Ü' => out.push_str("ue"),
            'ß' => out.push_str("ss"),
            c if c.is_ascii_alphanumeric() => out.push(c.to_ascii_lowercase()),
            _ => {}
        }
    }
    out
}

fn synth_date<R: Rng>(rng: &mut R) -> String {
    let year = rng.gen_range(1995..=2023);
    let day = rng.gen_range(1..=28);
    let month = rng.gen_range(1..=12);
    match rng.gen_range(0..4) {
        0 => format!("{day:02}.{month:02}.{year}"),
        1 => year.to_string(),
        2 => format!("{} {year}", MONTHS[month - 1]),
        _ => format!("{day}. {} {year}", MONTHS[month - 1]),
    }
}

fn synth_abstract<R: Rng>(rng: &mut R, topic: &str, min_words: usize) -> String {
    let mut sentences = vec![format!("{} {} {}.", pick(rng, ABSTRACT_OPENERS), topic, pick(rng, TITLE_CONTEXTS))];
    let count = |s: &[String]| s.iter().map(|x| x.split_whitespace().count()).sum::<usize>();
    while count(&sentences) < min_words {
        let s = match rng.gen_range(0..3) {
            0 => format!(
                "Auf Grundlage von {} wird gezeigt, dass {}.",
                pick(rng, ABSTRACT_DATA),
                pick(rng, ABSTRACT_FINDINGS)
            ),
            1 => format!(
                "Dabei zeigt sich, dass {}.",
                pick(rng, ABSTRACT_FINDINGS)
            ),
            _ => {
                let n = rng.gen_range(6..12);
                let mut words: Vec<&str> = (0..n).map(|_| pick(rng, FILLER)).collect();
                let mut first = words[0].to_string();
                if let Some(c) = first.get(0..1) {
                    first = c.to_uppercase() + &first[1..];
                }
                words[0] = "";
                format!("{first}{}.", words.join(" "))
            }
        };
        sentences.push(s);
    }
    sentences.push(pick(rng, ABSTRACT_CLOSERS).to_string());
    sentences.join(" ")
}

/// Seeded German-looking metadata records with realistic field shapes.
pub fn synthesize_records(n: usize, seed: u64) -> Vec<MetadataRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| synth_record(&mut rng)).collect()
}

fn synth_record<R: Rng>(rng: &mut R) -> MetadataRecord {
    let topic = format!("{} {}", pick(rng, TITLE_ADJECTIVES), pick(rng, TITLE_NOUNS));
    let title = match rng.gen_range(0..3) {
        0 => format!("{topic} {}", pick(rng, TITLE_CONTEXTS)),
        1 => format!("{topic} {}: {}", pick(rng, TITLE_CONTEXTS), pick(rng, TITLE_SUBTITLES)),
        _ => format!("{topic}. {}", pick(rng, TITLE_SUBTITLES)),
    };

    let n_authors = rng.gen_range(1..=3);
    let mut authors = Vec::new();
    let mut emails = Vec::new();
    let mut affiliations = Vec::new();
    let mut addresses = Vec::new();
    let n_sites = rng.gen_range(1..=n_authors.min(2));
    let sites: Vec<_> = (0..n_sites).map(|_| *CITIES.choose(rng).unwrap()).collect();
    for a in 0..n_authors {
        let first = pick(rng, FIRST_NAMES);
        let last = pick(rng, LAST_NAMES);
        authors.push(format!("{first} {last}"));
        let (_, _, domain) = sites[a % n_sites];
        if rng.gen_bool(0.8) {
            emails.push(format!("{}.{}@{domain}", ascii_fold(first), ascii_fold(last)));
        }
    }
    for &(city, postcode, _) in &sites {
        let aff = if rng.gen_bool(0.2) {
            pick(rng, INSTITUTES).to_string()
        } else {
            match rng.gen_range(0..3) {
                0 => format!("Institut für {}, Universität {city}", pick(rng, SUBJECTS)),
                1 => format!("Lehrstuhl für {}, Universität {city}", pick(rng, SUBJECTS)),
                _ => format!("Fakultät für {}", pick(rng, SUBJECTS)),
            }
        };
        affiliations.push(aff);
        if rng.gen_bool(0.85) {
            addresses.push(format!(
                "{} {}, {postcode} {city}",
                pick(rng, STREETS),
                rng.gen_range(1..120)
            ));
        }
    }

    let journal = if rng.gen_bool(0.5) {
        format!(
            "{} {}({})",
            pick(rng, JOURNALS),
            rng.gen_range(10..70),
            rng.gen_range(1..=6)
        )
    } else {
        pick(rng, JOURNALS).to_string()
    };
    let date = if rng.gen_bool(0.95) { synth_date(rng) } else { String::new() };
    let doi = if rng.gen_bool(0.9) {
        let d = format!(
            "{}/{}-{}-{:04}",
            pick(rng, DOI_PREFIXES),
            pick(rng, DOI_SLUGS),
            rng.gen_range(1995..=2023),
            rng.gen_range(0..10000)
        );
        if rng.gen_bool(0.3) {
            format!("https://doi.org/{d}")
        } else {
            d
        }
    } else {
        String::new()
    };
    let min_words = rng.gen_range(40..=90);
    MetadataRecord {
        abstract_: synth_abstract(rng, &topic, min_words),
        title,
        authors,
        emails,
        addresses,
        date,
        journal,
        affiliations,
        doi,
    }
}
