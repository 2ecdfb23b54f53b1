use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use multimeta_core::features::{build_feature_sequence, hashing_embedder, write_feature_dump};
use multimeta_core::nn::{gradcheck_suite, GRADCHECK_TOLERANCE};
use multimeta_core::pipeline::RunConfig;

use crate::files::{create_parent, read_annotated};
use crate::train::load_config;
use crate::NumericalFailure;

pub fn gradcheck(models: usize, seed: u64) -> Result<()> {
    if models == 0 {
        anyhow::bail!("--models must be positive");
    }
    let cases = gradcheck_suite(models, seed)?;
    let mut worst: f64 = 0.0;
    for (k, c) in cases.iter().enumerate() {
        println!(
            "{k:>3} {:<6} d_in={:<2} h={} tokens={} max_rel_error={:.3e}",
            c.architecture.to_string(),
            c.input_dim,
            c.hidden,
            c.tokens,
            c.max_rel_error
        );
        worst = worst.max(c.max_rel_error);
    }
    println!("max relative error {worst:.3e} over {models} models (tolerance {GRADCHECK_TOLERANCE:e})");
    if !(worst < GRADCHECK_TOLERANCE) {
        return Err(NumericalFailure(format!("gradient check failed: {worst:e} >= {GRADCHECK_TOLERANCE:e}")).into());
    }
    Ok(())
}

pub fn dump_features(doc: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let cfg = match config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let d = read_annotated(doc)?.doc;
    let seq = build_feature_sequence(&d, &hashing_embedder(cfg.embed_dim, cfg.embed_seed())?)?;
    match out {
        Some(p) => {
            create_parent(p)?;
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(f);
            write_feature_dump(&mut w, &seq)?;
            w.flush()?;
        }
        None => write_feature_dump(io::stdout().lock(), &seq)?,
    }
    Ok(())
}
