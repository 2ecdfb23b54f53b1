//! `multimeta`: corpus generation, training, extraction and evaluation.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.

mod corpus;
mod evaluate;
mod extract;
mod files;
mod tools;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multimeta_core::pipeline::Stage;

#[derive(Parser)]
#[command(name = "multimeta", version, about = "Multimodal metadata extraction from scientific first pages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic metadata records as JSON lines.
    GenRecords {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render records into labeled annotation files, one per document.
    GenCorpus {
        #[arg(long)]
        records: PathBuf,
        /// Directory of template JSON files; the built-in layouts when omitted.
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        per_template: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one stage from a run configuration.
    Train {
        #[arg(long, value_parser = parse_stage)]
        model: Stage,
        #[arg(long)]
        config: PathBuf,
    },
    /// Label documents and assemble their metadata records.
    Extract {
        /// An annotation file or a directory of them.
        #[arg(long)]
        doc: PathBuf,
        /// Imported region predictions (JSON lines) replacing the native vision stage.
        #[arg(long)]
        vision_pred: Option<PathBuf>,
        /// Output file for a single document, output directory otherwise.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Checkpoint directory; overrides the one named in --config.
        #[arg(long)]
        checkpoints: Option<PathBuf>,
        /// Which stage's labels to emit.
        #[arg(long, value_parser = parse_stage, default_value = "fusion")]
        stage: Stage,
        /// Only documents of this split (needs --config): train, val or test.
        #[arg(long)]
        split: Option<String>,
    },
    /// Score predictions against gold annotations.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, value_enum)]
        mode: evaluate::Mode,
        #[arg(long, default_value_t = multimeta_core::eval::DEFAULT_MATCH_THRESHOLD)]
        threshold: f64,
        /// Leave date and DOI out of field-level scores.
        #[arg(long)]
        exclude_date_doi: bool,
        /// Score only the gold documents that have predictions.
        #[arg(long)]
        subset: bool,
        /// Reports go to <out>/reports.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Field-level comparison of several extraction runs.
    Compare {
        /// NAME=DIR, repeated.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<String>,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value_t = multimeta_core::eval::DEFAULT_MATCH_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        exclude_date_doi: bool,
        #[arg(long)]
        subset: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Finite-difference check of analytic gradients on small seeded models.
    Gradcheck {
        #[arg(long, default_value_t = 24)]
        models: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Feature inspection.
    Features {
        #[command(subcommand)]
        command: FeaturesCommand,
    },
}

#[derive(Subcommand)]
enum FeaturesCommand {
    /// Print the per-token feature vectors of a document as CSV rows.
    Dump {
        #[arg(long)]
        doc: PathBuf,
        /// Embedding size and seed come from here; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    s.parse().map_err(|e: multimeta_core::Error| e.to_string())
}

/// Raised for failures that must exit with code 2.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| {
        e.is::<NumericalFailure>()
            || e.downcast_ref::<multimeta_core::Error>().is_some_and(|e| e.is_numerical())
    });
    if numerical {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenRecords { count, seed, out } => corpus::gen_records(count, seed, &out),
        Command::GenCorpus {
            records,
            templates,
            per_template,
            seed,
            out,
        } => corpus::gen_corpus(&records, templates.as_deref(), per_template, seed, &out),
        Command::Train { model, config } => train::train(model, &config),
        Command::Extract {
            doc,
            vision_pred,
            out,
            config,
            checkpoints,
            stage,
            split,
        } => extract::extract(&extract::ExtractArgs {
            doc,
            vision_pred,
            out,
            config,
            checkpoints,
            stage,
            split,
        }),
        Command::Eval {
            pred,
            gold,
            mode,
            threshold,
            exclude_date_doi,
            subset,
            out,
        } => evaluate::eval(&pred, &gold, mode, threshold, exclude_date_doi, subset, &out),
        Command::Compare {
            runs,
            gold,
            threshold,
            exclude_date_doi,
            subset,
            out,
        } => evaluate::compare(&runs, &gold, threshold, exclude_date_doi, subset, &out),
        Command::Gradcheck { models, seed } => tools::gradcheck(models, seed),
        Command::Features {
            command: FeaturesCommand::Dump { doc, config, out },
        } => tools::dump_features(&doc, config.as_deref(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
