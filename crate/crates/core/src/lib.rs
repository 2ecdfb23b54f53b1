//! Multimodal metadata extraction for the first page of scientific documents.
//!
//! The pipeline has three trainable parts that all speak the same language: a
//! per-token probability distribution over ten classes ([`ProbDist10`]).
//!
//! * [`features`] turns a [`corpus::LabeledDocument`] into layout + embedding vectors,
//!   which the NLP labeler (a biLSTM from [`nn`]) maps to per-token distributions.
//! * [`vision`] segments the page into regions, classifies them and spreads the
//!   region distributions back onto the words inside them.
//! * [`fusion`] concatenates both distributions and labels every token with a
//!   second biLSTM.
//!
//! [`corpus`] synthesizes labeled pages from metadata records and layout templates,
//! and [`eval`] scores token labels and extracted fields.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod nn;
pub mod pipeline;
pub mod vision;

pub use corpus::{Label, LabeledDocument, MetadataRecord, Token};
pub use error::{Error, Result};

/// Number of output classes (nine metadata classes plus unclassified).
pub const NUM_CLASSES: usize = 10;

/// A probability distribution over the ten classes, indexed by [`Label::index`].
pub type ProbDist10 = [f64; NUM_CLASSES];

/// Uniform distribution over all classes.
pub const UNIFORM: ProbDist10 = [0.1; NUM_CLASSES];

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in dist.iter().enumerate() {
        if v > dist[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn one_hot(label: Label) -> ProbDist10 {
    let mut d = [0.0; NUM_CLASSES];
    d[label.index()] = 1.0;
    d
}

/// Mixes a seed with a stream id; used to derive independent per-item seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
