//! Token-level precision/recall/F1 and field-level matching by cosine similarity.

mod field;
mod token;

pub use field::{
    compare_extractors, cosine_similarity, extraction_f1, field_match, normalize_words, ClassMatch,
    ComparisonRow, ComparisonTable, MatchReport, DEFAULT_MATCH_THRESHOLD,
};
pub use token::{f1, token_prf, Averages, ClassPrf, PrfReport};
