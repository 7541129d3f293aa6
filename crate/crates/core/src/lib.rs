//! Reference-aware meta-evaluation for machine translation.
//!
//! The crate scores system outputs against configurable reference sets
//! (standard, paraphrased, rating-composed and multi-reference), correlates
//! system-level metric scores with human judgments, and computes the
//! diagnostics used to compare reference styles: matched n-gram attribution
//! and alignment monotonicity.
//!
//! Modules:
//!
//! - [`corpus`]: loading, validating and filtering line-aligned artifacts.
//! - [`tokenize`]: international word tokenization, character sequences, casing.
//! - [`metrics`]: corpus BLEU (single and multi-reference), chrF and TER.
//! - [`refsets`]: best-rated reference composition and multi-reference bundles.
//! - [`correlate`]: Kendall's tau-b, Spearman's rho, top-k curves, ranking agreement.
//! - [`analysis`]: matched n-gram reports and alignment monotonicity.

#![forbid(unsafe_code)]

pub mod analysis;
pub mod corpus;
pub mod correlate;
pub mod metrics;
pub mod refsets;
pub mod tokenize;

mod error;

pub use error::Error;

pub use corpus::{
    AdequacyRatings, AlignmentSet, ExternalMetricScores, HumanSystemScores, LanguagePair,
    MultiReference, Orientation, ReferenceKind, ReferenceSet, Segment, SystemOutput, TestSet,
    Workspace,
};
pub use metrics::{MetricKind, MetricResult};

/// Version string embedded in metric signatures.
pub const IMPL_VERSION: &str = env!("CARGO_PKG_VERSION");
