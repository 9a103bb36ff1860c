//! Offline evaluation of keyword-filter configurations against a corpus of
//! posts: rule parsing and matching, collections of labelled examples,
//! similarity ranking against those examples, and trigger analysis.
//!
//! Numeric similarity code is generic over [`Scalar`]; the aliases below fix
//! it to `f64`, which is what [`Workspace`] uses.

pub mod analysis;
pub mod collections;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod fixture;
pub mod report;
pub mod rules;
pub mod scalar;
pub mod similarity;
pub mod store;
pub mod workspace;

pub use collections::{CollectionKind, Collections, CoverageRatio};
pub use corpus::{ImportReport, Post};
pub use error::{Error, Result};
pub use report::{build_report, Report};
pub use rules::{parse_config, Diagnostic, DiagnosticKind, MatchResult, MatchSpan, ParseError, RuleSet, TriggerRef};
pub use scalar::Scalar;
pub use similarity::{EmbeddingVector, ProviderSpec};
pub use workspace::{Bucket, EmbeddingStatus, SortOrder, Workspace};

pub type Embedding = similarity::EmbeddingVector<f64>;
pub type Score = f64;
pub type ScoreDistribution = similarity::Distribution<f64>;
pub type TfIdfModel = similarity::TfIdf<f64>;

pub type EmbeddingF32 = similarity::EmbeddingVector<f32>;
pub type ScoreDistributionF32 = similarity::Distribution<f32>;
pub type TfIdfModelF32 = similarity::TfIdf<f32>;
